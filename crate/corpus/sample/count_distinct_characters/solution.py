def count_distinct_characters(text):
    """Number of distinct characters, ignoring case."""
    seen = set()
    for ch in text:
        seen.add(ch.lower())
    return len(seen)
