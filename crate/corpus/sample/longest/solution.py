def longest(strings):
    """First longest string, or None for an empty list."""
    best = None
    for s in strings:
        if best is None or len(s) > len(best):
            best = s
    return best
