def filter_by_prefix(strings, prefix):
    """Strings that start with prefix, in input order."""
    kept = []
    for s in strings:
        if s.startswith(prefix):
            kept.append(s)
    return kept
