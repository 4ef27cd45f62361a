def pairs_sum_to_zero(values):
    """True if two distinct positions hold values summing to zero."""
    seen = set()
    for v in values:
        if -v in seen:
            return True
        seen.add(v)
    return False
