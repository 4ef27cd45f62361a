def common(first, second):
    """Sorted unique elements present in both lists."""
    shared = set()
    for a in first:
        for b in second:
            if a == b:
                shared.add(a)
    result = list(shared)
    result.sort()
    return result
