def strange_sort_list(values):
    """Alternate minimum and maximum of the remaining values."""
    remaining = sorted(values)
    result = []
    take_min = True
    while remaining:
        if take_min:
            result.append(remaining.pop(0))
        else:
            result.append(remaining.pop())
        take_min = not take_min
    return result
