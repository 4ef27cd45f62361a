def monotonic(values):
    """True when the list is entirely non-increasing or non-decreasing."""
    increasing = True
    decreasing = True
    for i in range(1, len(values)):
        if values[i] < values[i - 1]:
            increasing = False
        if values[i] > values[i - 1]:
            decreasing = False
    return increasing or decreasing
