def next_smallest(values):
    """Second smallest distinct element, or None."""
    smallest = None
    second = None
    for v in values:
        if smallest is None or v < smallest:
            if smallest is not None:
                second = smallest
            smallest = v
        elif v != smallest and (second is None or v < second):
            second = v
    return second
