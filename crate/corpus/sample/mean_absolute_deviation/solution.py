def mean_absolute_deviation(numbers):
    """Mean absolute difference between each element and the mean."""
    total = 0.0
    for x in numbers:
        total += x
    mean = total / len(numbers)
    deviation = 0.0
    for x in numbers:
        deviation += abs(x - mean)
    return deviation / len(numbers)
