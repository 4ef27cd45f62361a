def derivative(coefficients):
    """Coefficients of the derivative of a polynomial."""
    result = []
    for power in range(1, len(coefficients)):
        result.append(power * coefficients[power])
    return result
