def rolling_max(numbers):
    """List of the running maximum of the input."""
    result = []
    running = None
    for n in numbers:
        if running is None or n > running:
            running = n
        result.append(running)
    return result
