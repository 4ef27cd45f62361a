def sort_even(values):
    """Sort the values at even indices, keeping odd indices in place."""
    evens = []
    for i in range(0, len(values), 2):
        evens.append(values[i])
    evens.sort()
    result = list(values)
    position = 0
    for i in range(0, len(values), 2):
        result[i] = evens[position]
        position += 1
    return result
