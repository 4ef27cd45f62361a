def remove_duplicates(numbers):
    """Keep only the elements that occur exactly once, in order."""
    counts = {}
    for n in numbers:
        counts[n] = counts.get(n, 0) + 1
    unique = []
    for n in numbers:
        if counts[n] == 1:
            unique.append(n)
    return unique
