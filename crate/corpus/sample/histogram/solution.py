def histogram(text):
    """Letters with the highest count and that count."""
    counts = {}
    for word in text.split(' '):
        if word:
            counts[word] = counts.get(word, 0) + 1
    if not counts:
        return {}
    best = max(counts.values())
    result = {}
    for letter, n in counts.items():
        if n == best:
            result[letter] = n
    return result
