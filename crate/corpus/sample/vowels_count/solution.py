def vowels_count(word):
    """Count vowels, with a trailing y counted as a vowel."""
    count = 0
    for ch in word.lower():
        if ch in 'aeiou':
            count += 1
    if word and word[-1] in 'yY':
        count += 1
    return count
