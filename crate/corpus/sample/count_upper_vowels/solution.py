def count_upper_vowels(s):
    """Count uppercase vowels at even indices."""
    count = 0
    for i in range(0, len(s), 2):
        if s[i] in 'AEIOU':
            count += 1
    return count
