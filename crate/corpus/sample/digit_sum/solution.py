def digit_sum(text):
    """Sum of the ASCII codes of the uppercase characters."""
    total = 0
    for ch in text:
        if ch.isupper():
            total += ord(ch)
    return total
