def is_palindrome(text):
    """True when text reads the same in both directions."""
    left = 0
    right = len(text) - 1
    while left < right:
        if text[left] != text[right]:
            return False
        left += 1
        right -= 1
    return True
