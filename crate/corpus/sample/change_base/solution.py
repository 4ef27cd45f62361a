def change_base(x, base):
    """String representation of x in a base below ten."""
    if x == 0:
        return '0'
    digits = ''
    while x > 0:
        digits = str(x % base) + digits
        x //= base
    return digits
