def string_xor(a, b):
    """Bitwise xor of two equal-length binary strings."""
    bits = []
    for x, y in zip(a, b):
        if x == y:
            bits.append('0')
        else:
            bits.append('1')
    return ''.join(bits)
