def f(text, shift):
    """Caesar-shift the letters of each word and join them back."""
    words = text.split()
    shifted = []
    for word in words:
        out = ''
        for ch in word:
            if ch.isalpha():
                base = ord('a') if ch.islower() else ord('A')
                out += chr((ord(ch) - base + shift) % 26 + base)
            else:
                out += ch
        shifted.append(out)
    return ' '.join(shifted)
