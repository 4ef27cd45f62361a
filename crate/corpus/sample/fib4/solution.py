def fib4(n):
    """Fourth-order Fibonacci-like sequence, computed iteratively."""
    window = [0, 0, 2, 0]
    if n < 4:
        return window[n]
    for _ in range(4, n + 1):
        nxt = window[0] + window[1] + window[2] + window[3]
        window = [window[1], window[2], window[3], nxt]
    return window[3]
