def largest_prime_factor(n):
    """Largest prime factor of a composite n."""
    largest = 1
    factor = 2
    while n > 1:
        if n % factor == 0:
            largest = factor
            n //= factor
        else:
            factor += 1
    return largest
