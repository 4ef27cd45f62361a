def triples_sum_to_zero(values):
    """True when three distinct positions sum to zero."""
    n = len(values)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                if values[i] + values[j] + values[k] == 0:
                    return True
    return False
