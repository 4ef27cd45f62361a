def incr_list(values):
    """Each element incremented by one."""
    out = []
    for v in values:
        out.append(v + 1)
    return out
