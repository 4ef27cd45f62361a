def run_length(text):
    """Run-length encoding as a list of (char, count) pairs."""
    runs = []
    previous = None
    count = 0
    for ch in text:
        if ch == previous:
            count += 1
        else:
            if previous is not None:
                runs.append((previous, count))
            previous = ch
            count = 1
    if previous is not None:
        runs.append((previous, count))
    return runs
