def all_prefixes(text):
    """Prefixes of text from shortest to longest."""
    prefixes = []
    for i in range(len(text)):
        prefixes.append(text[:i + 1])
    return prefixes
