def f(nums, width):
    """Count values per bucket of the given width, skipping negatives."""
    buckets = {}
    skipped = 0
    for n in nums:
        if n < 0:
            skipped += 1
            continue
        key = n // width
        buckets[key] = buckets.get(key, 0) + 1
    ordered = []
    for key in sorted(buckets):
        ordered.append((key * width, buckets[key]))
    return ordered, skipped
