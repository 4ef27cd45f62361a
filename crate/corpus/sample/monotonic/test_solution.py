from solution import monotonic


def test_increasing():
    assert monotonic([1, 2, 4, 10]) is True
    assert monotonic([1, 2, 4, 20]) is True


def test_not_monotonic():
    assert monotonic([1, 20, 4, 10]) is False
    assert monotonic([1, 2, 3, 2, 5, 60]) is False


def test_decreasing_and_flat():
    assert monotonic([4, 1, 0, -10]) is True
    assert monotonic([4, 1, 1, 0]) is True
    assert monotonic([9, 9, 9, 9]) is True
