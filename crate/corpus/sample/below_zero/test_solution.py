from solution import below_zero


def test_empty():
    assert below_zero([]) is False


def test_never_negative():
    assert below_zero([1, 2, -3, 1, 2, -3]) is False


def test_goes_negative():
    assert below_zero([1, 2, -4, 5, 6]) is True
    assert below_zero([1, -1, 2, -2, 5, -5, 4, -5]) is True


def test_exact_zero():
    assert below_zero([1, -1, 2, -2, 5, -5, 4, -4]) is False
