from solution import sort_even


def test_short():
    assert sort_even([1, 2, 3]) == [1, 2, 3]
    assert sort_even([]) == []


def test_longer():
    assert sort_even([5, 3, -5, 2, -3, 3, 9, 0, 123, 1, -10]) == [-10, 3, -5, 2, -3, 3, 5, 0, 9, 1, 123]
    assert sort_even([5, 8, -12, 4, 23, 2, 3, 11, 12, -10]) == [-12, 8, 3, 4, 5, 2, 12, 11, 23, -10]
