from solution import f


def test_buckets():
    assert f([1, 2, 11, 12, 25], 10) == ([(0, 2), (10, 2), (20, 1)], 0)
    assert f([5, 5, 5], 5) == ([(5, 3)], 0)


def test_negatives():
    assert f([-1, 3, -7, 4], 2) == ([(2, 1), (4, 1)], 2)
    assert f([], 3) == ([], 0)
