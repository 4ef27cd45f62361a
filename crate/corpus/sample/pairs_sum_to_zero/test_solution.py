from solution import pairs_sum_to_zero


def test_pairs():
    assert pairs_sum_to_zero([1, 3, 5, 0]) is False
    assert pairs_sum_to_zero([1, 3, -2, 1]) is False
    assert pairs_sum_to_zero([2, 4, -5, 3, 5, 7]) is True
    assert pairs_sum_to_zero([1]) is False


def test_zero_needs_two():
    assert pairs_sum_to_zero([0]) is False
    assert pairs_sum_to_zero([0, 0]) is True
