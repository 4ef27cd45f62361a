from solution import triples_sum_to_zero


def test_false_cases():
    assert triples_sum_to_zero([1, 3, 5, 0]) is False
    assert triples_sum_to_zero([1, 3, 5, -1]) is False
    assert triples_sum_to_zero([1, 2, 3, 7]) is False
    assert triples_sum_to_zero([1]) is False


def test_true_cases():
    assert triples_sum_to_zero([1, 3, -2, 1]) is True
    assert triples_sum_to_zero([2, 4, -5, 3, 9, 7]) is True
    assert triples_sum_to_zero([1, 3, 5, -100]) is False
