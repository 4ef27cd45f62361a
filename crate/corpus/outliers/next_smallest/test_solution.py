from solution import next_smallest


def test_found():
    assert next_smallest([1, 2, 3, 4, 5]) == 2
    assert next_smallest([5, 1, 4, 3, 2]) == 2
    assert next_smallest([-35, 34, 12, -45]) == -35


def test_missing():
    assert next_smallest([]) is None
    assert next_smallest([1, 1]) is None
    assert next_smallest([1, 1, 1, 1, 0]) == 1
