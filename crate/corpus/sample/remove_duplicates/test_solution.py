from solution import remove_duplicates


def test_empty():
    assert remove_duplicates([]) == []


def test_no_duplicates():
    assert remove_duplicates([1, 2, 3, 4]) == [1, 2, 3, 4]


def test_duplicates():
    assert remove_duplicates([1, 2, 3, 2, 4, 3, 5]) == [1, 4, 5]
    assert remove_duplicates([7, 7, 7]) == []
