from solution import strange_sort_list


def test_examples():
    assert strange_sort_list([1, 2, 3, 4]) == [1, 4, 2, 3]
    assert strange_sort_list([5, 6, 7, 8, 9]) == [5, 9, 6, 8, 7]
    assert strange_sort_list([5, 5, 5, 5]) == [5, 5, 5, 5]


def test_edge():
    assert strange_sort_list([]) == []
    assert strange_sort_list([0, 2, 2, 2, 5, 5, -5, -5]) == [-5, 5, -5, 5, 0, 2, 2, 2]
    assert strange_sort_list([111111]) == [111111]
