from solution import run_length


def test_runs():
    assert run_length('aaabccdddd') == [('a', 3), ('b', 1), ('c', 2), ('d', 4)]
    assert run_length('abc') == [('a', 1), ('b', 1), ('c', 1)]


def test_edge():
    assert run_length('') == []
    assert run_length('zzzz') == [('z', 4)]
