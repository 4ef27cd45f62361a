from solution import histogram


def test_ties():
    assert histogram('a b b a') == {'a': 2, 'b': 2}
    assert histogram('a b c') == {'a': 1, 'b': 1, 'c': 1}


def test_winner():
    assert histogram('a b c a b') == {'a': 2, 'b': 2}
    assert histogram('b b b b a') == {'b': 4}
    assert histogram('r t g') == {'r': 1, 't': 1, 'g': 1}


def test_empty():
    assert histogram('') == {}
