from solution import vowels_count


def test_plain():
    assert vowels_count('abcde') == 2
    assert vowels_count('Alone') == 3
    assert vowels_count('bye') == 1


def test_trailing_y():
    assert vowels_count('key') == 2
    assert vowels_count('ACEDY') == 3
    assert vowels_count('') == 0
