from solution import f


def test_lower_and_upper():
    assert f('abc XYZ', 1) == 'bcd YZA'
    assert f('Hello World', 3) == 'Khoor Zruog'


def test_non_letters():
    assert f('a1 b-2', 2) == 'c1 d-2'
    assert f('', 5) == ''
    assert f('zz', 27) == 'aa'
