from solution import count_upper_vowels


def test_examples():
    assert count_upper_vowels('aBCdEf') == 1
    assert count_upper_vowels('abcdefg') == 0
    assert count_upper_vowels('dBBE') == 0


def test_more():
    assert count_upper_vowels('B') == 0
    assert count_upper_vowels('U') == 1
    assert count_upper_vowels('') == 0
    assert count_upper_vowels('EEEE') == 2
