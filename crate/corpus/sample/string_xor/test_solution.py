from solution import string_xor


def test_xor():
    assert string_xor('111000', '101010') == '010010'
    assert string_xor('1', '1') == '0'
    assert string_xor('0101', '0000') == '0101'


def test_empty():
    assert string_xor('', '') == ''
