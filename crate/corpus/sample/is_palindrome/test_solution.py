from solution import is_palindrome


def test_true():
    assert is_palindrome('') is True
    assert is_palindrome('aba') is True
    assert is_palindrome('aaaaa') is True


def test_false():
    assert is_palindrome('zbcd') is False
    assert is_palindrome('xywyz') is False
    assert is_palindrome('xywzx') is False
