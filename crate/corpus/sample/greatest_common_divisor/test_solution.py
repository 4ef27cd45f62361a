from solution import greatest_common_divisor


def test_gcd():
    assert greatest_common_divisor(3, 7) == 1
    assert greatest_common_divisor(10, 15) == 5
    assert greatest_common_divisor(49, 14) == 7
    assert greatest_common_divisor(144, 60) == 12


def test_zero():
    assert greatest_common_divisor(9, 0) == 9
