from solution import change_base


def test_binary():
    assert change_base(8, 2) == '1000'
    assert change_base(7, 2) == '111'


def test_ternary():
    assert change_base(8, 3) == '22'
    assert change_base(9, 3) == '100'


def test_other():
    assert change_base(234, 7) == '453'
    assert change_base(16, 2) == '10000'
    assert change_base(0, 5) == '0'
    for x in range(2, 8):
        assert change_base(x, x + 1) == str(x)
