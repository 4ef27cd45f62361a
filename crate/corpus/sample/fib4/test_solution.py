from solution import fib4


def test_base():
    assert fib4(0) == 0
    assert fib4(2) == 2
    assert fib4(3) == 0


def test_sequence():
    assert fib4(5) == 4
    assert fib4(8) == 28
    assert fib4(10) == 104
    assert fib4(12) == 386
