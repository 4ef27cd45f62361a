from solution import mean_absolute_deviation


def test_three():
    assert abs(mean_absolute_deviation([1.0, 2.0, 3.0]) - 2.0 / 3.0) < 1e-6


def test_four():
    assert abs(mean_absolute_deviation([1.0, 2.0, 3.0, 4.0]) - 1.0) < 1e-6


def test_five():
    assert abs(mean_absolute_deviation([1.0, 2.0, 3.0, 4.0, 5.0]) - 6.0 / 5.0) < 1e-6


def test_constant():
    assert mean_absolute_deviation([7.0, 7.0]) == 0.0
