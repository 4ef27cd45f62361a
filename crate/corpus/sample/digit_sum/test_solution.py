from solution import digit_sum


def test_values():
    assert digit_sum('') == 0
    assert digit_sum('abAB') == 131
    assert digit_sum('abcCd') == 67
    assert digit_sum('helloE') == 69
    assert digit_sum('woArBld') == 131
    assert digit_sum('aAaaaXa') == 153
