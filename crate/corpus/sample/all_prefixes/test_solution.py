from solution import all_prefixes


def test_prefixes():
    assert all_prefixes('') == []
    assert all_prefixes('asdfgh') == ['a', 'as', 'asd', 'asdf', 'asdfg', 'asdfgh']
    assert all_prefixes('WWW') == ['W', 'WW', 'WWW']
