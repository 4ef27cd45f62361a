from solution import separate_paren_groups


def test_nested_groups():
    assert separate_paren_groups('(()()) ((())) () ((())()())') == [
        '(()())', '((()))', '()', '((())()())'
    ]


def test_flat_groups():
    assert separate_paren_groups('() (()) ((())) (((())))') == ['()', '(())', '((()))', '(((())))']


def test_single():
    assert separate_paren_groups('(()(())((())))') == ['(()(())((())))']


def test_spaces_ignored():
    assert separate_paren_groups('( ) (( )) (( )( ))') == ['()', '(())', '(()())']
