"""Symbolic expression trees with canonical ordering and simplification."""
from fractions import Fraction
from functools import reduce

import sympy


class Expr:
    precedence = 100

    def __add__(self, other):
        return Add(self, wrap(other))

    def __radd__(self, other):
        return Add(wrap(other), self)

    def __mul__(self, other):
        return Mul(self, wrap(other))

    def __rmul__(self, other):
        return Mul(wrap(other), self)

    def __neg__(self):
        return Mul(Const(-1), self)

    def __sub__(self, other):
        return Add(self, -wrap(other))

    def __pow__(self, other):
        return Pow(self, wrap(other))

    def free_symbols(self):
        out = set()
        for a in self.args():
            out |= a.free_symbols()
        return out

    def args(self):
        return ()

    def sort_key(self):
        return (self.precedence, str(self))


class Const(Expr):
    precedence = 0

    def __init__(self, value):
        self.value = Fraction(value)

    def __str__(self):
        if self.value.denominator == 1:
            return str(self.value.numerator)
        return '%d/%d' % (self.value.numerator, self.value.denominator)

    def __eq__(self, other):
        return isinstance(other, Const) and self.value == other.value

    def __hash__(self):
        return hash(('const', self.value))

    def evaluate(self, env):
        return self.value


class Symbol(Expr):
    precedence = 1

    def __init__(self, name):
        self.name = name

    def __str__(self):
        return self.name

    def __eq__(self, other):
        return isinstance(other, Symbol) and self.name == other.name

    def __hash__(self):
        return hash(('sym', self.name))

    def free_symbols(self):
        return {self.name}

    def evaluate(self, env):
        if self.name not in env:
            raise KeyError('unbound symbol %s' % self.name)
        return env[self.name]


class Add(Expr):
    precedence = 3

    def __init__(self, *terms):
        self.terms = list(terms)

    def args(self):
        return tuple(self.terms)

    def __str__(self):
        return ' + '.join(str(t) for t in self.terms)

    def __eq__(self, other):
        return isinstance(other, Add) and sorted(map(str, self.terms)) == sorted(map(str, other.terms))

    def __hash__(self):
        return hash(('add', tuple(sorted(map(str, self.terms)))))

    def evaluate(self, env):
        return sum((t.evaluate(env) for t in self.terms), Fraction(0))


class Mul(Expr):
    precedence = 2

    def __init__(self, *factors):
        self.factors = list(factors)

    def args(self):
        return tuple(self.factors)

    def __str__(self):
        parts = []
        for f in self.factors:
            text = str(f)
            parts.append('(%s)' % text if f.precedence > self.precedence else text)
        return '*'.join(parts)

    def __eq__(self, other):
        return isinstance(other, Mul) and sorted(map(str, self.factors)) == sorted(map(str, other.factors))

    def __hash__(self):
        return hash(('mul', tuple(sorted(map(str, self.factors)))))

    def evaluate(self, env):
        return reduce(lambda a, b: a * b, (f.evaluate(env) for f in self.factors), Fraction(1))


class Pow(Expr):
    precedence = 1

    def __init__(self, base, exp):
        self.base = base
        self.exp = exp

    def args(self):
        return (self.base, self.exp)

    def __str__(self):
        return '(%s)**(%s)' % (self.base, self.exp)

    def __eq__(self, other):
        return isinstance(other, Pow) and self.base == other.base and self.exp == other.exp

    def __hash__(self):
        return hash(('pow', self.base, self.exp))

    def evaluate(self, env):
        value = self.exp.evaluate(env)
        if value.denominator != 1:
            raise ValueError('non-integer exponent')
        return self.base.evaluate(env) ** int(value)


def wrap(value):
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)):
        return Const(value)
    if isinstance(value, str):
        return Symbol(value)
    raise TypeError('cannot convert %r' % (value,))


def flatten(expr):
    if isinstance(expr, Add):
        terms = []
        for t in map(flatten, expr.terms):
            terms.extend(t.terms if isinstance(t, Add) else [t])
        return Add(*terms)
    if isinstance(expr, Mul):
        factors = []
        for f in map(flatten, expr.factors):
            factors.extend(f.factors if isinstance(f, Mul) else [f])
        return Mul(*factors)
    if isinstance(expr, Pow):
        return Pow(flatten(expr.base), flatten(expr.exp))
    return expr


def simplify(expr):
    expr = flatten(expr)
    if isinstance(expr, Add):
        constant = Fraction(0)
        coefficients = {}
        order = []
        for term in map(simplify, expr.terms):
            if isinstance(term, Const):
                constant += term.value
                continue
            coeff, rest = Fraction(1), term
            if isinstance(term, Mul) and isinstance(term.factors[0], Const):
                coeff = term.factors[0].value
                rest = Mul(*term.factors[1:]) if len(term.factors) > 2 else term.factors[1]
            if rest not in coefficients:
                order.append(rest)
                coefficients[rest] = Fraction(0)
            coefficients[rest] += coeff
        terms = []
        for rest in sorted(order, key=lambda e: e.sort_key()):
            c = coefficients[rest]
            if c == 0:
                continue
            terms.append(rest if c == 1 else Mul(Const(c), rest))
        if constant != 0 or not terms:
            terms.append(Const(constant))
        return terms[0] if len(terms) == 1 else Add(*terms)
    if isinstance(expr, Mul):
        constant = Fraction(1)
        rest = []
        for f in map(simplify, expr.factors):
            if isinstance(f, Const):
                constant *= f.value
            else:
                rest.append(f)
        if constant == 0:
            return Const(0)
        rest.sort(key=lambda e: e.sort_key())
        if constant != 1:
            rest.insert(0, Const(constant))
        if not rest:
            return Const(constant)
        return rest[0] if len(rest) == 1 else Mul(*rest)
    if isinstance(expr, Pow):
        base, exp = simplify(expr.base), simplify(expr.exp)
        if isinstance(exp, Const) and exp.value == 0:
            return Const(1)
        if isinstance(exp, Const) and exp.value == 1:
            return base
        if isinstance(base, Const) and isinstance(exp, Const) and exp.value.denominator == 1:
            return Const(base.value ** int(exp.value))
        return Pow(base, exp)
    return expr


def to_sympy(expr):
    return sympy.sympify(str(expr).replace('/', '/'))
