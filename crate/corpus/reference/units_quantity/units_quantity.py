"""Physical quantities with unit bookkeeping and conversions."""
import fractions
import functools
import numbers

import numpy as np

BASE_DIMENSIONS = ('m', 'kg', 's', 'A', 'K', 'mol', 'cd')


class UnitError(ValueError):
    pass


@functools.total_ordering
class Unit:
    def __init__(self, scale=1.0, powers=None, name=None):
        self.scale = float(scale)
        self.powers = {k: fractions.Fraction(v) for k, v in (powers or {}).items() if v}
        self.name = name

    def __repr__(self):
        return 'Unit(%s)' % (self.name or self.to_string())

    def to_string(self):
        if not self.powers:
            return 'dimensionless' if self.scale == 1 else '%g' % self.scale
        parts = []
        for dim in BASE_DIMENSIONS:
            p = self.powers.get(dim)
            if p is None:
                continue
            parts.append(dim if p == 1 else '%s^%s' % (dim, p))
        prefix = '' if self.scale == 1 else '%g ' % self.scale
        return prefix + ' '.join(parts)

    def _combine(self, other, sign):
        powers = dict(self.powers)
        for dim, p in other.powers.items():
            powers[dim] = powers.get(dim, 0) + sign * p
        return powers

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return Quantity(other, self)
        return Unit(self.scale * other.scale, self._combine(other, 1))

    def __truediv__(self, other):
        return Unit(self.scale / other.scale, self._combine(other, -1))

    def __pow__(self, exponent):
        exponent = fractions.Fraction(exponent)
        return Unit(self.scale ** float(exponent), {k: v * exponent for k, v in self.powers.items()})

    def __eq__(self, other):
        return isinstance(other, Unit) and self.powers == other.powers and np.isclose(self.scale, other.scale)

    def __lt__(self, other):
        if not self.is_equivalent(other):
            raise UnitError('cannot order %r and %r' % (self, other))
        return self.scale < other.scale

    def __hash__(self):
        return hash((round(self.scale, 12), tuple(sorted(self.powers.items()))))

    def is_equivalent(self, other):
        return self.powers == other.powers

    def conversion_factor(self, other):
        if not self.is_equivalent(other):
            raise UnitError('%s and %s are not convertible' % (self.to_string(), other.to_string()))
        return self.scale / other.scale


class Quantity:
    __array_priority__ = 1000

    def __init__(self, value, unit):
        self.value = np.asarray(value, dtype=float) if not np.isscalar(value) else float(value)
        self.unit = unit

    def __repr__(self):
        return '<Quantity %s %s>' % (self.value, self.unit.to_string())

    def to(self, unit):
        return Quantity(self.value * self.unit.conversion_factor(unit), unit)

    def __add__(self, other):
        if not isinstance(other, Quantity):
            if self.unit.powers:
                raise UnitError('can only add dimensionless values to plain numbers')
            return Quantity(self.value + other, self.unit)
        return Quantity(self.value + other.to(self.unit).value, self.unit)

    def __sub__(self, other):
        return self + (-1 * other)

    def __rmul__(self, other):
        return Quantity(self.value * other, self.unit)

    def __mul__(self, other):
        if isinstance(other, Quantity):
            return Quantity(self.value * other.value, self.unit * other.unit)
        if isinstance(other, Unit):
            return Quantity(self.value, self.unit * other)
        return Quantity(self.value * other, self.unit)

    def __truediv__(self, other):
        if isinstance(other, Quantity):
            return Quantity(self.value / other.value, self.unit / other.unit)
        return Quantity(self.value / other, self.unit)

    def __eq__(self, other):
        if not isinstance(other, Quantity) or not self.unit.is_equivalent(other.unit):
            return False
        return bool(np.all(np.isclose(self.value, other.to(self.unit).value)))

    def decompose(self):
        return Quantity(self.value * self.unit.scale, Unit(1.0, self.unit.powers))


METER = Unit(1.0, {'m': 1}, 'm')
SECOND = Unit(1.0, {'s': 1}, 's')
KILOGRAM = Unit(1.0, {'kg': 1}, 'kg')
KILOMETER = Unit(1000.0, {'m': 1}, 'km')
HOUR = Unit(3600.0, {'s': 1}, 'h')
