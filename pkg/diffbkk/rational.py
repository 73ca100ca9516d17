import logging
from fractions import Fraction
from typing import Any, Tuple, Union

import sympy as sp

__all__ = 'T', 'RationalFunction', 'RationalLike', 'constant_symbol'
logger = logging.getLogger('diffbkk.rational')

T = sp.Symbol('t')
"""The independent variable of the differential field Q(t), the derivation is `d/dt`."""

RationalLike = Union['RationalFunction', int, Fraction, sp.Expr]


def constant_symbol(name: str) -> 'RationalFunction':
    """
    An opaque constant of the coefficient field, i.e. a fresh symbol free of `t` whose derivative is zero.

    ```py
    from diffbkk.rational import T, RationalFunction, constant_symbol

    c = constant_symbol('c5')
    assert c.derivative() == 0
    assert (RationalFunction(T) * c).derivative() == c
    ```
    """
    if name == str(T):
        raise ValueError(f'"{T}" is the differential variable and cannot name a constant')
    return RationalFunction(sp.Symbol(name))


class RationalFunction:
    """
    Element of `Q(t)` (optionally extended by opaque constants) kept in reduced form.

    Values are immutable, arithmetic returns new instances.
    """

    __slots__ = ('_expr',)

    def __init__(self, value: RationalLike = 0) -> None:
        if isinstance(value, RationalFunction):
            self._expr: sp.Expr = value._expr
        elif isinstance(value, bool):
            raise TypeError('booleans are not coefficients')
        elif isinstance(value, int):
            self._expr = sp.Integer(value)
        elif isinstance(value, Fraction):
            self._expr = sp.Rational(value.numerator, value.denominator)
        elif isinstance(value, sp.Basic):
            self._expr = _reduce(value)
        else:
            raise TypeError(f'cannot build an exact rational function from {type(value).__name__}')

    @classmethod
    def _raw(cls, expr: sp.Expr) -> 'RationalFunction':
        obj = cls.__new__(cls)
        obj._expr = expr if expr.is_Rational else _reduce(expr)
        return obj

    @property
    def expr(self) -> sp.Expr:
        return self._expr

    @property
    def is_zero(self) -> bool:
        return self._expr == 0

    @property
    def is_number(self) -> bool:
        """`True` for elements of `Q`."""
        return bool(self._expr.is_Rational)

    @property
    def is_constant(self) -> bool:
        """`True` when the derivative vanishes, i.e. the value does not depend on `t`."""
        return T not in self._expr.free_symbols

    def constants(self) -> Tuple[sp.Symbol, ...]:
        return tuple(sorted((s for s in self._expr.free_symbols if s != T), key=str))

    def derivative(self) -> 'RationalFunction':
        if self.is_constant:
            return _ZERO
        return RationalFunction._raw(sp.diff(self._expr, T))

    def numerator_denominator(self) -> Tuple[sp.Poly, sp.Poly]:
        """
        Integer-coefficient numerator and denominator, coprime, with positive leading denominator coefficient.
        """
        gens = (T,) + self.constants()
        num, den = sp.fraction(sp.cancel(self._expr))
        num_c, num_p = sp.Poly(num, *gens).clear_denoms(convert=True)
        den_c, den_p = sp.Poly(den, *gens).clear_denoms(convert=True)
        num_p = num_p * sp.Poly(den_c, *gens)
        den_p = den_p * sp.Poly(num_c, *gens)
        num_content, num_p = num_p.primitive()
        den_content, den_p = den_p.primitive()
        g = sp.igcd(num_content, den_content)
        num_p = num_p * sp.Poly(num_content // g, *gens)
        den_p = den_p * sp.Poly(den_content // g, *gens)
        if den_p.LC() < 0:
            num_p, den_p = -num_p, -den_p
        return num_p, den_p

    @property
    def numerator(self) -> sp.Expr:
        return self.numerator_denominator()[0].as_expr()

    @property
    def denominator(self) -> sp.Expr:
        return self.numerator_denominator()[1].as_expr()

    def evaluate(self, t: RationalLike) -> 'RationalFunction':
        value = RationalFunction(t)._expr
        result = self._expr.subs(T, value)
        if result.has(sp.zoo, sp.nan):
            raise ZeroDivisionError(f'{self} has a pole at t={value}')
        return RationalFunction._raw(result)

    def as_fraction(self) -> Fraction:
        if not self.is_number:
            raise ValueError(f'{self} is not a rational number')
        p, q = self._expr.as_numer_denom()
        return Fraction(int(p), int(q))

    def format(self) -> str:
        """
        Text form following the coefficient grammar: `3`, `3/4`, `(t^2 + 1)` or `(t^2 + 1)/(t - 3)`.
        """
        if self.is_number:
            f = self.as_fraction()
            return str(f.numerator) if f.denominator == 1 else f'{f.numerator}/{f.denominator}'
        num, den = self.numerator_denominator()
        if den.is_ground and den.LC() == 1:
            return f'({_format_int_poly(num)})'
        return f'({_format_int_poly(num)})/({_format_int_poly(den)})'

    def _coerce(self, other: Any) -> 'RationalFunction':
        if isinstance(other, RationalFunction):
            return other
        return RationalFunction(other)

    def __add__(self, other: Any) -> 'RationalFunction':
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return RationalFunction._raw(self._expr + o._expr)

    __radd__ = __add__

    def __sub__(self, other: Any) -> 'RationalFunction':
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return RationalFunction._raw(self._expr - o._expr)

    def __rsub__(self, other: Any) -> 'RationalFunction':
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return RationalFunction._raw(o._expr - self._expr)

    def __mul__(self, other: Any) -> 'RationalFunction':
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return RationalFunction._raw(self._expr * o._expr)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> 'RationalFunction':
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if o.is_zero:
            raise ZeroDivisionError('division by the zero rational function')
        return RationalFunction._raw(self._expr / o._expr)

    def __rtruediv__(self, other: Any) -> 'RationalFunction':
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return o / self

    def __neg__(self) -> 'RationalFunction':
        return RationalFunction._raw(-self._expr)

    def __pow__(self, exponent: int) -> 'RationalFunction':
        if exponent < 0 and self.is_zero:
            raise ZeroDivisionError('negative power of the zero rational function')
        return RationalFunction._raw(self._expr**exponent)

    def __bool__(self) -> bool:
        return not self.is_zero

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, (RationalFunction, int, Fraction, sp.Basic)) or isinstance(other, bool):
            return NotImplemented
        o = self._coerce(other)
        if self._expr == o._expr:
            return True
        if self.is_number and o.is_number:
            return False
        return sp.cancel(self._expr - o._expr) == 0

    def __hash__(self) -> int:
        if self.is_number:
            return hash(self._expr)
        num, den = self.numerator_denominator()
        return hash((num.as_expr(), den.as_expr()))

    def __str__(self) -> str:
        return self.format()

    def __repr__(self) -> str:
        return f'RationalFunction({self.format()!r})'


def _reduce(expr: sp.Basic) -> sp.Expr:
    expr = sp.sympify(expr)
    if expr.is_Rational:
        return expr
    if expr.has(sp.Float):
        raise TypeError(f'floating point values are not exact: {expr}')
    if not expr.is_rational_function(*expr.free_symbols):
        raise ValueError(f'{expr} is not a rational function')
    reduced = sp.cancel(sp.together(expr))
    if reduced.has(sp.zoo, sp.nan):
        raise ZeroDivisionError(f'{expr} has a zero denominator')
    return reduced


def _format_int_poly(poly: sp.Poly) -> str:
    if poly.is_zero:
        return '0'
    gens = [str(g) for g in poly.gens]
    parts = []
    for monom, coeff in poly.terms():
        factors = []
        for name, e in zip(gens, monom):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f'{name}^{e}')
        c = int(coeff)
        sign = '-' if c < 0 else '+'
        body = '*'.join(([str(abs(c))] if abs(c) != 1 or not factors else []) + factors)
        parts.append((sign, body))
    first_sign, first_body = parts[0]
    out = ('-' if first_sign == '-' else '') + first_body
    for sign, body in parts[1:]:
        out += f' {sign} {body}'
    return out


_ZERO = RationalFunction(0)
