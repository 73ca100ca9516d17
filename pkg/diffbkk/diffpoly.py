import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import sympy as sp

from .polytope import EmptyPolytopeError, LatticePolytope, contains, is_coideal, minkowski_sum, standard_simplex
from .rational import T, RationalFunction, RationalLike

__all__ = (
    'Exponent',
    'JetLayout',
    'DiffPolynomial',
    'TauSystem',
    'total_derivative',
    'coeff_derivative',
    'tau_system',
    'newton_polytope',
    'eliminate_linear',
    'jet',
    'is_jet',
    'evaluate_at_jet',
    'prolong',
    'xi_system',
    'tau_containment',
)
logger = logging.getLogger('diffbkk.diffpoly')

Exponent = Tuple[int, ...]
DEFAULT_NAMES = ('x', 'y', 'z', 'u', 'v', 'w', 'p', 'q', 'r', 'a', 'b', 'c')
_NAME_RE = re.compile(r'^[A-Za-z][A-Za-z0-9]*$')


@dataclass(frozen=True)
class JetLayout:
    """
    Coordinates of the prolongation space: `n` variables, each with derivatives of order `0..l`.

    Coordinates are ordered variable-major, jet-order-minor, so `(i, j)` lives at index `i * (l + 1) + j`.

    ```py
    from diffbkk import JetLayout

    layout = JetLayout(2, 3)
    assert layout.s == 8
    assert layout.index(1, 2) == 6
    assert layout.coordinate_name(6) == 'y_2'
    ```
    """

    n: int
    l: int  # noqa: E741
    names: Tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f'a jet layout needs at least one variable, got n={self.n}')
        if self.l < 0:
            raise ValueError(f'jet order must be non-negative, got l={self.l}')
        names = tuple(self.names)
        if not names:
            names = DEFAULT_NAMES[: self.n] if self.n <= len(DEFAULT_NAMES) else tuple(f'x{i}' for i in range(self.n))
        if len(names) != self.n:
            raise ValueError(f'expected {self.n} variable names, got {len(names)}')
        if len(set(names)) != len(names):
            raise ValueError(f'duplicate variable names: {", ".join(names)}')
        for name in names:
            if not _NAME_RE.match(name):
                raise ValueError(f'invalid variable name {name!r}')
            if name == str(T):
                raise ValueError(f'"{T}" is the differential variable and cannot name a jet variable')
        object.__setattr__(self, 'names', names)

    @property
    def s(self) -> int:
        return self.n * (self.l + 1)

    def index(self, i: int, j: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f'variable index {i} out of range for n={self.n}')
        if not 0 <= j <= self.l:
            raise IndexError(f'jet order {j} out of range for l={self.l}')
        return i * (self.l + 1) + j

    def coordinate(self, idx: int) -> Tuple[int, int]:
        if not 0 <= idx < self.s:
            raise IndexError(f'coordinate {idx} out of range for s={self.s}')
        return divmod(idx, self.l + 1)

    def coordinate_name(self, idx: int) -> str:
        i, j = self.coordinate(idx)
        return self.names[i] if j == 0 else f'{self.names[i]}_{j}'

    def variable_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(name) from None

    def with_order(self, l: int) -> 'JetLayout':  # noqa: E741
        return JetLayout(self.n, l, self.names)

    def tau_layout(self) -> 'JetLayout':
        """
        Layout of the `(ζ, ζ^(1))` space: every coordinate of this layout becomes a base variable of order 1,
        `x_2` is renamed `x2` so `x2_1` is its first prolongation coordinate.
        """
        names = tuple(
            self.names[i] if j == 0 else f'{self.names[i]}{j}' for i, j in (self.coordinate(k) for k in range(self.s))
        )
        return JetLayout(self.s, 1, names)

    def symbols(self) -> Tuple[sp.Symbol, ...]:
        return tuple(sp.Symbol(self.coordinate_name(k)) for k in range(self.s))

    def to_dict(self) -> Dict[str, object]:
        return {'names': list(self.names), 'n': str(self.n), 'l': str(self.l), 's': str(self.s)}


class DiffPolynomial:
    """
    Polynomial in the jet coordinates of a `JetLayout` with coefficients in `Q(t)`.

    `terms` maps exponent vectors (length `layout.s`) to nonzero coefficients and must not be mutated.
    """

    __slots__ = 'layout', 'terms'

    def __init__(self, layout: JetLayout, terms: Optional[Mapping[Sequence[int], RationalLike]] = None) -> None:
        clean: Dict[Exponent, RationalFunction] = {}
        for exp, coeff in (terms or {}).items():
            key = tuple(int(e) for e in exp)
            if len(key) != layout.s:
                raise ValueError(f'exponent vector {key} has length {len(key)}, layout expects {layout.s}')
            if any(e < 0 for e in key):
                raise ValueError(f'negative exponent in {key}')
            c = coeff if isinstance(coeff, RationalFunction) else RationalFunction(coeff)
            if key in clean:
                c = clean[key] + c
            if c.is_zero:
                clean.pop(key, None)
            else:
                clean[key] = c
        self.layout = layout
        self.terms: Mapping[Exponent, RationalFunction] = clean

    @classmethod
    def constant(cls, layout: JetLayout, value: RationalLike) -> 'DiffPolynomial':
        return cls(layout, {(0,) * layout.s: value})

    @classmethod
    def variable(cls, layout: JetLayout, name: Union[str, int], order: int = 0) -> 'DiffPolynomial':
        i = layout.variable_index(name) if isinstance(name, str) else name
        exp = [0] * layout.s
        exp[layout.index(i, order)] = 1
        return cls(layout, {tuple(exp): 1})

    @classmethod
    def monomial(cls, layout: JetLayout, exp: Sequence[int], coeff: RationalLike = 1) -> 'DiffPolynomial':
        return cls(layout, {tuple(exp): coeff})

    @classmethod
    def from_expr(cls, expr: sp.Expr, layout: JetLayout) -> 'DiffPolynomial':
        """
        Build from a sympy expression polynomial in `layout.symbols()`, with coefficients rational in `t`.
        """
        poly = sp.Poly(sp.cancel(expr), *layout.symbols())
        return cls(layout, {exp: RationalFunction(c) for exp, c in poly.as_dict(native=False).items()})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def support(self) -> List[Exponent]:
        return sorted(self.terms)

    def degree(self) -> int:
        """Total degree, `-1` for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, coords: Iterable[int]) -> int:
        cs = list(coords)
        return max((sum(e[c] for c in cs) for e in self.terms), default=-1)

    def as_expr(self) -> sp.Expr:
        syms = self.layout.symbols()
        return sp.Add(*(c.expr * sp.Mul(*(s**e for s, e in zip(syms, exp) if e)) for exp, c in self.terms.items()))

    def embed(self, layout: JetLayout) -> 'DiffPolynomial':
        """
        Re-index into a layout with the same variables and a different jet order.
        """
        if layout == self.layout:
            return self
        if layout.names != self.layout.names:
            raise ValueError('can only embed into a layout over the same variables')
        terms: Dict[Exponent, RationalFunction] = {}
        for exp, c in self.terms.items():
            new = [0] * layout.s
            for idx, e in enumerate(exp):
                if e:
                    i, j = self.layout.coordinate(idx)
                    if j > layout.l:
                        name = self.layout.coordinate_name(idx)
                        raise ValueError(f'{name} does not exist in a layout of order {layout.l}')
                    new[layout.index(i, j)] = e
            terms[tuple(new)] = c
        return DiffPolynomial(layout, terms)

    def partial(self, idx: int) -> 'DiffPolynomial':
        """Formal partial derivative with respect to coordinate `idx`."""
        terms: Dict[Exponent, RationalFunction] = {}
        for exp, c in self.terms.items():
            e = exp[idx]
            if e:
                terms[exp[:idx] + (e - 1,) + exp[idx + 1 :]] = c * e
        return DiffPolynomial(self.layout, terms)

    def evaluate(self, values: Sequence[RationalLike]) -> RationalFunction:
        if len(values) != self.layout.s:
            raise ValueError(f'expected {self.layout.s} values, got {len(values)}')
        vs = [v if isinstance(v, RationalFunction) else RationalFunction(v) for v in values]
        if all(v.is_number for v in vs) and all(c.is_number for c in self.terms.values()):
            fs = [v.as_fraction() for v in vs]
            total = Fraction(0)
            for exp, c in self.terms.items():
                term = c.as_fraction()
                for f, e in zip(fs, exp):
                    if e:
                        term *= f**e
                total += term
            return RationalFunction(total)
        result = RationalFunction(0)
        for exp, c in self.terms.items():
            term = c
            for v, e in zip(vs, exp):
                if e:
                    term = term * v**e
            result = result + term
        return result

    def _check(self, other: 'DiffPolynomial') -> None:
        if other.layout != self.layout:
            raise ValueError('differential polynomials live in different layouts')

    def _lift(self, other: object) -> Optional['DiffPolynomial']:
        if isinstance(other, DiffPolynomial):
            self._check(other)
            return other
        if isinstance(other, (RationalFunction, int, Fraction, sp.Basic)) and not isinstance(other, bool):
            return DiffPolynomial.constant(self.layout, other)
        return None

    def __add__(self, other: object) -> 'DiffPolynomial':
        o = self._lift(other)
        if o is None:
            return NotImplemented
        terms = dict(self.terms)
        for exp, c in o.terms.items():
            terms[exp] = terms[exp] + c if exp in terms else c
        return DiffPolynomial(self.layout, terms)

    __radd__ = __add__

    def __neg__(self) -> 'DiffPolynomial':
        return DiffPolynomial(self.layout, {exp: -c for exp, c in self.terms.items()})

    def __sub__(self, other: object) -> 'DiffPolynomial':
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: object) -> 'DiffPolynomial':
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other: object) -> 'DiffPolynomial':
        o = self._lift(other)
        if o is None:
            return NotImplemented
        terms: Dict[Exponent, RationalFunction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                exp = tuple(a + b for a, b in zip(e1, e2))
                c = c1 * c2
                terms[exp] = terms[exp] + c if exp in terms else c
        return DiffPolynomial(self.layout, terms)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> 'DiffPolynomial':
        if exponent < 0:
            raise ValueError('negative powers are not polynomials')
        result = DiffPolynomial.constant(self.layout, 1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, DiffPolynomial):
            return self.layout == other.layout and dict(self.terms) == dict(other.terms)
        o = self._lift(other)
        return NotImplemented if o is None else self == o

    __hash__ = None  # type: ignore[assignment]

    def __str__(self) -> str:
        from .parse import format_poly

        return format_poly(self)

    def __repr__(self) -> str:
        return f'DiffPolynomial({self.layout.names}, l={self.layout.l}, {str(self)!r})'


@dataclass(frozen=True)
class TauSystem:
    """
    `base` are the input polynomials over their own layout; `pairs[j]` is `Σ_i ∂P_j/∂ζ_i · ζ_i^(1) + P_j^D`
    over `layout`, the `(ζ, ζ^(1))` layout.
    """

    base: Tuple[DiffPolynomial, ...]
    pairs: Tuple[DiffPolynomial, ...]
    layout: JetLayout

    @property
    def polys(self) -> List[DiffPolynomial]:
        """All `2k` equations over the `(ζ, ζ^(1))` layout."""
        return [_to_tau(p, self.layout) for p in self.base] + list(self.pairs)

    def __len__(self) -> int:
        return len(self.base) + len(self.pairs)


def total_derivative(p: DiffPolynomial) -> DiffPolynomial:
    """
    Apply the derivation `D` extended to jets: `D ξ_i^(j) = ξ_i^(j+1)` and `D c = c'`.

    The result lives in the layout of order `l + 1`.

    ```py
    from diffbkk import JetLayout, parse_poly, total_derivative

    layout = JetLayout(2, 0)
    dp = total_derivative(parse_poly('x*y - 1', layout))
    assert dp == parse_poly('x_1*y + x*y_1', layout.with_order(1))
    ```
    """
    src = p.layout
    dst = src.with_order(src.l + 1)
    lifted = p.embed(dst)
    terms: Dict[Exponent, RationalFunction] = {}

    def add(exp: Exponent, c: RationalFunction) -> None:
        terms[exp] = terms[exp] + c if exp in terms else c

    for exp, c in lifted.terms.items():
        dc = c.derivative()
        if not dc.is_zero:
            add(exp, dc)
        for idx, e in enumerate(exp):
            if not e:
                continue
            i, j = dst.coordinate(idx)
            nxt = dst.index(i, j + 1)
            moved = list(exp)
            moved[idx] -= 1
            moved[nxt] += 1
            add(tuple(moved), c * e)
    return DiffPolynomial(dst, terms)


def coeff_derivative(p: DiffPolynomial) -> DiffPolynomial:
    """`P^D`: the derivation applied to every coefficient."""
    return DiffPolynomial(p.layout, {exp: c.derivative() for exp, c in p.terms.items()})


def _tau_exponent(exp: Exponent, order: int = 0, bump: Optional[int] = None) -> Exponent:
    out = [0] * (2 * len(exp))
    for idx, e in enumerate(exp):
        out[2 * idx + order] = e
    if bump is not None:
        out[2 * bump + 1] += 1
    return tuple(out)


def _to_tau(p: DiffPolynomial, tau: JetLayout) -> DiffPolynomial:
    return DiffPolynomial(tau, {_tau_exponent(exp): c for exp, c in p.terms.items()})


def _pair(p: DiffPolynomial, tau: JetLayout) -> DiffPolynomial:
    terms: Dict[Exponent, RationalFunction] = {}
    for idx in range(p.layout.s):
        for exp, c in p.partial(idx).terms.items():
            terms[_tau_exponent(exp, bump=idx)] = c
    for exp, c in coeff_derivative(p).terms.items():
        key = _tau_exponent(exp)
        terms[key] = terms[key] + c if key in terms else c
    return DiffPolynomial(tau, terms)


def tau_system(polys: Sequence[DiffPolynomial]) -> TauSystem:
    """
    The first-order linearisation `{P_j = 0, (dP_j)_ζ(ζ^(1)) + P_j^D(ζ) = 0}`.

    ```py
    from diffbkk import JetLayout, parse_poly, tau_system

    layout = JetLayout(2, 0)
    tau = tau_system([parse_poly('y^2 - (t)*x', layout)])
    assert tau.pairs[0] == parse_poly('2*y*y_1 - (t)*x_1 - x', tau.layout)
    ```
    """
    if not polys:
        raise ValueError('tau_system needs at least one polynomial')
    layout = polys[0].layout
    if any(p.layout != layout for p in polys):
        raise ValueError('all polynomials of a tau system must share a layout')
    tau = layout.tau_layout()
    pairs = tuple(_pair(p, tau) for p in polys)
    return TauSystem(tuple(polys), pairs, tau)


def newton_polytope(p: DiffPolynomial) -> LatticePolytope:
    if p.is_zero:
        raise EmptyPolytopeError('the zero polynomial has an empty Newton polytope')
    return LatticePolytope(p.terms.keys())


def eliminate_linear(polys: Sequence[DiffPolynomial]) -> DiffPolynomial:
    """
    Eliminate the `ζ^(1)` block from `n + 1` equations linear in it.

    Inputs live over an order-1 layout with `n` variables: the order-0 coordinates are `ζ` and the order-1
    coordinates are `ζ^(1)`. The result is the determinant of the `(n+1)×(n+1)` matrix of `ζ^(1)` coefficients with
    the `ζ^(1)`-free parts as homogenising column, normalised by `(-1)^n` so that `{a + b ζ', c + d ζ'}` gives
    `ad - bc`. It lives over the order-0 layout of `ζ`.
    """
    if not polys:
        raise ValueError('eliminate_linear needs at least one polynomial')
    layout = polys[0].layout
    if any(p.layout != layout for p in polys):
        raise ValueError('all polynomials must share a layout')
    if layout.l != 1:
        raise ValueError(f'expected a layout of order 1 (ζ, ζ^(1)), got order {layout.l}')
    n = layout.n
    if len(polys) != n + 1:
        raise ValueError(f'expected {n + 1} polynomials for {n} eliminated coordinates, got {len(polys)}')
    jets = [layout.index(i, 1) for i in range(n)]
    target = layout.with_order(0)
    syms = target.symbols()

    rows = []
    for p in polys:
        if p.degree_in(jets) > 1:
            raise ValueError(f'{p} is not linear in the ζ^(1) block')
        row = [sp.Integer(0)] * (n + 1)
        for exp, c in p.terms.items():
            zeta = tuple(exp[layout.index(i, 0)] for i in range(n))
            mono = c.expr * sp.Mul(*(s**e for s, e in zip(syms, zeta) if e))
            col = next((i for i in range(n) if exp[jets[i]]), n)
            row[col] += mono
        rows.append(row)

    det = sp.Matrix(rows).det(method='bareiss')
    if n % 2:
        det = -det
    result = DiffPolynomial.from_expr(det, target)
    logger.debug('eliminated %d jet coordinates, resultant has %d terms', n, len(result.terms))
    return result


def jet(x: Sequence[RationalLike], l: int) -> List[RationalFunction]:  # noqa: E741
    """
    `(x_i, D x_i, …, D^l x_i)` for every `x_i`, flattened variable-major.

    ```py
    from diffbkk import jet
    from diffbkk.rational import T

    assert jet([T**2], 2) == [T**2, 2 * T, 2]
    ```
    """
    if l < 0:
        raise ValueError(f'jet order must be non-negative, got {l}')
    out: List[RationalFunction] = []
    for value in x:
        current = value if isinstance(value, RationalFunction) else RationalFunction(value)
        out.append(current)
        for _ in range(l):
            current = current.derivative()
            out.append(current)
    return out


def is_jet(y: Sequence[RationalLike], layout: JetLayout) -> bool:
    if len(y) != layout.s:
        raise ValueError(f'expected {layout.s} values, got {len(y)}')
    values = [v if isinstance(v, RationalFunction) else RationalFunction(v) for v in y]
    for i in range(layout.n):
        for j in range(1, layout.l + 1):
            if values[layout.index(i, j)] != values[layout.index(i, j - 1)].derivative():
                return False
    return True


def evaluate_at_jet(p: DiffPolynomial, x: Sequence[RationalLike]) -> RationalFunction:
    if len(x) != p.layout.n:
        raise ValueError(f'expected {p.layout.n} functions, got {len(x)}')
    return p.evaluate(jet(x, p.layout.l))


def prolong(p: DiffPolynomial, r: int) -> List[DiffPolynomial]:
    """`[P, DP, …, D^r P]`, all over the layout of order `l + r`."""
    if r < 0:
        raise ValueError(f'prolongation order must be non-negative, got {r}')
    out = [p]
    for _ in range(r):
        out.append(total_derivative(out[-1]))
    target = p.layout.with_order(p.layout.l + r)
    return [q.embed(target) for q in out]


def xi_system(layout: JetLayout) -> List[DiffPolynomial]:
    """
    The linear equations `ζ_{i,j}^(1) - ζ_{i,j+1} = 0` over `layout.tau_layout()`, whose common zeros are the
    jets of jets.
    """
    tau = layout.tau_layout()
    out = []
    for i in range(layout.n):
        for j in range(layout.l):
            here = layout.index(i, j)
            up = layout.index(i, j + 1)
            out.append(DiffPolynomial.variable(tau, here, 1) - DiffPolynomial.variable(tau, up, 0))
    return out


def tau_containment(p: DiffPolynomial) -> Optional[bool]:
    """
    Whether the τ pair of `p` has `ζ`-Newton polytope inside `Δ(P) + Δ_ζ` and is linear in `ζ^(1)`.

    Only decided when `Δ(P)` is a co-ideal polytope, otherwise `None`.
    """
    delta = newton_polytope(p)
    if not is_coideal(delta):
        logger.warning('τ containment not asserted, Newton polytope is not a co-ideal: %s', delta)
        return None
    tau = p.layout.tau_layout()
    q = _pair(p, tau)
    if q.is_zero:
        return True
    jets = [tau.index(i, 1) for i in range(tau.n)]
    if q.degree_in(jets) > 1:
        return False
    envelope = minkowski_sum(delta, standard_simplex(p.layout))
    zeta = LatticePolytope(tuple(exp[tau.index(i, 0)] for i in range(tau.n)) for exp in q.terms)
    return contains(envelope, zeta)
