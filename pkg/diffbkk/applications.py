import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Any, Dict, List, NamedTuple, Optional, Tuple, Union

import sympy as sp

from .bounds import (
    BoundConfig,
    BoundReport,
    GammaVariant,
    as_json_value,
    c_const,
    e_const,
    gamma_multiplier,
    reduction_degree_term,
)
from .diffpoly import DiffPolynomial, JetLayout, newton_polytope, prolong
from .mixedvol import Algorithm, FormalCombination, mixed_volume_blocks
from .parse import format_poly
from .polytope import (
    LatticePolytope,
    SimplexBlock,
    contains,
    contains_sum,
    coordinate_simplex,
    dilate,
    minkowski_sum,
    standard_simplex,
    volume,
)

__all__ = (
    'SemiAbelianParams',
    'MobiusMap',
    'IsogenyReport',
    'TorusDim2Bounds',
    'FSBaselines',
    'f_const',
    'f_const_proof',
    'semiabelian_bound',
    'semiabelian_bound_engine',
    'torus_bound',
    'torus_dim2_bounds',
    'torus_lattice_bound',
    'chi_system',
    'isogeny_bound',
    'isogeny_degree_bound',
    'fs_baselines',
)
logger = logging.getLogger('diffbkk.applications')

ISOGENY_LAYOUT = JetLayout(2, 3, ('x', 'y'))
ISOGENY_CONSTANTS = ('c5', 'c6')
STATED_ISOGENY_VALUE = 2**10 * 3**3 * 13**2
POINT_COUNT_BASELINE = 2**24 * 36**7


@dataclass(frozen=True)
class SemiAbelianParams:
    """
    `N` ambient coordinates, `A` of dimension `n`, `Γ` of rational rank `r`, `t` charts and the degrees `d_A`, `d_ω`,
    `d_X`.
    """

    N: int
    n: int
    r: int
    t: int = 1
    d_A: int = 1
    d_omega: int = 1
    d_X: int = 1

    def __post_init__(self) -> None:
        if not 1 <= self.n <= self.N:
            raise ValueError(f'need 1 <= n <= N, got n={self.n}, N={self.N}')
        if self.r < 0:
            raise ValueError(f'rank r must be non-negative, got {self.r}')
        if self.t < 1:
            raise ValueError(f'chart count t must be at least 1, got {self.t}')
        if not 1 <= self.d_A <= self.d_X:
            raise ValueError(f'need 1 <= d_A <= d_X, got d_A={self.d_A}, d_X={self.d_X}')
        if self.d_omega < 1:
            raise ValueError(f'd_omega must be at least 1, got {self.d_omega}')

    @property
    def s(self) -> int:
        return self.N * (self.r + 1)

    def to_dict(self) -> Dict[str, str]:
        return {k: str(v) for k, v in self.__dict__.items()}


@dataclass(frozen=True)
class MobiusMap:
    """`z ↦ (az + b)/(cz + d)` with `ad - bc ≠ 0`."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    def __post_init__(self) -> None:
        for name in 'abcd':
            value = getattr(self, name)
            if isinstance(value, (bool, float)):
                raise TypeError(f'{name} must be an exact rational, got {value!r}')
            object.__setattr__(self, name, Fraction(value))
        if self.a * self.d - self.b * self.c == 0:
            raise ValueError(f'degenerate Möbius map: ad - bc = 0 for {self}')

    @classmethod
    def parse(cls, text: str) -> 'MobiusMap':
        """From `a,b,c,d`, each an integer or `p/q`."""
        parts = [p.strip() for p in text.split(',')]
        if len(parts) != 4:
            raise ValueError(f'expected four comma separated values a,b,c,d, got {text!r}')
        return cls(*(Fraction(p) for p in parts))

    def __str__(self) -> str:
        return f'({self.a}z + {self.b})/({self.c}z + {self.d})'

    def to_dict(self) -> Dict[str, str]:
        return {name: str(getattr(self, name)) for name in 'abcd'}


IDENTITY = MobiusMap(Fraction(1), Fraction(0), Fraction(0), Fraction(1))


def f_const(params: SemiAbelianParams, config: Optional[BoundConfig] = None) -> Fraction:
    """
    `F_{N,n,r} = E_{s,N-n}/s! · binom(Nr+n, n) · d_A^{N-n} · 2^n` with `s = N(r+1)`.

    ```py
    from diffbkk import SemiAbelianParams, f_const

    assert f_const(SemiAbelianParams(N=1, n=1, r=0)) == 18
    assert f_const(SemiAbelianParams(N=2, n=1, r=0, d_A=2, d_X=2)) == 60
    ```
    """
    p = params
    e = e_const(p.s, p.N - p.n, config)
    return Fraction(e, factorial(p.s)) * comb(p.N * p.r + p.n, p.n) * p.d_A ** (p.N - p.n) * 2**p.n


def f_const_proof(params: SemiAbelianParams, config: Optional[BoundConfig] = None) -> Fraction:
    """The same constant in the order it arises while bounding: `E_{s,N-n} binom(s-N+n, n) 2^n (s!)^{-1} d_A^{N-n}`."""
    p = params
    s = p.s
    value = Fraction(e_const(s, p.N - p.n, config))
    value *= comb(s - p.N + p.n, p.n)
    value *= 2**p.n
    value *= Fraction(1, factorial(s))
    return value * p.d_A ** (p.N - p.n)


def _integral(value: Fraction, what: str) -> int:
    if value.denominator != 1:
        raise ArithmeticError(f'{what} {value} is not an integer')
    return value.numerator


def semiabelian_bound(params: SemiAbelianParams, config: Optional[BoundConfig] = None) -> int:
    """`F_{N,n,r} · t · d_ω^{Nr} · d_X^n`."""
    p = params
    value = f_const(p, config) * p.t * p.d_omega ** (p.N * p.r) * p.d_X**p.n
    return _integral(value, 'semi-abelian bound')


def semiabelian_bound_engine(params: SemiAbelianParams, config: Optional[BoundConfig] = None) -> int:
    """
    `t · E_{s,N-n} · V(d_AΔ_ξ ×(N-n), (2d_XΔ_ξ + d_ωΔ_{ξ^(1..r)}) ×(s-N+n))` evaluated by the block engine,
    where `Δ_ξ` is the base-variable simplex and `Δ_{ξ^(1..r)}` the simplex of all derivative coordinates.
    """
    p = params
    layout = JetLayout(p.N, p.r)
    base = standard_simplex(layout, SimplexBlock.base_variables)
    high = coordinate_simplex(layout.s, [layout.index(i, j) for i in range(p.N) for j in range(1, p.r + 1)])
    chart = FormalCombination((('base', base),), (p.d_A,))
    if p.r:
        mixed = FormalCombination((('base', base), ('jets', high)), (2 * p.d_X, p.d_omega))
    else:
        mixed = FormalCombination((('base', base),), (2 * p.d_X,))
    mv = mixed_volume_blocks([chart] * (p.N - p.n) + [mixed] * (layout.s - p.N + p.n))
    value = p.t * e_const(layout.s, p.N - p.n, config) * mv
    logger.debug('semi-abelian engine %s: V=%s', p, mv)
    return _integral(value, 'semi-abelian engine bound')


def _check_torus(n: int, r: int, vol: Union[Fraction, int]) -> Fraction:
    if n < 1 or r < 0:
        raise ValueError(f'need n >= 1 and r >= 0, got n={n}, r={r}')
    if isinstance(vol, (bool, float)):
        raise TypeError(f'volume must be exact, got {vol!r}')
    v = Fraction(vol)
    if v < 0:
        raise ValueError(f'volume must be non-negative, got {v}')
    return v


def torus_bound(n: int, r: int, vol: Union[Fraction, int], config: Optional[BoundConfig] = None) -> Fraction:
    """
    `F_{2n,n,r} · 2^{n(2r+1)} · Vol(Δ)` with `d_A = d_ω = 2`.

    ```py
    from fractions import Fraction
    from diffbkk import torus_bound

    assert torus_bound(1, 0, Fraction(1, 2)) == 60
    ```
    """
    v = _check_torus(n, r, vol)
    params = SemiAbelianParams(N=2 * n, n=n, r=r, d_A=2, d_omega=2, d_X=2)
    return f_const(params, config) * 2 ** (n * (2 * r + 1)) * v


def torus_lattice_bound(n: int, r: int, vol: Union[Fraction, int], config: Optional[BoundConfig] = None) -> Fraction:
    """`n(2r+1)` times `torus_bound`."""
    return n * (2 * r + 1) * torus_bound(n, r, vol, config)


class TorusDim2Bounds(NamedTuple):
    baseline: int
    improved: Fraction
    volume: Fraction
    degree: int

    def to_dict(self) -> Dict[str, Any]:
        return as_json_value(self._asdict())


def torus_dim2_bounds(
    r: int,
    d: Optional[int] = None,
    polytope: Optional[LatticePolytope] = None,
    config: Optional[BoundConfig] = None,
) -> TorusDim2Bounds:
    """
    The doubly exponential `d^{r 2^r} (r+1)^{2(2^r+1)}` next to `torus_bound(2, r, Vol(Δ))`.

    With only `d` the volume is `d²/2`; with a polytope in `Z^2` its volume is used and `d` defaults to its largest
    vertex coordinate sum.
    """
    if r < 0:
        raise ValueError(f'r must be non-negative, got {r}')
    if polytope is not None:
        if polytope.ambient_dim != 2:
            raise ValueError(f'torus_dim2_bounds needs a polytope in Z^2, got Z^{polytope.ambient_dim}')
        vol = volume(polytope)
        if d is None:
            d = max(sum(v) for v in polytope.vertices)
    elif d is not None:
        vol = Fraction(d * d, 2)
    else:
        raise ValueError('torus_dim2_bounds needs a degree or a polytope')
    if d < 1:
        raise ValueError(f'degree must be at least 1, got {d}')
    baseline = d ** (r * 2**r) * (r + 1) ** (2 * (2**r + 1))
    return TorusDim2Bounds(baseline, torus_bound(2, r, vol, config), vol, d)


def chi_system(alpha: MobiusMap = IDENTITY) -> List[DiffPolynomial]:
    """
    `P_1..P_6` over `x, y` up to third derivatives: `P_1 = (cx + d)y - (ax + b)`, `P_2..P_4` its derivatives, `P_5`
    and `P_6` the denominator-free `χ(x) = c5` and `χ(y) = c6`.

    ```py
    from diffbkk import chi_system, parse_poly
    from diffbkk.applications import ISOGENY_LAYOUT

    polys = chi_system()
    assert polys[0] == parse_poly('y - x', ISOGENY_LAYOUT)
    assert polys[4].degree() == 6
    ```
    """
    base = ISOGENY_LAYOUT.with_order(0)
    x = DiffPolynomial.variable(base, 'x')
    y = DiffPolynomial.variable(base, 'y')
    p1 = (alpha.c * x + alpha.d) * y - (alpha.a * x + alpha.b)
    polys = prolong(p1, 3)
    syms = ISOGENY_LAYOUT.symbols()
    for var, const in zip('xy', ISOGENY_CONSTANTS):
        i = ISOGENY_LAYOUT.variable_index(var)
        z, z1, z2, z3 = (syms[ISOGENY_LAYOUT.index(i, j)] for j in range(4))
        c = sp.Symbol(const)
        poles = z**2 * (z - 1728) ** 2
        expr = 2 * z3 * z1 * poles - 3 * z2**2 * poles + z1**4 * (z**2 - 1968 * z + 2654208) - 2 * c * z1**2 * poles
        polys.append(DiffPolynomial.from_expr(sp.expand(expr), ISOGENY_LAYOUT))
    return polys


@dataclass
class IsogenyReport:
    alpha: MobiusMap
    config: BoundConfig
    polys: List[DiffPolynomial]
    newton: List[LatticePolytope]
    envelope: int
    gamma: LatticePolytope
    checks: Dict[str, bool]
    bound: int
    chain_value: int
    exact_gamma_bound: Optional[int] = None
    stated_value: int = STATED_ISOGENY_VALUE
    baseline: int = POINT_COUNT_BASELINE
    constants: Dict[str, int] = field(default_factory=dict)

    @property
    def discrepancy(self) -> bool:
        return self.bound != self.stated_value

    @property
    def ratio(self) -> Fraction:
        """`stated_value / bound`."""
        return Fraction(self.stated_value, self.bound)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'alpha': self.alpha.to_dict(),
            'config': self.config.to_dict(),
            'layout': ISOGENY_LAYOUT.to_dict(),
            'consts': list(ISOGENY_CONSTANTS),
            'polys': [format_poly(p) for p in self.polys],
            'newton_polytopes': as_json_value(self.newton),
            'envelope': str(self.envelope),
            'gamma': as_json_value(self.gamma),
            'checks': self.checks,
            'constants': as_json_value(self.constants),
            'bound': str(self.bound),
            'exact_gamma_bound': as_json_value(self.exact_gamma_bound),
            'chain_value': str(self.chain_value),
            'stated_value': str(self.stated_value),
            'discrepancy': self.discrepancy,
            'ratio': as_json_value(self.ratio),
            'baseline': str(self.baseline),
        }


def _block_simplices(layout: JetLayout) -> Tuple[LatticePolytope, ...]:
    return tuple(standard_simplex(layout, SimplexBlock.single_variable_jets, variable=i) for i in range(layout.n))


def isogeny_bound(
    alpha: MobiusMap = IDENTITY, config: Optional[BoundConfig] = None, exact_gamma: bool = False
) -> IsogenyReport:
    """
    `C_{8,6} V(Δ_1, …, Δ_6, Γ, Γ)` for the χ-system with `Δ_{1..4} = Δ_x + Δ_y`, `Δ_5 = 6Δ_x`, `Δ_6 = 6Δ_y`
    and `Γ` replaced by its envelope `(m + 10)(Δ_x + Δ_y)`, `m` the configured multiple of the all-coordinates
    simplex.
    The refined variant is the default.

    ```py
    from fractions import Fraction
    from diffbkk import isogeny_bound

    report = isogeny_bound()
    assert report.bound == 7_787_520
    assert report.ratio == Fraction(3, 5)
    ```
    """
    config = config or BoundConfig(GammaVariant.refined)
    layout = ISOGENY_LAYOUT
    s = layout.s
    k = 6
    polys = chi_system(alpha)
    newton = [newton_polytope(p) for p in polys]
    xi, eta = _block_simplices(layout)
    both = minkowski_sum(xi, eta)
    x3 = [layout.index(0, 3)]
    y3 = [layout.index(1, 3)]
    mult = gamma_multiplier(s, k, config)
    envelope = mult + 10
    gamma = dilate(both, envelope)
    deltas = [both] * 4 + [dilate(xi, 6), dilate(eta, 6)]
    checks = {
        'p1_p4_in_xi_plus_eta': all(contains(both, d) for d in newton[:4]),
        'p5_in_6xi': contains(deltas[4], newton[4]),
        'p6_in_6eta': contains(deltas[5], newton[5]),
        'p5_linear_in_x3': polys[4].degree_in(x3) == 1,
        'p6_linear_in_y3': polys[5].degree_in(y3) == 1,
        'p5_p6_degree_6': polys[4].degree() == 6 and polys[5].degree() == 6,
        'gamma_in_envelope': contains_sum(gamma, [coordinate_simplex(s, range(s), mult)] + deltas),
    }
    for name, ok in checks.items():
        if not ok:
            logger.warning('isogeny structural check failed: %s', name)

    pair = FormalCombination((('x', xi), ('y', eta)), (1, 1))
    blocks = [pair] * 4 + [FormalCombination((('x', xi),), (6,)), FormalCombination((('y', eta),), (6,))]
    c = c_const(s, k)
    enveloped = mixed_volume_blocks(blocks + [FormalCombination((('x', xi), ('y', eta)), (envelope, envelope))] * 2)
    bound = _integral(c * enveloped, 'isogeny bound')

    exact = None
    if exact_gamma:
        all_ = standard_simplex(layout)
        exact_combo = FormalCombination((('all', all_), ('x', xi), ('y', eta)), (mult, 10, 10), generic=True)
        exact = _integral(c * mixed_volume_blocks(blocks + [exact_combo] * 2), 'exact Γ isogeny bound')

    chain = 2**6 * 6**2 * envelope**2 * comb(6, 3)
    logger.info('isogeny bound %d (envelope %d), stated %d', bound, envelope, STATED_ISOGENY_VALUE)
    return IsogenyReport(
        alpha=alpha,
        config=config,
        polys=polys,
        newton=newton,
        envelope=envelope,
        gamma=gamma,
        checks=checks,
        bound=bound,
        chain_value=chain,
        exact_gamma_bound=exact,
        constants={'C': c, 'gamma_multiplier': mult},
    )


class FSBaselines(NamedTuple):
    point_count: int
    degree: int

    def to_dict(self) -> Dict[str, Any]:
        return as_json_value(self._asdict())


def fs_baselines(n: int, m: int, deg_v: int) -> FSBaselines:
    """
    The earlier estimates: `2^24 · 36^7` isogenous points and `(2^n deg V)^{3·2^{3m}} · 6^{2^{3m}-1}` for the degree.

    ```py
    from diffbkk import fs_baselines

    assert fs_baselines(2, 1, 1).degree == 4**24 * 6**7
    ```
    """
    if min(n, m, deg_v) < 1:
        raise ValueError('fs_baselines needs n, m and deg_v all at least 1')
    e = 2 ** (3 * m)
    return FSBaselines(POINT_COUNT_BASELINE, (2**n * deg_v) ** (3 * e) * 6 ** (e - 1))


def _reduction_value(layout: JetLayout, d: int, config: BoundConfig) -> int:
    s = layout.s
    k = layout.n
    simplices = zip(layout.names, _block_simplices(layout))
    jets = [FormalCombination(((name, simplex),), (6,)) for name, simplex in simplices]
    base = standard_simplex(layout, SimplexBlock.base_variables)
    delta = FormalCombination((('base', base), ('all', standard_simplex(layout))), (d, 6), generic=True)
    term = reduction_degree_term(jets + [delta] * (s - k), k, config, Algorithm.blocks)
    return _integral(term.value, 'reduction degree bound')


def isogeny_degree_bound(
    n: int, d: int, config: Optional[BoundConfig] = None, m: Optional[int] = None
) -> BoundReport:
    """
    Reduction degree bound for `n` χ-equations of order three with `Δ_j = 6Δ_{x_j}^(3)` and
    `Δ = d·Δ_base + 6·Δ_all`, together with its full polynomial dependence on `d`.

    `details['coefficients']` lists the coefficients of `d^0..d^n`, `G_n` is their sum so that
    `bound(d) <= G_n d^n` for every `d >= 1`.
    """
    if n < 1 or d < 1:
        raise ValueError(f'need n >= 1 and d >= 1, got n={n}, d={d}')
    config = config or BoundConfig()
    layout = JetLayout(n, 3)
    s = layout.s
    dvar = sp.Symbol('d')
    samples = [(x, _reduction_value(layout, x, config)) for x in range(n + 1)]
    poly = sp.Poly(sp.interpolate(samples, dvar), dvar)
    if poly.degree() > n:
        raise ArithmeticError(f'reduction degree bound has degree {poly.degree()} in d, expected at most {n}')
    coefficients = [Fraction(int(sp.fraction(c)[0]), int(sp.fraction(c)[1])) for c in reversed(poly.all_coeffs())]
    coefficients += [Fraction(0)] * (n + 1 - len(coefficients))
    bound = _integral(sum((c * d**i for i, c in enumerate(coefficients)), Fraction(0)), 'reduction degree bound')
    m = max(n - 1, 1) if m is None else m
    g_n = sum(coefficients, Fraction(0))
    logger.info('isogeny degree bound n=%d d=%d: %d (G_n=%s)', n, d, bound, g_n)
    return BoundReport(
        statement='deg W <= (s-k+1) E_{s,k} V(6Δ_{x_1}, …, 6Δ_{x_n}, Δ, …, Δ), Δ = d·Δ_base + 6·Δ_all',
        config=config,
        s=s,
        k=n,
        constants={'C': c_const(s, n), 'E': e_const(s, n, config)},
        bound=bound,
        details={
            'd': d,
            'coefficients': coefficients,
            'G_n': g_n,
            'leading': coefficients[n],
            'm': m,
            'fs_baseline': fs_baselines(n, m, d).degree,
        },
    )
