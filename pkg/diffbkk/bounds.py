import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import factorial
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Sequence, Tuple, Union

import anyio

from .mixedvol import Algorithm, Entry, compute_mixed_volume
from .polytope import (
    DimensionMismatchError,
    LatticePolytope,
    contains,
    coordinate_simplex,
    dilate,
    is_coideal,
    minkowski_sum,
    to_json,
    volume,
)

if TYPE_CHECKING:
    from .diffpoly import JetLayout

__all__ = (
    'GammaVariant',
    'EVariant',
    'BoundConfig',
    'BoundTerm',
    'BoundReport',
    'CompareRow',
    'CompareTable',
    'HypothesisError',
    'c_const',
    'e_const',
    'gamma_multiplier',
    'gamma_polytope',
    'bound_ci',
    'bound_general',
    'abound_general',
    'bound_kushnirenko',
    'bound_reduction_degree',
    'reduction_degree_term',
    'bound_degree_simple',
    'bound_hp',
    'compare_bounds',
    'as_json_value',
)
logger = logging.getLogger('diffbkk.bounds')


class HypothesisError(ValueError):
    """A hypothesis of the bound being evaluated does not hold for the given input."""


class GammaVariant(str, Enum):
    """Multiple of the all-coordinates simplex in `Γ = m·Δ_ξ + Δ_1 + … + Δ_k`."""

    theorem12 = 'theorem12'
    """`m = s + 1`"""
    prop42 = 'prop42'
    """`m = s`"""
    refined = 'refined'
    """`m = s - k + 1`, only for co-ideal `Δ_j`."""


class EVariant(str, Enum):
    printed = 'printed'
    """`E_{s,k} = C_{s,k} Σ_{j=k}^{s} (2s)^{s-j}`"""
    per_j = 'per-j'
    """`E_{s,k} = Σ_{j=k}^{s} (2s)^{s-j} C_{s,j}`"""


@dataclass(frozen=True)
class BoundConfig:
    gamma_variant: GammaVariant = GammaVariant.theorem12
    e_variant: EVariant = EVariant.printed

    def __post_init__(self) -> None:
        object.__setattr__(self, 'gamma_variant', GammaVariant(self.gamma_variant))
        object.__setattr__(self, 'e_variant', EVariant(self.e_variant))

    def to_dict(self) -> Dict[str, str]:
        return {'gamma_variant': self.gamma_variant.value, 'e_variant': self.e_variant.value}


def _default_config(config: Optional[BoundConfig]) -> BoundConfig:
    return BoundConfig() if config is None else config


def as_json_value(value: Any) -> Any:
    """Exact numbers become strings, polytopes their JSON form, containers are converted recursively."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f'{value.numerator}/{value.denominator}'
    if isinstance(value, LatticePolytope):
        return to_json(value)
    if isinstance(value, dict):
        return {str(k): as_json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [as_json_value(v) for v in value]
    if hasattr(value, 'to_dict'):
        return value.to_dict()
    raise TypeError(f'cannot convert {type(value).__name__} to JSON')


@dataclass(frozen=True)
class BoundTerm:
    label: str
    weight: int
    mixed_volume: Fraction

    @property
    def value(self) -> Fraction:
        return self.weight * self.mixed_volume

    def to_dict(self) -> Dict[str, Any]:
        return as_json_value(
            {'label': self.label, 'weight': self.weight, 'mixed_volume': self.mixed_volume, 'value': self.value}
        )


@dataclass
class BoundReport:
    """
    Inputs, constants, intermediate polytopes and the final exact bound of one bound statement.
    """

    statement: str
    config: BoundConfig
    s: int
    k: int
    constants: Dict[str, Optional[int]]
    bound: int
    gamma: Optional[LatticePolytope] = None
    terms: List[BoundTerm] = field(default_factory=list)
    trace: List[Dict[str, Any]] = field(default_factory=list)
    hp_comparison: Optional[int] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'statement': self.statement,
            'config': self.config.to_dict(),
            's': str(self.s),
            'k': str(self.k),
            'constants': as_json_value(self.constants),
            'gamma': as_json_value(self.gamma),
            'terms': [t.to_dict() for t in self.terms],
            'trace': as_json_value(self.trace),
            'bound': str(self.bound),
            'hp_comparison': as_json_value(self.hp_comparison),
            'details': as_json_value(self.details),
        }


def _integral(value: Fraction) -> int:
    if value.denominator != 1:
        raise ArithmeticError(f'bound {value} is not an integer')
    return value.numerator


def _check_sk(s: int, k: int) -> None:
    if s < 0 or k < 0:
        raise ValueError(f's and k must be non-negative, got s={s}, k={k}')
    if k > s:
        raise ValueError(f'k={k} exceeds s={s}')


def c_const(s: int, k: int) -> int:
    """
    `C_{s,k} = s! (δ+2)^{δ(δ+1)/2}` with `δ = s - k`.

    ```py
    from diffbkk import c_const

    assert c_const(8, 6) == 2_580_480
    assert c_const(3, 3) == 6
    ```
    """
    _check_sk(s, k)
    delta = s - k
    return factorial(s) * (delta + 2) ** (delta * (delta + 1) // 2)


def e_const(s: int, k: int, config: Optional[BoundConfig] = None) -> int:
    """
    `E_{s,k}`, by default `C_{s,k} Σ_{j=k}^{s} (2s)^{s-j}`, with `EVariant.per_j` `Σ_{j=k}^{s} (2s)^{s-j} C_{s,j}`.
    """
    _check_sk(s, k)
    config = _default_config(config)
    if config.e_variant is EVariant.per_j:
        return sum((2 * s) ** (s - j) * c_const(s, j) for j in range(k, s + 1))
    return c_const(s, k) * sum((2 * s) ** (s - j) for j in range(k, s + 1))


def gamma_multiplier(s: int, k: int, config: Optional[BoundConfig] = None) -> int:
    _check_sk(s, k)
    variant = _default_config(config).gamma_variant
    if variant is GammaVariant.theorem12:
        return s + 1
    if variant is GammaVariant.prop42:
        return s
    return s - k + 1


def _ambient(polys: Sequence[LatticePolytope], s: Optional[int] = None) -> int:
    dims = {p.ambient_dim for p in polys}
    if s is not None:
        dims.add(s)
    if not dims:
        raise ValueError('cannot infer the ambient dimension from no polytopes')
    if len(dims) != 1:
        raise DimensionMismatchError(f'polytopes live in different dimensions: {sorted(dims)}')
    return dims.pop()


def gamma_polytope(
    deltas: Sequence[LatticePolytope],
    layout: Optional['JetLayout'] = None,
    config: Optional[BoundConfig] = None,
    *,
    s: Optional[int] = None,
) -> LatticePolytope:
    """
    `Γ = m·Δ_ξ + Δ_1 + … + Δ_k` with `Δ_ξ` the simplex of all `s` coordinates
    and `m` from the configured variant.

    ```py
    from diffbkk import BoundConfig, GammaVariant, JetLayout, dilate, gamma_polytope, standard_simplex

    simplex = standard_simplex(JetLayout(1, 1))
    assert gamma_polytope([dilate(simplex, 2)]) == dilate(simplex, 5)
    assert gamma_polytope([dilate(simplex, 2)], config=BoundConfig(GammaVariant.prop42)) == dilate(simplex, 4)
    ```
    """
    config = _default_config(config)
    dim = _ambient(deltas, layout.s if layout is not None else s)
    if config.gamma_variant is GammaVariant.refined:
        for i, d in enumerate(deltas, start=1):
            if not is_coideal(d):
                raise HypothesisError(f'the refined Γ needs co-ideal polytopes, Δ_{i} is not one')
    gamma = coordinate_simplex(dim, range(dim), gamma_multiplier(dim, len(deltas), config))
    for d in deltas:
        gamma = minkowski_sum(gamma, d)
    return gamma


def _mixed_volume(entries: Sequence[Entry], algorithm: Union[Algorithm, str, None]) -> Fraction:
    value, _ = compute_mixed_volume(entries, algorithm)
    return value


def _dilation_trace(gamma: LatticePolytope, delta: int) -> List[Dict[str, Any]]:
    steps = []
    chain = 1
    for j in range(1, delta + 1):
        factor = (delta + 2) ** j
        envelope = (delta + 1) * sum((delta + 2) ** i for i in range(j))
        chain *= factor
        steps.append({'step': j, 'factor': factor, 'envelope': envelope, 'polytope': dilate(gamma, factor)})
    assert chain == (delta + 2) ** (delta * (delta + 1) // 2), 'dilation chain does not multiply to the C constant'
    return steps


def bound_ci(
    deltas: Sequence[LatticePolytope],
    config: Optional[BoundConfig] = None,
    *,
    layout: Optional['JetLayout'] = None,
    algorithm: Union[Algorithm, str, None] = None,
) -> BoundReport:
    """
    Bound for systems inside a complete intersection with Newton polytopes `Δ_1..Δ_k`:
    `C_{s,k} V(Δ_1, …, Δ_k, Γ, …, Γ)`.
    """
    config = _default_config(config)
    if not deltas:
        raise ValueError('bound_ci needs 1 <= k <= s polytopes')
    s = _ambient(deltas, layout.s if layout is not None else None)
    k = len(deltas)
    _check_sk(s, k)
    delta = s - k
    c = c_const(s, k)
    gamma: Optional[LatticePolytope] = None
    trace: List[Dict[str, Any]] = []
    if delta:
        gamma = gamma_polytope(deltas, config=config, s=s)
        trace = _dilation_trace(gamma, delta)
    mv = _mixed_volume(list(deltas) + [gamma] * delta if gamma is not None else list(deltas), algorithm)
    bound = _integral(c * mv)
    logger.info('complete intersection bound s=%d k=%d: %d', s, k, bound)
    return BoundReport(
        statement='N(Y) <= C_{s,k} V(Δ_1, …, Δ_k, Γ, …, Γ)',
        config=config,
        s=s,
        k=k,
        constants={'C': c, 'E': None},
        bound=bound,
        gamma=gamma,
        terms=[BoundTerm(f'C_{{{s},{k}}} V(Δ_1..Δ_{k}, Γ×{delta})', c, mv)],
        trace=trace,
    )


def _general_setup(
    ci_deltas: Sequence[LatticePolytope], delta: LatticePolytope, layout: Optional['JetLayout']
) -> Tuple[int, int]:
    s = _ambient([delta, *ci_deltas], layout.s if layout is not None else None)
    k = len(ci_deltas)
    _check_sk(s, k)
    if not contains(delta, coordinate_simplex(s, range(s))):
        raise HypothesisError('Δ must contain the standard simplex of all jet coordinates')
    return s, k


def _general_term(
    ci_deltas: Sequence[LatticePolytope],
    delta: LatticePolytope,
    j: int,
    config: BoundConfig,
    algorithm: Union[Algorithm, str, None],
) -> BoundTerm:
    s = delta.ambient_dim
    deltas_j = list(ci_deltas) + [delta] * (j - len(ci_deltas))
    entries = list(deltas_j)
    if j < s:
        entries += [gamma_polytope(deltas_j, config=config, s=s)] * (s - j)
    label = f'C_{{{s},{j}}} V(Δ_1..Δ_{j}, Γ_{j}×{s - j})'
    return BoundTerm(label, c_const(s, j), _mixed_volume(entries, algorithm))


def _simplified(
    ci_deltas: Sequence[LatticePolytope],
    delta: LatticePolytope,
    config: BoundConfig,
    algorithm: Union[Algorithm, str, None],
) -> Optional[int]:
    s = delta.ambient_dim
    k = len(ci_deltas)
    for i, d in enumerate(ci_deltas, start=1):
        if not contains(delta, d):
            logger.info('simplified form skipped: Δ_%d is not contained in Δ', i)
            return None
    mv = _mixed_volume(list(ci_deltas) + [delta] * (s - k), algorithm)
    return _integral(e_const(s, k, config) * mv)


def _general_report(
    ci_deltas: Sequence[LatticePolytope],
    delta: LatticePolytope,
    s: int,
    k: int,
    config: BoundConfig,
    terms: List[BoundTerm],
    simplified: Optional[int],
) -> BoundReport:
    summed = _integral(sum((t.value for t in terms), Fraction(0)))
    gamma = gamma_polytope(ci_deltas, config=config, s=s) if k < s else None
    logger.info('general bound s=%d k=%d: summed %d, simplified %s', s, k, summed, simplified)
    return BoundReport(
        statement='N(Y) <= Σ_{j=k}^{s} C_{s,j} V(Δ_1, …, Δ_j, Γ_j, …, Γ_j)',
        config=config,
        s=s,
        k=k,
        constants={'C': c_const(s, k), 'E': e_const(s, k, config)},
        bound=summed,
        gamma=gamma,
        terms=terms,
        details={'summed': summed, 'simplified': simplified, 'delta': delta},
    )


def bound_general(
    ci_deltas: Sequence[LatticePolytope],
    delta: LatticePolytope,
    layout: Optional['JetLayout'] = None,
    config: Optional[BoundConfig] = None,
    algorithm: Union[Algorithm, str, None] = None,
) -> BoundReport:
    """
    Bound for a system contained in a complete intersection `Δ_1..Δ_k` with every equation supported in `Δ`.

    The report's `bound` is the summed form `Σ_{j=k}^{s} C_{s,j} V(Δ_1, …, Δ_j, Γ_j, …, Γ_j)` where
    `Δ_j = Δ` for `j > k`, `details['simplified']` is `E_{s,k} V(Δ_1, …, Δ_k, Δ, …, Δ)` when every `Δ_j ⊆ Δ`.
    """
    config = _default_config(config)
    s, k = _general_setup(ci_deltas, delta, layout)
    terms = [_general_term(ci_deltas, delta, j, config, algorithm) for j in range(k, s + 1)]
    return _general_report(ci_deltas, delta, s, k, config, terms, _simplified(ci_deltas, delta, config, algorithm))


async def abound_general(
    ci_deltas: Sequence[LatticePolytope],
    delta: LatticePolytope,
    layout: Optional['JetLayout'] = None,
    config: Optional[BoundConfig] = None,
    algorithm: Union[Algorithm, str, None] = None,
) -> BoundReport:
    """
    Asynchronous equivalent of [`bound_general`][diffbkk.bound_general], each term is evaluated in a worker thread.
    """
    config_ = _default_config(config)
    s, k = _general_setup(ci_deltas, delta, layout)
    terms: Dict[int, BoundTerm] = {}
    simplified: List[Optional[int]] = []

    async def term(j: int) -> None:
        terms[j] = await anyio.to_thread.run_sync(_general_term, ci_deltas, delta, j, config_, algorithm)

    async def simplify() -> None:
        simplified.append(await anyio.to_thread.run_sync(_simplified, ci_deltas, delta, config_, algorithm))

    async with anyio.create_task_group() as tg:
        for j in range(k, s + 1):
            tg.start_soon(term, j)
        tg.start_soon(simplify)
    ordered = [terms[j] for j in range(k, s + 1)]
    return _general_report(ci_deltas, delta, s, k, config_, ordered, simplified[0])


def bound_kushnirenko(delta: LatticePolytope, k: int, config: Optional[BoundConfig] = None) -> BoundReport:
    """
    `E_{s,k} Vol(Δ)` for a system inside a complete intersection of `k` equations, all supported in `Δ`.
    """
    config = _default_config(config)
    s = delta.ambient_dim
    _check_sk(s, k)
    if not contains(delta, coordinate_simplex(s, range(s))):
        raise HypothesisError('Δ must contain the standard simplex of all jet coordinates')
    e = e_const(s, k, config)
    vol = volume(delta)
    bound = _integral(e * vol)
    logger.info('volume bound s=%d k=%d: %d', s, k, bound)
    return BoundReport(
        statement='N(Y) <= E_{s,k} Vol(Δ)',
        config=config,
        s=s,
        k=k,
        constants={'C': c_const(s, k), 'E': e},
        bound=bound,
        details={'volume': vol, 'delta': delta},
    )


def reduction_degree_term(
    entries: Sequence[Entry],
    k: int,
    config: Optional[BoundConfig] = None,
    algorithm: Union[Algorithm, str, None] = None,
) -> BoundTerm:
    """
    `(s - k + 1) E_{s,k} V(entries)` where the first `k` entries are the `Δ_j` and the remaining `s - k` are `Δ`.
    """
    config = _default_config(config)
    s = len(entries)
    _check_sk(s, k)
    weight = (s - k + 1) * e_const(s, k, config)
    return BoundTerm(f'{s - k + 1}·E_{{{s},{k}}} V(Δ_1..Δ_{k}, Δ×{s - k})', weight, _mixed_volume(entries, algorithm))


def bound_reduction_degree(
    ci_deltas: Sequence[LatticePolytope],
    delta: LatticePolytope,
    layout: Optional['JetLayout'] = None,
    config: Optional[BoundConfig] = None,
    algorithm: Union[Algorithm, str, None] = None,
) -> BoundReport:
    """
    Degree of the reduction: `(s - k + 1) E_{s,k} V(Δ_1, …, Δ_k, Δ, …, Δ)`.
    """
    config = _default_config(config)
    s, k = _general_setup(ci_deltas, delta, layout)
    for i, d in enumerate(ci_deltas, start=1):
        if not contains(delta, d):
            raise HypothesisError(f'Δ_{i} is not contained in Δ')
    term = reduction_degree_term(list(ci_deltas) + [delta] * (s - k), k, config, algorithm)
    bound = _integral(term.value)
    logger.info('reduction degree bound s=%d k=%d: %d', s, k, bound)
    return BoundReport(
        statement='deg(red Y) <= (s-k+1) E_{s,k} V(Δ_1, …, Δ_k, Δ, …, Δ)',
        config=config,
        s=s,
        k=k,
        constants={'C': c_const(s, k), 'E': e_const(s, k, config)},
        bound=bound,
        terms=[term],
        details={'delta': delta},
    )


def bound_hp(deg_x: int, deg_s: int, m: int, l: int) -> int:  # noqa: E741
    """
    The doubly exponential baseline `deg(X)^{l 2^{ml}} deg(S)^{2^{ml} - 1}`.

    ```py
    from diffbkk import bound_hp

    assert bound_hp(2, 3, 1, 1) == 12
    assert bound_hp(2, 3, 1, 2) == 6912
    ```
    """
    if min(deg_x, deg_s, m, l) < 1:
        raise ValueError('bound_hp needs deg_x, deg_s, m and l all at least 1')
    e = 2 ** (m * l)
    return deg_x ** (l * e) * deg_s ** (e - 1)


def bound_degree_simple(
    n: int,
    l: int,  # noqa: E741
    k: int,
    d_x: int,
    d_s: int,
    config: Optional[BoundConfig] = None,
    m: Optional[int] = None,
) -> BoundReport:
    """
    `E_{s,k} d_X^n d_S^{nl}` with `s = n(l+1)`, optionally compared against `bound_hp` for `dim X = m`.
    """
    config = _default_config(config)
    if n < 1 or l < 0:
        raise ValueError(f'need n >= 1 and l >= 0, got n={n}, l={l}')
    s = n * (l + 1)
    _check_sk(s, k)
    if d_s < 1:
        raise ValueError(f'd_S must be at least 1, got {d_s}')
    if d_x < d_s:
        raise HypothesisError(f'the degree bound needs d_X >= d_S, got d_X={d_x}, d_S={d_s}')
    e = e_const(s, k, config)
    bound = e * d_x**n * d_s ** (n * l)
    return BoundReport(
        statement='N(Y) <= E_{s,k} d_X^n d_S^{nl}',
        config=config,
        s=s,
        k=k,
        constants={'C': c_const(s, k), 'E': e},
        bound=bound,
        hp_comparison=bound_hp(d_x, d_s, m, l) if m is not None else None,
        details={'n': n, 'l': l, 'd_X': d_x, 'd_S': d_s, 'm': m},
    )


@dataclass(frozen=True)
class CompareRow:
    d: int
    new: int
    hp: int

    def to_dict(self) -> Dict[str, Any]:
        return {'d': str(self.d), 'new': str(self.new), 'hp': str(self.hp), 'new_smaller': self.new < self.hp}


@dataclass(frozen=True)
class CompareTable:
    n: int
    l: int  # noqa: E741
    k: int
    m: int
    config: BoundConfig
    rows: Tuple[CompareRow, ...]
    crossover: Optional[int]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'parameters': {'n': str(self.n), 'l': str(self.l), 'k': str(self.k), 'm': str(self.m)},
            'config': self.config.to_dict(),
            'rows': [r.to_dict() for r in self.rows],
            'crossover': None if self.crossover is None else str(self.crossover),
        }


def compare_bounds(
    n: int,
    l: int,  # noqa: E741
    k: int,
    m: int,
    degrees: Sequence[int],
    config: Optional[BoundConfig] = None,
    search_limit: int = 10_000,
) -> CompareTable:
    """
    Sweep `d = d_X = d_S` over `degrees` comparing `E_{s,k} d^{n(l+1)}` with `bound_hp(d, d, m, l)`.

    `crossover` is the least `d >= 1` where the new bound is strictly smaller, searched up to
    `max(search_limit, max(degrees))`, `None` if there is none.

    ```py
    from diffbkk import compare_bounds

    table = compare_bounds(1, 1, 1, 1, range(1, 11))
    assert table.rows[1].new == 120 and table.rows[1].hp == 8
    assert table.crossover == 31
    ```
    """
    config = _default_config(config)
    if not degrees or min(degrees) < 1:
        raise ValueError('degrees must be a nonempty sequence of integers >= 1')
    e = e_const(n * (l + 1), k, config)

    def new(d: int) -> int:
        return e * d**n * d ** (n * l)

    rows = tuple(CompareRow(d, new(d), bound_hp(d, d, m, l)) for d in degrees)
    crossover = next((d for d in range(1, max(search_limit, max(degrees)) + 1) if new(d) < bound_hp(d, d, m, l)), None)
    return CompareTable(n, l, k, m, config, rows, crossover)
