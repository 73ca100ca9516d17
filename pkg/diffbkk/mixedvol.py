import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import product
from math import factorial, gcd
from typing import Any, Counter, Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple, Union

import anyio
import sympy as sp
from sympy.matrices.normalforms import smith_normal_form

from .polytope import (
    DimensionMismatchError,
    LatticePoint,
    LatticePolytope,
    coordinate_simplex,
    dilate,
    from_json,
    minkowski_sum,
    to_json,
    triangulated_volume,
    triangulation,
    volume,
)

__all__ = (
    'Algorithm',
    'MixedVolumeValue',
    'FormalCombination',
    'mixed_volume',
    'amixed_volume',
    'mixed_volume_interp',
    'mixed_volume_blocks',
    'compute_mixed_volume',
    'bkk_count',
    'binomial_count_oracle',
)
logger = logging.getLogger('diffbkk.mixedvol')

MixedVolumeValue = Fraction
"""Mixed volumes are exact non-negative rationals."""

Block = FrozenSet[int]
Entry = Union[LatticePolytope, 'FormalCombination']
INTERPOLATION_LIMIT = 5
SplitSum = Tuple[LatticePolytope, List[Tuple[LatticePoint, ...]]]


class Algorithm(str, Enum):
    polarization = 'polarization'
    interpolation = 'interpolation'
    blocks = 'blocks'
    auto = 'auto'


def _check_square(polys: Sequence[LatticePolytope]) -> int:
    s = len(polys)
    if s == 0:
        raise ValueError('mixed volume of an empty list')
    for p in polys:
        if p.ambient_dim != s:
            raise DimensionMismatchError(f'{s} polytopes given but one lives in Z^{p.ambient_dim}, expected Z^{s}')
    return s


def _subset_volume(polys: Sequence[LatticePolytope], mask: int) -> Fraction:
    total: Optional[LatticePolytope] = None
    for i, p in enumerate(polys):
        if mask >> i & 1:
            total = p if total is None else minkowski_sum(total, p)
    assert total is not None
    return volume(total)


def _polarize(volumes: Dict[int, Fraction], s: int) -> Fraction:
    total = Fraction(0)
    for mask, vol in sorted(volumes.items()):
        total += vol if (s - bin(mask).count('1')) % 2 == 0 else -vol
    return total / factorial(s)


def mixed_volume(polys: Sequence[LatticePolytope]) -> MixedVolumeValue:
    """
    Mixed volume by polarization: `(1/s!) Σ_J (-1)^(s-|J|) Vol(Σ_{j∈J} K_j)` over nonempty subsets `J`.

    Subsets are enumerated by binary counting, each Minkowski sum extends a smaller one by a single summand.

    ```py
    from fractions import Fraction

    from diffbkk import LatticePolytope, mixed_volume

    simplex = LatticePolytope([(0, 0), (1, 0), (0, 1)])
    assert mixed_volume([simplex, simplex]) == Fraction(1, 2)
    ```
    """
    s = _check_square(polys)
    sums: Dict[int, LatticePolytope] = {}
    volumes: Dict[int, Fraction] = {}
    for mask in range(1, 1 << s):
        low = mask & -mask
        rest = mask ^ low
        single = polys[low.bit_length() - 1]
        sums[mask] = single if rest == 0 else minkowski_sum(sums[rest], single)
        volumes[mask] = volume(sums[mask])
        logger.debug('subset %s: volume %s', format(mask, f'0{s}b'), volumes[mask])
    return _polarize(volumes, s)


async def amixed_volume(polys: Sequence[LatticePolytope]) -> MixedVolumeValue:
    """
    Asynchronous equivalent of [`mixed_volume`][diffbkk.mixed_volume], the `2^s - 1` subset volumes are computed in
    worker threads using [anyio](https://anyio.readthedocs.io/en/latest/).
    """
    s = _check_square(polys)
    volumes: Dict[int, Fraction] = {}

    async def measure(mask: int) -> None:
        volumes[mask] = await anyio.to_thread.run_sync(_subset_volume, polys, mask)

    async with anyio.create_task_group() as tg:
        for mask in range(1, 1 << s):
            tg.start_soon(measure, mask)
    return _polarize(volumes, s)


def _linear_weights(s: int) -> List[Fraction]:
    """Coefficient of `x` in each Lagrange basis polynomial on the nodes `0..s`."""
    weights = []
    for j in range(s + 1):
        coeffs = [Fraction(1)]
        denom = Fraction(1)
        for m in range(s + 1):
            if m == j:
                continue
            shifted = [Fraction(0)] + coeffs
            for k, c in enumerate(coeffs):
                shifted[k] -= m * c
            coeffs = shifted
            denom *= j - m
        weights.append(coeffs[1] / denom)
    return weights


def _decomposed_sums(polys: Sequence[LatticePolytope]) -> Dict[int, SplitSum]:
    """
    `Σ_{i∈mask} K_i` for every nonempty mask, with each of its vertices split into the unique summand vertices
    adding up to it, listed by increasing summand index.
    """
    s = len(polys)
    sums: Dict[int, SplitSum] = {}
    for mask in range(1, 1 << s):
        high = 1 << (mask.bit_length() - 1)
        rest = mask ^ high
        single = polys[high.bit_length() - 1]
        if rest == 0:
            sums[mask] = single, [(v,) for v in single.vertices]
            continue
        poly, parts = sums[rest]
        total = minkowski_sum(poly, single)
        table: Dict[LatticePoint, Tuple[LatticePoint, ...]] = {}
        for u, split in zip(poly.vertices, parts):
            for v in single.vertices:
                table.setdefault(tuple(x + y for x, y in zip(u, v)), split + (v,))
        sums[mask] = total, [table[w] for w in total.vertices]
    return sums


def mixed_volume_interp(polys: Sequence[LatticePolytope]) -> MixedVolumeValue:
    """
    Mixed volume as the `λ_1⋯λ_s` coefficient of `Vol(Σ λ_i K_i)`, interpolated on the grid `{0..s}^s`.

    For positive weights on a fixed support the combination keeps the face lattice of the plain sum, one
    triangulation per support is evaluated at the dilated summand vertices.
    """
    s = _check_square(polys)
    if s > INTERPOLATION_LIMIT:
        raise ValueError(f'interpolation is limited to s <= {INTERPOLATION_LIMIT}, got s={s}')
    weights = _linear_weights(s)
    sums = _decomposed_sums(polys)
    simplices: Dict[int, List[Tuple[int, ...]]] = {}
    cache: Dict[Tuple[int, ...], Fraction] = {}

    def vol(lam: Tuple[int, ...]) -> Fraction:
        g = 0
        for x in lam:
            g = gcd(g, x)
        if g == 0:
            return Fraction(0)
        key = tuple(x // g for x in lam)
        if key not in cache:
            mask = sum(1 << i for i, c in enumerate(key) if c)
            poly, parts = sums[mask]
            if poly.dim < s:
                cache[key] = Fraction(0)
            else:
                if mask not in simplices:
                    simplices[mask] = triangulation(poly)
                scales = [c for c in key if c]
                points = [tuple(sum(c * v[k] for c, v in zip(scales, split)) for k in range(s)) for split in parts]
                cache[key] = triangulated_volume(points, simplices[mask])
        return cache[key] * g**s

    coefficient = Fraction(0)
    for lam in product(range(s + 1), repeat=s):
        w = Fraction(1)
        for x in lam:
            w *= weights[x]
        coefficient += w * vol(lam)
    logger.debug('interpolation used %d distinct dilation volumes, %d triangulations', len(cache), len(simplices))
    return coefficient / factorial(s)


def _simplex_block(poly: LatticePolytope) -> Tuple[Block, int]:
    origin = (0,) * poly.ambient_dim
    vertices = poly.vertices
    if origin not in vertices:
        raise ValueError(f'non-simplex basis: {poly} does not contain the origin as a vertex')
    coords = set()
    scales = set()
    for v in vertices:
        if v == origin:
            continue
        nonzero = [(c, x) for c, x in enumerate(v) if x]
        if len(nonzero) != 1 or nonzero[0][1] < 0:
            raise ValueError(f'non-simplex basis: {poly} is not a dilated coordinate simplex')
        coords.add(nonzero[0][0])
        scales.add(nonzero[0][1])
    if len(scales) > 1:
        raise ValueError(f'non-simplex basis: {poly} has unequal edge lengths')
    return frozenset(coords), scales.pop() if scales else 0


def _check_complementary(blocks: Sequence[Block]) -> None:
    distinct = sorted({b for b in blocks if b}, key=sorted)
    for i, a in enumerate(distinct):
        for b in distinct[i + 1 :]:
            if not a.isdisjoint(b):
                raise ValueError(
                    f'non-complementary blocks {sorted(a)} and {sorted(b)}, declare the combination generic'
                )


@dataclass(frozen=True)
class FormalCombination:
    """
    `Σ coefficients[i] · basis[i]` kept symbolic, each basis polytope a dilated coordinate simplex.

    Basis simplices must span identical or disjoint coordinate sets unless `generic` is set.

    ```py
    from diffbkk import FormalCombination, JetLayout, SimplexBlock, standard_simplex

    layout = JetLayout(2, 3)
    xi = standard_simplex(layout, SimplexBlock.single_variable_jets, variable='x')
    eta = standard_simplex(layout, SimplexBlock.single_variable_jets, variable='y')
    both = FormalCombination((('xi', xi), ('eta', eta)), (13, 13))
    assert len(both.polytope().vertices) == 25
    ```
    """

    basis: Tuple[Tuple[str, LatticePolytope], ...]
    coefficients: Tuple[int, ...]
    generic: bool = False
    _blocks: Tuple[Tuple[Block, int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        basis = tuple((str(name), poly) for name, poly in self.basis)
        coefficients = tuple(int(c) for c in self.coefficients)
        object.__setattr__(self, 'basis', basis)
        object.__setattr__(self, 'coefficients', coefficients)
        if not basis:
            raise ValueError('a formal combination needs at least one basis polytope')
        if len(basis) != len(coefficients):
            raise ValueError(f'{len(basis)} basis polytopes but {len(coefficients)} coefficients')
        if any(c < 0 for c in coefficients):
            raise ValueError('coefficients of a formal combination must be non-negative')
        dims = {p.ambient_dim for _, p in basis}
        if len(dims) != 1:
            raise DimensionMismatchError(f'basis polytopes live in different dimensions: {sorted(dims)}')
        blocks = tuple(_simplex_block(p) for _, p in basis)
        if not self.generic:
            _check_complementary([b for b, _ in blocks])
        object.__setattr__(self, '_blocks', blocks)

    @classmethod
    def from_polytope(cls, poly: LatticePolytope, name: str = 'P') -> 'FormalCombination':
        """A single dilated coordinate simplex as a combination, other polytopes raise `ValueError`."""
        return cls(((name, poly),), (1,))

    @property
    def ambient_dim(self) -> int:
        return self.basis[0][1].ambient_dim

    def blocks(self) -> Dict[Block, int]:
        """Coordinate set of each basis simplex mapped to its total weight `coefficient × edge length`."""
        out: Dict[Block, int] = {}
        for (block, scale), c in zip(self._blocks, self.coefficients):
            if block and scale * c:
                out[block] = out.get(block, 0) + scale * c
        return out

    def polytope(self) -> LatticePolytope:
        """The concrete Minkowski combination."""
        total: Optional[LatticePolytope] = None
        for (_, poly), c in zip(self.basis, self.coefficients):
            if c:
                scaled = dilate(poly, c)
                total = scaled if total is None else minkowski_sum(total, scaled)
        return total if total is not None else coordinate_simplex(self.ambient_dim, [], 0)

    def to_json(self) -> Dict[str, Any]:
        return {
            'dim': self.ambient_dim,
            'generic': self.generic,
            'blocks': [
                {'name': name, 'coefficient': str(c), 'polytope': to_json(poly)}
                for (name, poly), c in zip(self.basis, self.coefficients)
            ],
        }

    @classmethod
    def from_json(cls, obj: Any) -> 'FormalCombination':
        if not isinstance(obj, dict) or not isinstance(obj.get('blocks'), list):
            raise ValueError('formal combination JSON must be an object with a "blocks" list')
        basis = []
        coefficients = []
        for i, block in enumerate(obj['blocks']):
            if not isinstance(block, dict):
                raise ValueError('every block must be an object')
            if 'polytope' in block:
                poly = from_json(block['polytope'])
            else:
                poly = coordinate_simplex(int(obj['dim']), block['coords'], int(block.get('scale', 1)))
            basis.append((block.get('name', f'B{i}'), poly))
            coefficients.append(int(block.get('coefficient', 1)))
        return cls(tuple(basis), tuple(coefficients), bool(obj.get('generic', False)))

    def __str__(self) -> str:
        return ' + '.join(f'{c}·{name}' for (name, _), c in zip(self.basis, self.coefficients))


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _multinomial(total: int, parts: Sequence[int]) -> int:
    out = factorial(total)
    for k in parts:
        out //= factorial(k)
    return out


def _has_transversal(slots: Sequence[Block]) -> bool:
    """Whether the coordinate sets admit distinct representatives (bipartite matching)."""
    match: Dict[int, int] = {}

    def augment(slot: int, seen: Set[int]) -> bool:
        for c in sorted(slots[slot]):
            if c in seen:
                continue
            seen.add(c)
            if c not in match or augment(match[c], seen):
                match[c] = slot
                return True
        return False

    return all(augment(i, set()) for i in range(len(slots)))


def mixed_volume_blocks(entries: Sequence['FormalCombination']) -> MixedVolumeValue:
    """
    Mixed volume of formal combinations by multilinear expansion over their basis simplices.

    A base term `V(Δ_{S_1}, …, Δ_{S_s})` of coordinate simplices is `1/s!` when the sets `S_i` have a system of
    distinct representatives and `0` otherwise. For complementary blocks this means every block is repeated
    exactly as often as its dimension.
    """
    s = len(entries)
    if s == 0:
        raise ValueError('mixed volume of an empty list')
    for e in entries:
        if e.ambient_dim != s:
            raise DimensionMismatchError(f'{s} combinations given but one lives in Z^{e.ambient_dim}, expected Z^{s}')
    if not any(e.generic for e in entries):
        _check_complementary([b for e in entries for b in e.blocks()])

    groups: Counter[Tuple[Tuple[Block, int], ...]] = Counter()
    for e in entries:
        groups[tuple(sorted(e.blocks().items(), key=lambda item: sorted(item[0])))] += 1
    if any(not signature for signature in groups):
        return Fraction(0)

    options = []
    for signature, count in sorted(groups.items(), key=lambda item: [sorted(b) for b, _ in item[0]]):
        group = []
        for comp in _compositions(count, len(signature)):
            weight = _multinomial(count, comp)
            for (_, w), k in zip(signature, comp):
                weight *= w**k
            group.append((weight, [(block, k) for (block, _), k in zip(signature, comp) if k]))
        options.append(group)

    total = 0
    cache: Dict[Tuple[Tuple[Tuple[int, ...], int], ...], bool] = {}
    terms = 0
    for choice in product(*options):
        weight = 1
        slots: Counter[Block] = Counter()
        for w, parts in choice:
            weight *= w
            for block, k in parts:
                slots[block] += k
        key = tuple(sorted((tuple(sorted(b)), k) for b, k in slots.items()))
        if key not in cache:
            cache[key] = _has_transversal([frozenset(b) for b, k in key for _ in range(k)])
        terms += 1
        if cache[key]:
            total += weight
    logger.debug('block expansion: %d terms, %d distinct base terms', terms, len(cache))
    return Fraction(total, factorial(s))


def _default_algorithm(algorithm: Union[Algorithm, str, None], entries: Sequence[Entry]) -> Algorithm:
    algorithm = Algorithm(algorithm or Algorithm.auto)
    if algorithm is Algorithm.auto:
        return Algorithm.blocks if all(isinstance(e, FormalCombination) for e in entries) else Algorithm.polarization
    return algorithm


def compute_mixed_volume(
    entries: Sequence[Entry], algorithm: Union[Algorithm, str, None] = None
) -> Tuple[MixedVolumeValue, Algorithm]:
    """
    Dispatch to one of the three algorithms, `auto` picks the block expansion when every entry is a
    `FormalCombination` and polarization otherwise.
    """
    algorithm = _default_algorithm(algorithm, entries)
    if algorithm is Algorithm.blocks:
        combos = [e if isinstance(e, FormalCombination) else FormalCombination.from_polytope(e) for e in entries]
        return mixed_volume_blocks(combos), algorithm
    polys = [e.polytope() if isinstance(e, FormalCombination) else e for e in entries]
    if algorithm is Algorithm.interpolation:
        return mixed_volume_interp(polys), algorithm
    return mixed_volume(polys), algorithm


def bkk_count(entries: Sequence[Entry], algorithm: Union[Algorithm, str, None] = None) -> int:
    """
    `s! · V(K_1, …, K_s)`, the BKK bound on isolated solutions in the torus.

    ```py
    from diffbkk import LatticePolytope, bkk_count, dilate

    simplex = LatticePolytope([(0, 0), (1, 0), (0, 1)])
    assert bkk_count([dilate(simplex, 2), dilate(simplex, 3)]) == 6
    ```
    """
    value, _ = compute_mixed_volume(entries, algorithm)
    count = value * factorial(len(entries))
    if count.denominator != 1:
        raise ArithmeticError(f'BKK count {count} of lattice polytopes is not an integer')
    return count.numerator


def binomial_count_oracle(matrix: Sequence[Sequence[int]]) -> int:
    """
    Number of torus solutions of the binomial system `x^{a_i} = c_i`, i.e. `|det A|`, from the Smith normal form.
    """
    rows = [[int(x) for x in row] for row in matrix]
    s = len(rows)
    if s == 0 or any(len(row) != s for row in rows):
        raise ValueError('binomial_count_oracle needs a nonempty square matrix')
    snf = smith_normal_form(sp.Matrix(rows), domain=sp.ZZ)
    count = 1
    for i in range(s):
        d = int(snf[i, i])
        if d == 0:
            raise ValueError('singular matrix: the binomial system has no isolated solutions')
        count *= d
    return abs(count)
