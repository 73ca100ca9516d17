import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations, product
from math import factorial, gcd
from typing import TYPE_CHECKING, Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

if TYPE_CHECKING:
    from .diffpoly import JetLayout

__all__ = (
    'LatticePoint',
    'LatticePolytope',
    'EmptyPolytopeError',
    'DimensionMismatchError',
    'SimplexBlock',
    'hull',
    'minkowski_sum',
    'dilate',
    'standard_simplex',
    'coordinate_simplex',
    'volume',
    'triangulation',
    'triangulated_volume',
    'lattice_points',
    'is_coideal',
    'contains',
    'contains_sum',
    'to_json',
    'from_json',
)
logger = logging.getLogger('diffbkk.polytope')

LatticePoint = Tuple[int, ...]
Halfspace = Tuple[LatticePoint, int]


class EmptyPolytopeError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


class SimplexBlock(str, Enum):
    """Coordinate blocks of a `JetLayout` spanning a standard simplex."""

    all = 'all'
    base_variables = 'base-variables'
    single_variable_jets = 'single-variable-jets'
    orders_up_to = 'orders-up-to'


def _dot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


def _det(rows: List[List[int]]) -> int:
    """Fraction-free (Bareiss) determinant of a square integer matrix."""
    n = len(rows)
    if n == 0:
        return 1
    m = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


class _Echelon:
    """Incrementally built reduced row echelon basis over Q."""

    __slots__ = 'rows', 'pivots'

    def __init__(self) -> None:
        self.rows: List[List[Fraction]] = []
        self.pivots: List[int] = []

    @property
    def rank(self) -> int:
        return len(self.rows)

    def add(self, v: Sequence[int]) -> bool:
        w = [Fraction(x) for x in v]
        for row, p in zip(self.rows, self.pivots):
            if w[p]:
                f = w[p]
                w = [a - f * b for a, b in zip(w, row)]
        p = next((i for i, x in enumerate(w) if x), None)
        if p is None:
            return False
        lead = w[p]
        w = [x / lead for x in w]
        for idx, row in enumerate(self.rows):
            if row[p]:
                f = row[p]
                self.rows[idx] = [a - f * b for a, b in zip(row, w)]
        self.rows.append(w)
        self.pivots.append(p)
        return True

    def complement(self, dim: int) -> List[LatticePoint]:
        """Primitive integer basis of the orthogonal complement of the row space."""
        out = []
        for free in (c for c in range(dim) if c not in self.pivots):
            v = [Fraction(0)] * dim
            v[free] = Fraction(1)
            for row, p in zip(self.rows, self.pivots):
                v[p] = -row[free]
            out.append(_primitive(v))
        return out


def _primitive(v: Sequence[Fraction]) -> LatticePoint:
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return tuple(x // g for x in ints) if g > 1 else tuple(ints)


def _normalize(normal: LatticePoint, offset: int) -> Halfspace:
    g = abs(offset)
    for x in normal:
        g = gcd(g, x)
    if g > 1:
        return tuple(x // g for x in normal), offset // g
    return normal, offset


@dataclass(frozen=True)
class _Hull:
    dim: int
    chart: Tuple[int, ...]
    equations: Tuple[Halfspace, ...]
    facets: Tuple[Halfspace, ...]
    vertices: Tuple[LatticePoint, ...]
    volume: Fraction

    def project(self, point: Sequence[int]) -> LatticePoint:
        return tuple(point[c] for c in self.chart)

    def __contains__(self, point: Sequence[int]) -> bool:
        if any(_dot(a, point) != b for a, b in self.equations):
            return False
        q = self.project(point)
        return all(_dot(n, q) <= b for n, b in self.facets)


def _facet(q: List[LatticePoint], key: Tuple[int, ...], inner: List[int], r: int) -> Halfspace:
    base = q[key[0]]
    rows = [[a - b for a, b in zip(q[i], base)] for i in key[1:]]
    normal = tuple((-1) ** c * _det([row[:c] + row[c + 1 :] for row in rows]) for c in range(r))
    offset = _dot(normal, base)
    if _dot(normal, inner) > (r + 1) * offset:
        return tuple(-x for x in normal), -offset
    return normal, offset


def _beneath_beyond(q: List[LatticePoint], r: int) -> Dict[Tuple[int, ...], Halfspace]:
    """
    Simplicial boundary of the hull of `q`, full-dimensional in `Z^r`, keyed by the point indices of each facet.
    """
    order = sorted(range(len(q)), key=lambda i: q[i])
    first = order[0]
    ech = _Echelon()
    simplex = [first]
    for i in order[1:]:
        if ech.add([a - b for a, b in zip(q[i], q[first])]):
            simplex.append(i)
            if len(simplex) == r + 1:
                break
    # (r + 1) times the centroid of the initial simplex, strictly inside every later hull
    inner = [sum(q[i][c] for i in simplex) for c in range(r)]
    facets: Dict[Tuple[int, ...], Halfspace] = {}
    for omit in simplex:
        key = tuple(sorted(i for i in simplex if i != omit))
        facets[key] = _facet(q, key, inner, r)

    used = set(simplex)
    for p in order:
        if p in used:
            continue
        point = q[p]
        visible = [key for key, (n, b) in facets.items() if _dot(n, point) > b]
        if not visible:
            continue
        ridges = Counter(ridge for key in visible for ridge in combinations(key, r - 1))
        for key in visible:
            del facets[key]
        for ridge, count in ridges.items():
            if count == 1:
                key = tuple(sorted(ridge + (p,)))
                facets[key] = _facet(q, key, inner, r)
    return facets


def _compute_hull(points: Sequence[LatticePoint]) -> _Hull:
    ambient = len(points[0])
    base = points[0]
    ech = _Echelon()
    for p in points[1:]:
        ech.add([a - b for a, b in zip(p, base)])
        if ech.rank == ambient:
            break
    r = ech.rank
    chart = tuple(sorted(ech.pivots))
    equations = tuple((a, _dot(a, base)) for a in ech.complement(ambient))

    if r == 0:
        return _Hull(0, chart, equations, (), (base,), Fraction(0))

    q = [tuple(p[c] for c in chart) for p in points]
    if r == 1:
        lo = min(range(len(q)), key=lambda i: q[i])
        hi = max(range(len(q)), key=lambda i: q[i])
        facets: Tuple[Halfspace, ...] = (((-1,), -q[lo][0]), ((1,), q[hi][0]))
        size = Fraction(q[hi][0] - q[lo][0]) if ambient == 1 else Fraction(0)
        return _Hull(1, chart, equations, facets, tuple(sorted((points[lo], points[hi]))), size)

    simplices = _beneath_beyond(q, r)
    hyperplanes = tuple(sorted({_normalize(n, b) for n, b in simplices.values()}))
    candidates = sorted({i for key in simplices for i in key})
    vertices = []
    for i in candidates:
        tight = _Echelon()
        for n, b in hyperplanes:
            if _dot(n, q[i]) == b and tight.add(n) and tight.rank == r:
                vertices.append(points[i])
                break

    size = Fraction(0)
    if r == ambient:
        apex = q[candidates[0]]
        total = sum(abs(_det([[a - b for a, b in zip(q[i], apex)] for i in key])) for key in simplices)
        size = Fraction(total, factorial(r))

    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(
            'hull of %d points in Z^%d: dimension %d, %d vertices, %d facets',
            len(points),
            ambient,
            r,
            len(vertices),
            len(hyperplanes),
        )
    return _Hull(r, chart, equations, hyperplanes, tuple(sorted(vertices)), size)


def _as_point(p: Iterable[Any]) -> LatticePoint:
    out = []
    for c in p:
        if isinstance(c, bool):
            raise ValueError(f'invalid lattice coordinate {c!r}')
        if isinstance(c, int):
            out.append(c)
        elif isinstance(c, Fraction) and c.denominator == 1:
            out.append(int(c))
        else:
            raise ValueError(f'lattice coordinates must be integers, got {c!r}')
    return tuple(out)


class LatticePolytope:
    """
    Convex hull of a finite nonempty set of integer points.

    The hull (vertices, facets, volume) is computed lazily and cached, equality compares vertex sets.

    ```py
    from diffbkk import LatticePolytope

    square = LatticePolytope([(0, 0), (1, 0), (0, 1), (1, 1), (0, 0)])
    assert square.vertices == ((0, 0), (0, 1), (1, 0), (1, 1))
    assert LatticePolytope([(0, 0), (1, 1), (2, 2)]).vertices == ((0, 0), (2, 2))
    ```
    """

    __slots__ = '_ambient_dim', '_generators', '_vertices', '_hull'

    def __init__(self, points: Iterable[Sequence[int]]) -> None:
        pts = {_as_point(p) for p in points}
        if not pts:
            raise EmptyPolytopeError('a lattice polytope needs at least one point')
        dims = {len(p) for p in pts}
        if len(dims) > 1:
            raise DimensionMismatchError(f'points of different lengths: {sorted(dims)}')
        ambient = dims.pop()
        if ambient == 0:
            raise ValueError('lattice points need at least one coordinate')
        self._ambient_dim = ambient
        self._generators = tuple(sorted(pts))
        self._vertices: Optional[Tuple[LatticePoint, ...]] = None
        self._hull: Optional[_Hull] = None

    @classmethod
    def _with_vertices(cls, vertices: Iterable[Sequence[int]]) -> 'LatticePolytope':
        obj = cls(vertices)
        obj._vertices = obj._generators
        return obj

    @property
    def ambient_dim(self) -> int:
        return self._ambient_dim

    @property
    def generators(self) -> Tuple[LatticePoint, ...]:
        return self._generators

    def _get_hull(self) -> _Hull:
        if self._hull is None:
            self._hull = _compute_hull(self._vertices or self._generators)
        return self._hull

    @property
    def vertices(self) -> Tuple[LatticePoint, ...]:
        """Extreme points in lexicographic order."""
        if self._vertices is None:
            self._vertices = self._get_hull().vertices
        return self._vertices

    @property
    def dim(self) -> int:
        """Dimension of the affine hull."""
        return self._get_hull().dim

    @property
    def facets(self) -> Tuple[Halfspace, ...]:
        """Inequalities `n·x ≤ b` in the coordinates of `chart`, together with `equations` they describe the hull."""
        return self._get_hull().facets

    @property
    def equations(self) -> Tuple[Halfspace, ...]:
        """Equations `a·x = b` of the affine hull."""
        return self._get_hull().equations

    @property
    def chart(self) -> Tuple[int, ...]:
        return self._get_hull().chart

    def _points(self) -> Tuple[LatticePoint, ...]:
        return self._vertices or self._generators

    def support(self, direction: Sequence[int]) -> int:
        """`max` of `direction·x` over the polytope."""
        if len(direction) != self._ambient_dim:
            raise DimensionMismatchError(f'direction of length {len(direction)} in Z^{self._ambient_dim}')
        return max(_dot(direction, p) for p in self._points())

    def __contains__(self, point: Sequence[int]) -> bool:
        return contains(self, point)

    def __add__(self, other: 'LatticePolytope') -> 'LatticePolytope':
        if not isinstance(other, LatticePolytope):
            return NotImplemented
        return minkowski_sum(self, other)

    def __mul__(self, c: int) -> 'LatticePolytope':
        if not isinstance(c, int):
            return NotImplemented
        return dilate(self, c)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LatticePolytope):
            return NotImplemented
        return self._ambient_dim == other._ambient_dim and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    def __repr__(self) -> str:
        args = ', '.join(f'{k}={getattr(self, k)!r}' for k in ('ambient_dim', 'vertices'))
        return f'{self.__class__.__name__}({args})'


def _check_dims(*polys: LatticePolytope) -> int:
    dims = {p.ambient_dim for p in polys}
    if len(dims) != 1:
        raise DimensionMismatchError(f'polytopes live in different dimensions: {sorted(dims)}')
    return dims.pop()


def hull(points: Iterable[Sequence[int]]) -> LatticePolytope:
    """Convex hull of lattice points with its vertices computed."""
    poly = LatticePolytope(points)
    poly._vertices = poly._get_hull().vertices
    return poly


def _moving(points: Sequence[LatticePoint]) -> Set[int]:
    return {c for c in range(len(points[0])) if len({p[c] for p in points}) > 1}


def minkowski_sum(a: LatticePolytope, b: LatticePolytope) -> LatticePolytope:
    """
    `A + B` as the hull of pairwise vertex sums.

    Summands varying in disjoint coordinate sets form a product, every pairwise sum is then a vertex.
    """
    _check_dims(a, b)
    va, vb = a.vertices, b.vertices
    sums = {tuple(x + y for x, y in zip(p, q)) for p in va for q in vb}
    if _moving(va).isdisjoint(_moving(vb)):
        return LatticePolytope._with_vertices(sums)
    return LatticePolytope(sums)


def dilate(a: LatticePolytope, c: int) -> LatticePolytope:
    if c < 0:
        raise ValueError(f'dilation factor must be non-negative, got {c}')
    if c == 0:
        return LatticePolytope._with_vertices([(0,) * a.ambient_dim])
    if c == 1:
        return a
    if a._vertices is not None:
        return LatticePolytope._with_vertices(tuple(c * x for x in p) for p in a._vertices)
    return LatticePolytope(tuple(c * x for x in p) for p in a.generators)


def coordinate_simplex(dim: int, coords: Iterable[int], scale: int = 1) -> LatticePolytope:
    """
    `scale` times the standard simplex spanned by the unit vectors of `coords` in `Z^dim`.

    ```py
    from diffbkk.polytope import coordinate_simplex

    assert coordinate_simplex(3, [0, 2], 2).vertices == ((0, 0, 0), (0, 0, 2), (2, 0, 0))
    ```
    """
    if scale < 0:
        raise ValueError(f'scale must be non-negative, got {scale}')
    points = [(0,) * dim]
    for c in coords:
        if not 0 <= c < dim:
            raise ValueError(f'coordinate {c} out of range for Z^{dim}')
        v = [0] * dim
        v[c] = scale
        points.append(tuple(v))
    return LatticePolytope._with_vertices(points)


def standard_simplex(
    layout: 'JetLayout',
    block: Union[SimplexBlock, str] = SimplexBlock.all,
    *,
    variable: Union[int, str, None] = None,
    order: Optional[int] = None,
) -> LatticePolytope:
    """
    The standard simplex of a coordinate block of `layout`, embedded in `Z^s`.

    * `all`: every jet coordinate
    * `base-variables`: the order-0 coordinates
    * `single-variable-jets`: all orders of one `variable`
    * `orders-up-to`: every variable at orders `0..order`
    """
    try:
        block = SimplexBlock(block)
    except ValueError:
        raise ValueError(f'invalid simplex block {block!r}') from None
    if block is SimplexBlock.all:
        coords = list(range(layout.s))
    elif block is SimplexBlock.base_variables:
        coords = [layout.index(i, 0) for i in range(layout.n)]
    elif block is SimplexBlock.single_variable_jets:
        if variable is None:
            raise ValueError('the single-variable-jets block needs a variable')
        try:
            i = layout.variable_index(variable) if isinstance(variable, str) else variable
            coords = [layout.index(i, j) for j in range(layout.l + 1)]
        except (KeyError, IndexError):
            raise ValueError(f'invalid variable {variable!r} for the single-variable-jets block') from None
    else:
        if order is None or not 0 <= order <= layout.l:
            raise ValueError(f'the orders-up-to block needs an order in 0..{layout.l}, got {order!r}')
        coords = [layout.index(i, j) for i in range(layout.n) for j in range(order + 1)]
    return coordinate_simplex(layout.s, coords)


def volume(a: LatticePolytope) -> Fraction:
    """Euclidean volume in `Z^s`, zero for polytopes of lower dimension."""
    return a._get_hull().volume


def _affine_rank(points: Sequence[LatticePoint]) -> int:
    ech = _Echelon()
    for p in points[1:]:
        ech.add([x - y for x, y in zip(p, points[0])])
    return ech.rank


def triangulation(a: LatticePolytope) -> List[Tuple[int, ...]]:
    """
    Pulling triangulation of `a` as index tuples into `a.vertices`, each simplex has `a.dim + 1` vertices.

    Faces are tracked as sets of vertex indices, so the triangulation depends only on the face lattice and is valid
    for every polytope with the same combinatorics and vertex order, e.g. every positive Minkowski combination of
    the same summands.

    ```py
    from diffbkk import hull
    from diffbkk.polytope import triangulation

    square = hull([(0, 0), (1, 0), (0, 1), (1, 1)])
    assert triangulation(square) == [(0, 1, 3), (0, 2, 3)]
    ```
    """
    h = a._get_hull()
    q = [h.project(v) for v in a.vertices]
    incidences = [frozenset(i for i, v in enumerate(q) if _dot(n, v) == b) for n, b in h.facets]
    memo: Dict[Tuple[FrozenSet[int], int], List[Tuple[int, ...]]] = {}

    def pull(face: FrozenSet[int], k: int) -> List[Tuple[int, ...]]:
        if k == 0:
            return [tuple(face)]
        if (face, k) in memo:
            return memo[face, k]
        apex = min(face)
        subfaces = {face & inc for inc in incidences}
        out = []
        for sub in sorted(subfaces, key=sorted):
            if apex in sub or len(sub) < k or _affine_rank([q[i] for i in sorted(sub)]) != k - 1:
                continue
            out.extend((apex,) + t for t in pull(sub, k - 1))
        memo[face, k] = out
        return out

    return pull(frozenset(range(len(q))), h.dim)


def triangulated_volume(points: Sequence[Sequence[Any]], simplices: Iterable[Sequence[int]]) -> Fraction:
    """Volume of the union of full-dimensional simplices given as index tuples into `points`."""
    total = Fraction(0)
    dim = 0
    for t in simplices:
        base = points[t[0]]
        dim = len(base)
        rows = [[Fraction(x) - y for x, y in zip(points[i], base)] for i in t[1:]]
        den = 1
        for row in rows:
            for x in row:
                den = den * x.denominator // gcd(den, x.denominator)
        total += Fraction(abs(_det([[int(x * den) for x in row] for row in rows])), den**dim)
    return total / factorial(dim)


def lattice_points(a: LatticePolytope) -> List[LatticePoint]:
    h = a._get_hull()
    vs = a.vertices
    ranges = [range(min(v[c] for v in vs), max(v[c] for v in vs) + 1) for c in range(a.ambient_dim)]
    return [p for p in product(*ranges) if p in h]


def is_coideal(a: LatticePolytope) -> bool:
    """
    Whether the lattice points of `a` are closed under decreasing any coordinate, i.e. `a` is the hull of a
    finite co-ideal of `Z≥0^s`.
    """
    if any(c < 0 for p in a.generators for c in p):
        raise ValueError('co-ideal polytopes live in the non-negative orthant')
    pts = set(lattice_points(a))
    for p in pts:
        for c, x in enumerate(p):
            if x and p[:c] + (x - 1,) + p[c + 1 :] not in pts:
                return False
    return True


def contains(a: LatticePolytope, b: Union[LatticePolytope, Sequence[int]]) -> bool:
    if isinstance(b, LatticePolytope):
        _check_dims(a, b)
        h = a._get_hull()
        return all(p in h for p in b._points())
    point = _as_point(b)
    if len(point) != a.ambient_dim:
        raise DimensionMismatchError(f'point of length {len(point)} tested against a polytope in Z^{a.ambient_dim}')
    return point in a._get_hull()


def contains_sum(a: LatticePolytope, summands: Sequence[LatticePolytope]) -> bool:
    """
    Whether `Σ summands ⊆ a`, decided on support functions without building the Minkowski sum.
    """
    if not summands:
        raise ValueError('contains_sum needs at least one summand')
    dim = _check_dims(a, *summands)
    h = a._get_hull()
    for normal, b in h.equations:
        total = 0
        for s in summands:
            values = {_dot(normal, p) for p in s._points()}
            if len(values) != 1:
                return False
            total += values.pop()
        if total != b:
            return False
    for normal, b in h.facets:
        direction = [0] * dim
        for c, x in zip(h.chart, normal):
            direction[c] = x
        if sum(s.support(direction) for s in summands) > b:
            return False
    return True


def to_json(a: LatticePolytope) -> Dict[str, Any]:
    vertices = [list(v) for v in a.vertices]
    return {'dim': a.ambient_dim, 'points': vertices, 'vertices': [list(v) for v in vertices]}


def from_json(obj: Any) -> LatticePolytope:
    if not isinstance(obj, dict) or 'points' not in obj:
        raise ValueError('polytope JSON must be an object with "dim" and "points"')
    points = obj['points']
    if not isinstance(points, list) or not all(isinstance(p, list) for p in points):
        raise ValueError('"points" must be a list of integer lists')
    poly = LatticePolytope(points)
    dim = obj.get('dim', poly.ambient_dim)
    if isinstance(dim, str):
        dim = int(dim)
    if dim != poly.ambient_dim:
        raise DimensionMismatchError(f'"dim" is {dim} but points have length {poly.ambient_dim}')
    return poly
