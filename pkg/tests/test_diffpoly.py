import random
from fractions import Fraction
from itertools import product
from math import prod

import pytest
import sympy as sp

from diffbkk import (
    DiffPolynomial,
    JetLayout,
    eliminate_linear,
    evaluate_at_jet,
    is_jet,
    jet,
    newton_polytope,
    parse_poly,
    prolong,
    tau_containment,
    tau_system,
    total_derivative,
    xi_system,
)
from diffbkk.diffpoly import coeff_derivative
from diffbkk.polytope import EmptyPolytopeError, LatticePolytope, contains, minkowski_sum
from diffbkk.rational import T, RationalFunction


def test_layout_defaults():
    layout = JetLayout(3, 2)
    assert layout.names == ('x', 'y', 'z')
    assert layout.s == 9
    assert layout.coordinate(5) == (1, 2)
    assert [layout.coordinate_name(i) for i in range(3)] == ['x', 'x_1', 'x_2']
    assert JetLayout(13, 0).names[12] == 'x12'


@pytest.mark.parametrize(
    'kwargs,msg',
    [
        ({'n': 0, 'l': 1}, 'at least one variable'),
        ({'n': 1, 'l': -1}, 'must be non-negative'),
        ({'n': 2, 'l': 1, 'names': ('x',)}, 'expected 2 variable names'),
        ({'n': 2, 'l': 1, 'names': ('x', 'x')}, 'duplicate variable names'),
        ({'n': 1, 'l': 1, 'names': ('t',)}, 'differential variable'),
        ({'n': 1, 'l': 1, 'names': ('x y',)}, 'invalid variable name'),
    ],
)
def test_layout_invalid(kwargs, msg):
    with pytest.raises(ValueError, match=msg):
        JetLayout(**kwargs)


def test_layout_index_errors():
    layout = JetLayout(2, 1)
    with pytest.raises(IndexError):
        layout.index(2, 0)
    with pytest.raises(IndexError):
        layout.index(0, 2)
    with pytest.raises(KeyError):
        layout.variable_index('z')


def test_tau_layout():
    tau = JetLayout(1, 2).tau_layout()
    assert tau.names == ('x', 'x1', 'x2')
    assert tau.l == 1
    assert tau.coordinate_name(tau.index(2, 1)) == 'x2_1'


def test_ring_operations():
    layout = JetLayout(2, 1)
    x = DiffPolynomial.variable(layout, 'x')
    y1 = DiffPolynomial.variable(layout, 'y', 1)
    p = (x + y1) ** 2 - 2 * x * y1
    assert p == x**2 + y1**2
    assert p.degree() == 2
    assert p.degree_in([layout.index(1, 1)]) == 2
    assert (p - p).is_zero
    assert (p - p).degree() == -1
    assert 1 + x == x + 1
    assert x * RationalFunction(T) == parse_poly('(t)*x', layout)


def test_layout_mismatch():
    a = DiffPolynomial.variable(JetLayout(1, 0), 'x')
    b = DiffPolynomial.variable(JetLayout(1, 1), 'x')
    with pytest.raises(ValueError, match='different layouts'):
        a + b


def test_embed():
    p = parse_poly('x_1*y + 3', JetLayout(2, 1))
    q = p.embed(JetLayout(2, 3))
    assert q == parse_poly('x_1*y + 3', JetLayout(2, 3))
    assert q.embed(JetLayout(2, 1)) == p
    with pytest.raises(ValueError, match='does not exist in a layout of order 0'):
        p.embed(JetLayout(2, 0))


def test_from_expr():
    layout = JetLayout(1, 1)
    x, x1 = layout.symbols()
    p = DiffPolynomial.from_expr((x + x1) ** 2 / (T + 1), layout)
    assert p == parse_poly('(1)/(t + 1)*x^2 + (2)/(t + 1)*x*x_1 + (1)/(t + 1)*x_1^2', layout)
    assert sp.cancel(p.as_expr() - (x + x1) ** 2 / (T + 1)) == 0


def test_total_derivative_example():
    layout = JetLayout(2, 0)
    assert total_derivative(parse_poly('x*y - 1', layout)) == parse_poly('x_1*y + x*y_1', layout.with_order(1))


def test_total_derivative_coefficients():
    layout = JetLayout(1, 1)
    p = parse_poly('(t^2)*x_1 + (t)', layout)
    assert total_derivative(p) == parse_poly('(t^2)*x_2 + (2*t)*x_1 + 1', layout.with_order(2))
    assert coeff_derivative(p) == parse_poly('(2*t)*x_1 + 1', layout)


def _random_poly(rng: random.Random, layout: JetLayout) -> DiffPolynomial:
    coefficients = [1, -2, 3, T, 1 / (T + 1), T**2 - 3]
    terms = {}
    for _ in range(rng.randint(1, 4)):
        exp = [0] * layout.s
        for _ in range(rng.randint(0, 3)):
            exp[rng.randrange(layout.s)] += 1
        terms[tuple(exp)] = rng.choice(coefficients)
    return DiffPolynomial(layout, terms)


@pytest.mark.parametrize('seed', range(50))
def test_chain_rule(seed):
    rng = random.Random(seed)
    layout = JetLayout(2, 1)
    p = _random_poly(rng, layout)
    functions = [[T**2 + 1, 1 / (T - 2)], [T, Fraction(3, 2)], [(T + 1) / (T**2 + 1), T**3]][seed % 3]
    assert evaluate_at_jet(total_derivative(p), functions) == evaluate_at_jet(p, functions).derivative()


@pytest.mark.parametrize('seed', range(10))
def test_leibniz(seed):
    rng = random.Random(seed)
    layout = JetLayout(2, seed % 2)
    p, q = _random_poly(rng, layout), _random_poly(rng, layout)
    up = layout.with_order(layout.l + 1)
    assert total_derivative(p * q) == total_derivative(p) * q.embed(up) + p.embed(up) * total_derivative(q)


@pytest.mark.parametrize('seed', range(10))
def test_newton_polytope_of_product(seed):
    rng = random.Random(seed)
    layout = JetLayout(1 + seed % 2, 1)
    p, q = _random_poly(rng, layout), _random_poly(rng, layout)
    assert newton_polytope(p * q) == minkowski_sum(newton_polytope(p), newton_polytope(q))


def _coideal_poly(rng: random.Random, layout: JetLayout) -> DiffPolynomial:
    if rng.random() < 0.5:
        d = rng.randint(1, 2)
        support = [e for e in product(range(d + 1), repeat=layout.s) if sum(e) <= d]
    else:
        box = [rng.randint(0, 1) for _ in range(layout.s)]
        support = list(product(*(range(b + 1) for b in box)))
    coefficients = [1, -2, 3, T, T**2 - 3, 1 / (T + 1)]
    return DiffPolynomial(layout, {e: rng.choice(coefficients) for e in support})


@pytest.mark.parametrize('seed', range(10))
def test_tau_system_shape(seed):
    rng = random.Random(seed)
    layout = JetLayout(1 + seed % 2, seed // 2 % 2)
    polys = [_coideal_poly(rng, layout) for _ in range(1 + seed % 3)]
    tau = tau_system(polys)
    assert len(tau) == 2 * len(polys)
    assert tau.layout == layout.tau_layout()
    assert all(p.layout == tau.layout for p in tau.polys)
    jets = [tau.layout.index(i, 1) for i in range(tau.layout.n)]
    assert all(p.degree_in(jets) <= 1 for p in tau.pairs)
    assert all(tau_containment(p) is True for p in polys)


@pytest.mark.parametrize('seed', range(10))
def test_jet_is_jet(seed):
    rng = random.Random(seed)
    pool = [T**3, 1 / T, (T + 1) / (T**2 + 1), Fraction(3, 2), T**2 - 3 * T, 7]
    n, l = 1 + seed % 3, seed % 4
    values = jet([rng.choice(pool) for _ in range(n)], l)
    assert is_jet(values, JetLayout(n, l))


def test_jet():
    assert jet([T**3, 5], 2) == [T**3, 3 * T**2, 6 * T, 5, 0, 0]
    layout = JetLayout(2, 2)
    values = jet([T**3, 1 / T], 2)
    assert is_jet(values, layout)
    values[1] = values[1] + 1
    assert not is_jet(values, layout)
    with pytest.raises(ValueError, match='expected 6 values'):
        is_jet(values[:5], layout)


def test_evaluate():
    p = parse_poly('x*x_1 - 3/2', JetLayout(1, 1))
    assert p.evaluate([2, 3]) == Fraction(9, 2)
    assert evaluate_at_jet(p, [T**2]) == 2 * T**3 - sp.Rational(3, 2)


def test_tau_system_example():
    layout = JetLayout(2, 0)
    tau = tau_system([parse_poly('y^2 - (t)*x', layout)])
    assert len(tau) == 2
    assert tau.layout == JetLayout(2, 1)
    assert tau.polys == [parse_poly('y^2 - (t)*x', tau.layout), parse_poly('2*y*y_1 - (t)*x_1 - x', tau.layout)]


def test_tau_system_higher_order():
    tau = tau_system([parse_poly('x_1^2 - x', JetLayout(1, 1))])
    assert tau.layout.names == ('x', 'x1')
    assert tau.pairs[0] == parse_poly('2*x1*x1_1 - x_1', tau.layout)


def test_tau_system_errors():
    with pytest.raises(ValueError, match='at least one polynomial'):
        tau_system([])


def test_tau_containment():
    assert tau_containment(parse_poly('x*y + x + y + 1', JetLayout(2, 0))) is True
    assert tau_containment(parse_poly('x*y - 1', JetLayout(2, 0))) is None


def test_newton_polytope():
    p = parse_poly('x^2 + x*y_1 + 1', JetLayout(2, 1))
    assert newton_polytope(p) == LatticePolytope([(2, 0, 0, 0), (1, 0, 0, 1), (0, 0, 0, 0)])
    with pytest.raises(EmptyPolytopeError):
        newton_polytope(p - p)


def test_prolong():
    polys = prolong(parse_poly('x*y - 1', JetLayout(2, 0)), 2)
    assert [p.layout for p in polys] == [JetLayout(2, 2)] * 3
    assert polys[2] == parse_poly('x_2*y + 2*x_1*y_1 + x*y_2', JetLayout(2, 2))


def test_xi_system():
    layout = JetLayout(1, 2)
    tau = layout.tau_layout()
    assert xi_system(layout) == [parse_poly('x_1 - x1', tau), parse_poly('x1_1 - x2', tau)]


def test_eliminate_one_variable():
    layout = JetLayout(1, 1)
    polys = [parse_poly('x_1 - x', layout), parse_poly('x*x_1 - 1', layout)]
    assert eliminate_linear(polys) == parse_poly('1 - x^2', JetLayout(1, 0))


def test_eliminate_sign_convention():
    layout = JetLayout(1, 1)
    a, b, c, d = 2, 3, 5, 7
    polys = [DiffPolynomial.constant(layout, a) + b * DiffPolynomial.variable(layout, 'x', 1)]
    polys.append(DiffPolynomial.constant(layout, c) + d * DiffPolynomial.variable(layout, 'x', 1))
    assert eliminate_linear(polys) == a * d - b * c


def test_eliminate_errors():
    layout = JetLayout(1, 1)
    with pytest.raises(ValueError, match='expected 2 polynomials'):
        eliminate_linear([parse_poly('x_1', layout)])
    with pytest.raises(ValueError, match='not linear'):
        eliminate_linear([parse_poly('x_1^2', layout), parse_poly('x', layout)])
    with pytest.raises(ValueError, match='order 1'):
        eliminate_linear([parse_poly('x', JetLayout(1, 0)), parse_poly('x', JetLayout(1, 0))])


def _affine(rng: random.Random) -> tuple:
    return tuple(rng.randint(-3, 3) for _ in range(3))


@pytest.mark.parametrize('seed', range(20))
def test_eliminate_rank_oracle(seed):
    rng = random.Random(seed)
    layout = JetLayout(2, 1)
    x, x1, y, y1 = range(4)
    rows = []
    polys = []
    for _ in range(3):
        blocks = [_affine(rng) for _ in range(3)]
        rows.append(blocks)
        terms = {}
        for coeffs, slot in zip(blocks, (x1, y1, None)):
            for c, extra in zip(coeffs, (None, x, y)):
                exp = [0] * 4
                if slot is not None:
                    exp[slot] += 1
                if extra is not None:
                    exp[extra] += 1
                terms[tuple(exp)] = terms.get(tuple(exp), 0) + c
        polys.append(DiffPolynomial(layout, terms))
    resultant = eliminate_linear(polys)
    assert resultant.layout == JetLayout(2, 0)

    for _ in range(100):
        px, py = rng.randint(-4, 4), rng.randint(-4, 4)
        matrix = sp.Matrix([[c0 + c1 * px + c2 * py for c0, c1, c2 in row] for row in rows])
        det = matrix.det()
        value = resultant.evaluate([px, py])
        assert value.is_zero == (det == 0)
        assert abs(value.as_fraction()) == abs(int(det))

    if not resultant.is_zero:
        projected = None
        for p in polys:
            shadow = LatticePolytope((e[x], e[y]) for e in p.terms)
            projected = shadow if projected is None else minkowski_sum(projected, shadow)
        assert contains(projected, newton_polytope(resultant))


def _quadratic(rng: random.Random) -> dict:
    monomials = [e for e in product(range(3), repeat=3) if sum(e) <= 2]
    return {e: rng.choice([-3, -2, -1, 1, 2, 3]) for e in rng.sample(monomials, 3)}


def _value(coeff: dict, point) -> int:
    return sum(c * prod(v**e for v, e in zip(point, mono)) for mono, c in coeff.items())


@pytest.mark.parametrize('seed', range(5))
def test_eliminate_three_variables(seed):
    rng = random.Random(seed)
    layout = JetLayout(3, 1)
    base = [layout.index(i, 0) for i in range(3)]
    slots = [layout.index(i, 1) for i in range(3)] + [None]
    rows = []
    polys = []
    for _ in range(4):
        row = [_quadratic(rng) for _ in slots]
        rows.append(row)
        terms = {}
        for coeff, slot in zip(row, slots):
            for mono, c in coeff.items():
                exp = [0] * layout.s
                for idx, e in zip(base, mono):
                    exp[idx] += e
                if slot is not None:
                    exp[slot] += 1
                terms[tuple(exp)] = terms.get(tuple(exp), 0) + c
        polys.append(DiffPolynomial(layout, terms))
    resultant = eliminate_linear(polys)
    assert resultant.layout == JetLayout(3, 0)
    assert resultant.degree() <= 8

    for _ in range(30):
        point = [rng.randint(-3, 3) for _ in range(3)]
        matrix = sp.Matrix([[_value(coeff, point) for coeff in row] for row in rows])
        assert abs(resultant.evaluate(point).as_fraction()) == abs(int(matrix.det()))
