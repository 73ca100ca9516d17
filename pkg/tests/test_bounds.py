import logging
import random
from fractions import Fraction
from itertools import product

import pytest
from dirty_equals import IsDict, IsList, IsStr

from diffbkk import (
    BoundConfig,
    EVariant,
    GammaVariant,
    HypothesisError,
    JetLayout,
    LatticePolytope,
    abound_general,
    bkk_count,
    bound_ci,
    bound_degree_simple,
    bound_general,
    bound_hp,
    bound_kushnirenko,
    bound_reduction_degree,
    c_const,
    compare_bounds,
    contains,
    dilate,
    e_const,
    gamma_polytope,
    hull,
    reduction_degree_term,
    standard_simplex,
)
from diffbkk.bounds import BoundTerm, as_json_value, gamma_multiplier

from .conftest import unit_simplex


@pytest.mark.parametrize(
    's,k,expected',
    [(8, 6, 2_580_480), (2, 1, 6), (2, 2, 2), (1, 0, 3), (3, 1, 6 * 4**3), (0, 0, 1)],
)
def test_c_const(s, k, expected):
    assert c_const(s, k) == expected


@pytest.mark.parametrize(
    's,k,variant,expected',
    [
        (2, 1, 'printed', 30),
        (2, 1, 'per-j', 26),
        (1, 0, 'printed', 9),
        (2, 2, 'printed', 2),
        (2, 2, 'per-j', 2),
    ],
)
def test_e_const(s, k, variant, expected):
    assert e_const(s, k, BoundConfig(e_variant=variant)) == expected


def test_e_const_default_is_printed():
    assert e_const(2, 1) == 30


@pytest.mark.parametrize('s,k', [(-1, 0), (1, -1), (2, 3)])
def test_constant_ranges(s, k):
    with pytest.raises(ValueError):
        c_const(s, k)
    with pytest.raises(ValueError):
        e_const(s, k)


@pytest.mark.parametrize('variant,expected', [('theorem12', 9), ('prop42', 8), ('refined', 3)])
def test_gamma_multiplier(variant, expected):
    assert gamma_multiplier(8, 6, BoundConfig(gamma_variant=variant)) == expected


def test_config():
    config = BoundConfig('refined', 'per-j')
    assert config.gamma_variant is GammaVariant.refined
    assert config.e_variant is EVariant.per_j
    assert config.to_dict() == {'gamma_variant': 'refined', 'e_variant': 'per-j'}
    assert BoundConfig() == BoundConfig(GammaVariant.theorem12, EVariant.printed)
    with pytest.raises(ValueError):
        BoundConfig('theorem13')


def test_gamma_polytope():
    simplex = unit_simplex(2)
    assert gamma_polytope([simplex]) == dilate(simplex, 4)
    assert gamma_polytope([simplex], config=BoundConfig('prop42')) == dilate(simplex, 3)
    assert gamma_polytope([simplex], config=BoundConfig('refined')) == dilate(simplex, 3)
    assert gamma_polytope([], s=2) == dilate(simplex, 3)
    with pytest.raises(ValueError, match='cannot infer'):
        gamma_polytope([])


def test_gamma_refined_needs_coideal():
    diagonal = hull([(0, 0), (1, 1)])
    assert gamma_polytope([diagonal]) == hull([(0, 0), (3, 0), (0, 3), (1, 1), (4, 1), (1, 4)])
    with pytest.raises(HypothesisError, match='Δ_1 is not one'):
        gamma_polytope([diagonal], config=BoundConfig('refined'))


def test_bound_ci():
    report = bound_ci([unit_simplex(2)])
    assert report.bound == 12
    assert report.s == 2 and report.k == 1
    assert report.constants == {'C': 6, 'E': None}
    assert report.gamma == dilate(unit_simplex(2), 4)
    assert [t.value for t in report.terms] == [12]
    assert report.trace == [{'step': 1, 'factor': 3, 'envelope': 2, 'polytope': dilate(unit_simplex(2), 12)}]


def test_bound_ci_trace():
    report = bound_ci([unit_simplex(3)], algorithm='interpolation')
    assert [(step['factor'], step['envelope']) for step in report.trace] == [(4, 3), (16, 15)]
    # C_{3,1} = 3! 4^3, V(Δ, 5Δ, 5Δ) = 25/3!
    assert report.bound == 4**3 * 25


def test_bound_ci_algorithms_agree():
    deltas = [hull([(0, 0), (2, 0), (0, 1), (1, 1)])]
    values = {bound_ci(deltas, algorithm=a).bound for a in ('polarization', 'interpolation')}
    assert len(values) == 1


@pytest.mark.parametrize('degrees', [(1, 1), (2, 3), (1, 2, 2)])
def test_bound_ci_collapses_to_bkk(degrees):
    deltas = [unit_simplex(len(degrees), d) for d in degrees]
    report = bound_ci(deltas)
    assert report.gamma is None
    assert report.trace == []
    assert report.bound == bkk_count(deltas)


def test_bound_ci_monotone():
    small = bound_ci([unit_simplex(2)]).bound
    large = bound_ci([unit_simplex(2, 2)]).bound
    assert small == 12
    assert large == 30
    assert large >= small


def test_bound_ci_errors():
    with pytest.raises(ValueError, match='1 <= k <= s'):
        bound_ci([])
    with pytest.raises(ValueError, match='k=3 exceeds s=2'):
        bound_ci([unit_simplex(2)] * 3)
    with pytest.raises(ValueError, match='different dimensions'):
        bound_ci([unit_simplex(2)], layout=JetLayout(2, 1))


def test_bound_ci_layout():
    layout = JetLayout(1, 1)
    assert bound_ci([standard_simplex(layout)], layout=layout).bound == 12


def test_bound_general():
    simplex = unit_simplex(2)
    report = bound_general([simplex], simplex)
    assert report.bound == 13
    assert [t.value for t in report.terms] == [12, 1]
    assert report.details == {'summed': 13, 'simplified': 15, 'delta': simplex}
    assert report.constants == {'C': 6, 'E': 30}


def test_bound_general_per_j():
    simplex = unit_simplex(2)
    report = bound_general([simplex], simplex, config=BoundConfig(e_variant='per-j'))
    assert report.bound == 13
    assert report.details['simplified'] == 13


def test_bound_general_no_ci():
    simplex = unit_simplex(1)
    report = bound_general([], dilate(simplex, 2))
    # j=0: C_{1,0} V(Γ) with Γ = 2Δ, j=1: C_{1,1} V(2Δ)
    assert [t.value for t in report.terms] == [6, 2]
    assert report.bound == 8
    assert report.details['simplified'] == 18


def test_bound_general_simplified_skipped(caplog):
    caplog.set_level(logging.INFO, 'diffbkk')
    simplex = unit_simplex(2)
    report = bound_general([dilate(simplex, 2)], simplex)
    assert report.details['simplified'] is None
    assert 'simplified form skipped: Δ_1 is not contained in Δ' in caplog.text


def test_bound_general_needs_standard_simplex():
    with pytest.raises(HypothesisError, match='standard simplex'):
        bound_general([], hull([(1, 1), (2, 1), (1, 2)]))


@pytest.mark.anyio
async def test_abound_general():
    simplex = unit_simplex(2)
    delta = hull([(0, 0), (2, 0), (0, 2), (1, 1)])
    assert await abound_general([simplex], delta) == bound_general([simplex], delta)


def test_bound_kushnirenko():
    report = bound_kushnirenko(unit_simplex(2, 2), 1)
    assert report.bound == 60
    assert report.details['volume'] == 2
    assert bound_kushnirenko(unit_simplex(2, 2), 1, BoundConfig(e_variant='per-j')).bound == 52
    with pytest.raises(HypothesisError):
        bound_kushnirenko(hull([(1, 1), (2, 1), (1, 2)]), 1)


def test_bound_reduction_degree():
    simplex = unit_simplex(2)
    report = bound_reduction_degree([simplex], simplex)
    assert report.bound == 30
    assert report.terms[0].weight == 60
    assert report.terms[0].mixed_volume == Fraction(1, 2)
    with pytest.raises(HypothesisError, match='Δ_1 is not contained in Δ'):
        bound_reduction_degree([dilate(simplex, 2)], simplex)


def _random_polytope(rng: random.Random, s: int, top: int) -> LatticePolytope:
    return hull([tuple(rng.randint(0, top) for _ in range(s)) for _ in range(s + 2)])


def _grow(rng: random.Random, p: LatticePolytope, top: int) -> LatticePolytope:
    extra = tuple(tuple(rng.randint(0, top) for _ in range(p.ambient_dim)) for _ in range(2))
    return hull(p.vertices + extra)


def _coideal(rng: random.Random, s: int, top: int) -> LatticePolytope:
    peaks = [[rng.randint(0, top) for _ in range(s)] for _ in range(2)]
    return hull(tuple(x if bit else 0 for x, bit in zip(p, bits)) for p in peaks for bits in product((0, 1), repeat=s))


def _containing(s: int, *polys: LatticePolytope) -> LatticePolytope:
    return hull(unit_simplex(s).vertices + tuple(v for p in polys for v in p.vertices))


@pytest.mark.parametrize('seed', range(30))
def test_bound_ci_collapses_to_bkk_random(seed):
    rng = random.Random(seed)
    s = 2 + seed % 3
    deltas = [_random_polytope(rng, s, 2 if s < 4 else 1) for _ in range(s)]
    report = bound_ci(deltas)
    assert report.gamma is None
    assert report.bound == bkk_count(deltas)


@pytest.mark.parametrize('seed', range(20))
def test_bounds_monotone(seed):
    rng = random.Random(seed)
    s = 2 + seed % 3
    k = 1 + seed // 3 % s
    top = 2 if s < 4 else 1
    small_ci = [_random_polytope(rng, s, top) for _ in range(k)]
    large_ci = [_grow(rng, p, top + 1) for p in small_ci]
    small_delta = _containing(s, *small_ci)
    large_delta = _grow(rng, _containing(s, small_delta, *large_ci), top + 1)

    assert bound_ci(small_ci).bound <= bound_ci(large_ci).bound
    small, large = bound_general(small_ci, small_delta), bound_general(large_ci, large_delta)
    assert small.bound <= large.bound
    assert small.details['simplified'] <= large.details['simplified']
    assert bound_kushnirenko(small_delta, k).bound <= bound_kushnirenko(large_delta, k).bound
    assert bound_reduction_degree(small_ci, small_delta).bound <= bound_reduction_degree(large_ci, large_delta).bound

    d_x, d_s = 2 + seed % 3, 1 + seed % 2
    assert bound_degree_simple(1, 1, 1, d_x, d_s).bound <= bound_degree_simple(1, 1, 1, d_x + 1, d_s).bound
    assert bound_degree_simple(1, 1, 1, d_x, d_s).bound <= bound_degree_simple(1, 1, 1, d_x + 1, d_s + 1).bound
    assert bound_hp(d_x, d_s, 1, 1) <= bound_hp(d_x + 1, d_s + 1, 1, 1)


@pytest.mark.parametrize('seed', range(20))
def test_summed_within_simplified(seed):
    rng = random.Random(seed)
    s = 2 + seed % 2
    k = 1 + seed // 2 % s
    config = BoundConfig(('theorem12', 'prop42')[seed // 4 % 2], ('printed', 'per-j')[seed % 2])
    ci = [_random_polytope(rng, s, 2) for _ in range(k)]
    delta = _grow(rng, _containing(s, *ci), 3)
    report = bound_general(ci, delta, config=config)
    assert report.details['simplified'] is not None
    assert report.bound <= report.details['simplified']


@pytest.mark.parametrize('seed', range(12))
def test_gamma_variants_nested(seed):
    rng = random.Random(seed)
    s = 2 + seed % 3
    k = 1 + seed // 3 % s
    deltas = [_coideal(rng, s, 2 if s < 4 else 1) for _ in range(k)]
    refined, prop42, theorem12 = (
        gamma_polytope(deltas, config=BoundConfig(variant), s=s) for variant in ('refined', 'prop42', 'theorem12')
    )
    assert contains(prop42, refined)
    assert contains(theorem12, prop42)
    if s < 4:
        bounds = [bound_ci(deltas, BoundConfig(v)).bound for v in ('refined', 'prop42', 'theorem12')]
        assert bounds == sorted(bounds)


def test_reduction_degree_term():
    simplex = unit_simplex(2)
    term = reduction_degree_term([simplex, simplex], 1)
    assert term == BoundTerm('2·E_{2,1} V(Δ_1..Δ_1, Δ×1)', 2 * e_const(2, 1), Fraction(1, 2))
    per_j = reduction_degree_term([simplex, simplex], 1, BoundConfig(e_variant='per-j'), 'interpolation')
    assert per_j.value == 26
    with pytest.raises(ValueError, match='k=3 exceeds s=2'):
        reduction_degree_term([simplex, simplex], 3)


def test_bound_hp():
    assert bound_hp(2, 3, 1, 1) == 12
    assert bound_hp(2, 3, 1, 2) == 6912
    assert bound_hp(2, 2, 2, 1) == 2**4 * 2**3
    with pytest.raises(ValueError, match='at least 1'):
        bound_hp(2, 3, 0, 1)


def test_bound_degree_simple():
    report = bound_degree_simple(1, 1, 1, 2, 2, m=1)
    assert report.bound == 120
    assert report.hp_comparison == 8
    assert report.s == 2
    assert bound_degree_simple(1, 1, 1, 2, 2).hp_comparison is None
    with pytest.raises(HypothesisError, match='d_X >= d_S'):
        bound_degree_simple(1, 1, 1, 1, 2)
    with pytest.raises(ValueError, match='need n >= 1'):
        bound_degree_simple(0, 1, 0, 2, 2)


def test_compare_bounds():
    table = compare_bounds(1, 1, 1, 1, range(1, 11))
    assert len(table.rows) == 10
    assert table.rows[1].new == 120
    assert table.rows[1].hp == 8
    assert table.crossover == 31
    assert table.to_dict() == IsDict(
        parameters={'n': '1', 'l': '1', 'k': '1', 'm': '1'},
        rows=IsList(length=10),
        crossover='31',
        config={'gamma_variant': 'theorem12', 'e_variant': 'printed'},
    )
    assert table.rows[0].to_dict() == {'d': '1', 'new': '30', 'hp': '1', 'new_smaller': False}


def test_compare_bounds_no_crossover():
    assert compare_bounds(1, 1, 1, 1, [1, 2], search_limit=10).crossover is None
    with pytest.raises(ValueError, match='nonempty'):
        compare_bounds(1, 1, 1, 1, [])


def test_report_to_dict():
    report = bound_ci([unit_simplex(2)])
    assert report.to_dict() == {
        'statement': IsStr(regex='.*C_{s,k}.*'),
        'config': {'gamma_variant': 'theorem12', 'e_variant': 'printed'},
        's': '2',
        'k': '1',
        'constants': {'C': '6', 'E': None},
        'gamma': {'dim': 2, 'points': [[0, 0], [0, 4], [4, 0]], 'vertices': [[0, 0], [0, 4], [4, 0]]},
        'terms': [{'label': 'C_{2,1} V(Δ_1..Δ_1, Γ×1)', 'weight': '6', 'mixed_volume': '2', 'value': '12'}],
        'trace': [
            {
                'step': '1',
                'factor': '3',
                'envelope': '2',
                'polytope': {'dim': 2, 'points': IsList(length=3), 'vertices': IsList(length=3)},
            }
        ],
        'bound': '12',
        'hp_comparison': None,
        'details': {},
    }


def test_as_json_value():
    assert as_json_value({'a': Fraction(3, 4), 'b': (1, True, None), 'c': GammaVariant.prop42}) == {
        'a': '3/4',
        'b': ['1', True, None],
        'c': 'prop42',
    }
    with pytest.raises(TypeError, match='cannot convert object'):
        as_json_value(object())
