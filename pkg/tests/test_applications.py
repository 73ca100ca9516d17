from fractions import Fraction

import pytest
import sympy as sp
from dirty_equals import IsDict, IsList

from diffbkk import (
    BoundConfig,
    MobiusMap,
    SemiAbelianParams,
    bound_reduction_degree,
    chi_system,
    dilate,
    e_const,
    f_const,
    f_const_proof,
    fs_baselines,
    hull,
    isogeny_bound,
    isogeny_degree_bound,
    minkowski_sum,
    mixed_volume,
    parse_poly,
    semiabelian_bound,
    semiabelian_bound_engine,
    torus_bound,
    torus_dim2_bounds,
    torus_lattice_bound,
)
from diffbkk.applications import ISOGENY_LAYOUT, POINT_COUNT_BASELINE, STATED_ISOGENY_VALUE
from diffbkk.polytope import coordinate_simplex

from .conftest import unit_simplex


def test_f_const_values():
    assert f_const(SemiAbelianParams(N=1, n=1, r=0)) == 18
    assert f_const(SemiAbelianParams(N=2, n=1, r=0, d_A=2, d_X=2)) == 60
    assert f_const(SemiAbelianParams(N=1, n=1, r=0), BoundConfig(e_variant='per-j')) == 14


@pytest.mark.parametrize(
    'params',
    [
        SemiAbelianParams(N=1, n=1, r=0),
        SemiAbelianParams(N=2, n=1, r=1, d_A=2, d_X=3),
        SemiAbelianParams(N=3, n=2, r=1, t=2, d_omega=2, d_X=2),
        SemiAbelianParams(N=2, n=2, r=2, d_omega=3),
        SemiAbelianParams(N=3, n=1, r=0, d_A=2, d_X=2),
    ],
)
def test_f_const_proof_form_and_engine(params):
    assert f_const_proof(params) == f_const(params)
    assert semiabelian_bound_engine(params) == semiabelian_bound(params)


def test_semiabelian_bound():
    assert semiabelian_bound(SemiAbelianParams(N=1, n=1, r=0, d_X=3)) == 54
    assert semiabelian_bound(SemiAbelianParams(N=1, n=1, r=0, t=2, d_X=3)) == 108


@pytest.mark.parametrize(
    'kwargs,msg',
    [
        ({'N': 1, 'n': 2, 'r': 0}, 'need 1 <= n <= N'),
        ({'N': 1, 'n': 0, 'r': 0}, 'need 1 <= n <= N'),
        ({'N': 1, 'n': 1, 'r': -1}, 'must be non-negative'),
        ({'N': 1, 'n': 1, 'r': 0, 't': 0}, 'at least 1'),
        ({'N': 1, 'n': 1, 'r': 0, 'd_A': 2}, 'need 1 <= d_A <= d_X'),
        ({'N': 1, 'n': 1, 'r': 0, 'd_omega': 0}, 'd_omega must be at least 1'),
    ],
)
def test_semiabelian_params_invalid(kwargs, msg):
    with pytest.raises(ValueError, match=msg):
        SemiAbelianParams(**kwargs)


def test_semiabelian_params_dict():
    params = SemiAbelianParams(N=2, n=1, r=1)
    assert params.s == 4
    assert params.to_dict() == {'N': '2', 'n': '1', 'r': '1', 't': '1', 'd_A': '1', 'd_omega': '1', 'd_X': '1'}


def test_torus_bound():
    assert torus_bound(1, 0, Fraction(1, 2)) == 60
    assert torus_bound(1, 0, 3) == 360
    assert torus_lattice_bound(1, 0, Fraction(1, 2)) == 60
    assert torus_lattice_bound(1, 1, 1) == 3 * torus_bound(1, 1, 1)
    with pytest.raises(TypeError, match='must be exact'):
        torus_bound(1, 0, 0.5)
    with pytest.raises(ValueError, match='need n >= 1'):
        torus_bound(0, 0, 1)
    with pytest.raises(ValueError, match='non-negative'):
        torus_bound(1, 0, -1)


def test_torus_dim2_bounds():
    bounds = torus_dim2_bounds(1, d=2)
    assert bounds.baseline == 256
    assert bounds.volume == 2
    assert bounds.degree == 2
    assert bounds.improved == torus_bound(2, 1, 2)
    assert torus_dim2_bounds(1, polytope=hull([(0, 0), (2, 0), (0, 2)])) == bounds
    assert bounds.to_dict() == {'baseline': '256', 'improved': str(bounds.improved), 'volume': '2', 'degree': '2'}


def test_torus_dim2_bounds_zero_rank():
    bounds = torus_dim2_bounds(0, d=3)
    assert bounds.baseline == 1
    assert bounds.volume == Fraction(9, 2)


def test_torus_dim2_bounds_errors():
    with pytest.raises(ValueError, match='a degree or a polytope'):
        torus_dim2_bounds(1)
    with pytest.raises(ValueError, match='polytope in Z\\^2'):
        torus_dim2_bounds(1, polytope=unit_simplex(3))
    with pytest.raises(ValueError, match='at least 1'):
        torus_dim2_bounds(1, d=0)


def test_mobius_map():
    alpha = MobiusMap.parse('1, 2, 3/2, 4')
    assert alpha == MobiusMap(1, 2, Fraction(3, 2), 4)
    assert alpha.to_dict() == {'a': '1', 'b': '2', 'c': '3/2', 'd': '4'}
    assert str(MobiusMap(1, 0, 0, 1)) == '(1z + 0)/(0z + 1)'
    with pytest.raises(ValueError, match='degenerate'):
        MobiusMap.parse('1,2,2,4')
    with pytest.raises(ValueError, match='four comma separated values'):
        MobiusMap.parse('1,2,3')
    with pytest.raises(TypeError, match='exact rational'):
        MobiusMap(1.0, 0, 0, 1)


def test_chi_system():
    polys = chi_system()
    assert len(polys) == 6
    assert polys[0] == parse_poly('y - x', ISOGENY_LAYOUT)
    assert polys[1] == parse_poly('y_1 - x_1', ISOGENY_LAYOUT)
    assert polys[3] == parse_poly('y_3 - x_3', ISOGENY_LAYOUT)
    assert polys[4].degree() == 6
    assert {c for coeff in polys[4].terms.values() for c in coeff.constants()} == {sp.Symbol('c5')}
    assert {c for coeff in polys[5].terms.values() for c in coeff.constants()} == {sp.Symbol('c6')}


def test_chi_system_mobius():
    polys = chi_system(MobiusMap(2, 1, 1, 1))
    assert polys[0] == parse_poly('x*y + y - 2*x - 1', ISOGENY_LAYOUT)
    assert polys[1] == parse_poly('x_1*y + x*y_1 + y_1 - 2*x_1', ISOGENY_LAYOUT)


def test_isogeny_bound():
    report = isogeny_bound()
    assert report.envelope == 13
    assert report.bound == 7_787_520
    assert report.chain_value == report.bound
    assert report.constants == {'C': 2_580_480, 'gamma_multiplier': 3}
    assert all(report.checks.values())
    assert len(report.checks) == 7
    assert report.stated_value == STATED_ISOGENY_VALUE == 4_672_512
    assert report.discrepancy is True
    assert report.ratio == Fraction(3, 5)
    assert report.baseline == POINT_COUNT_BASELINE == 2**24 * 36**7
    assert report.exact_gamma_bound is None


def test_isogeny_bound_theorem12():
    report = isogeny_bound(config=BoundConfig('theorem12'))
    assert report.envelope == 19
    assert report.bound == 16_634_880
    assert report.chain_value == report.bound


def test_isogeny_bound_independent_of_alpha():
    report = isogeny_bound(MobiusMap.parse('2,1,1,1'))
    assert report.bound == 7_787_520
    assert all(report.checks.values())


def test_isogeny_bound_exact_gamma():
    report = isogeny_bound(exact_gamma=True)
    assert report.exact_gamma_bound is not None
    assert 0 < report.exact_gamma_bound <= report.bound


def test_isogeny_report_dict():
    data = isogeny_bound().to_dict()
    assert data == IsDict(
        bound='7787520',
        stated_value='4672512',
        ratio='3/5',
        discrepancy=True,
        envelope='13',
        consts=['c5', 'c6'],
        polys=IsList(length=6),
        newton_polytopes=IsList(length=6),
        alpha={'a': '1', 'b': '0', 'c': '0', 'd': '1'},
        config={'gamma_variant': 'refined', 'e_variant': 'printed'},
    ).settings(partial=True)
    assert data['polys'][0] == '-x + y'


def test_fs_baselines():
    baselines = fs_baselines(2, 1, 1)
    assert baselines.degree == 4**24 * 6**7
    assert baselines.point_count == 2**24 * 36**7
    with pytest.raises(ValueError, match='at least 1'):
        fs_baselines(1, 0, 1)


def test_isogeny_degree_bound_single_equation():
    report = isogeny_degree_bound(1, 2)
    e = e_const(4, 1)
    assert report.s == 4 and report.k == 1
    # V(6Δ_x, Δ, Δ, Δ) = 54 + 27d
    assert report.bound == 4 * e * 108
    assert report.details['coefficients'] == [4 * e * 54, 4 * e * 27]
    assert report.details['leading'] == 4 * e * 27
    assert report.details['G_n'] == 4 * e * 81
    assert report.details['m'] == 1
    assert report.details['fs_baseline'] == fs_baselines(1, 1, 2).degree


def test_isogeny_degree_bound_matches_polarization():
    all_ = coordinate_simplex(4, range(4))
    delta = minkowski_sum(dilate(coordinate_simplex(4, [0]), 2), dilate(all_, 6))
    mv = mixed_volume([dilate(all_, 6), delta, delta, delta])
    assert mv == 108
    assert isogeny_degree_bound(1, 2).bound == 4 * e_const(4, 1) * mv


@pytest.mark.parametrize('e_variant', ['printed', 'per-j'])
def test_isogeny_degree_bound_is_reduction_degree(e_variant):
    config = BoundConfig(e_variant=e_variant)
    all_ = coordinate_simplex(4, range(4))
    delta = minkowski_sum(dilate(coordinate_simplex(4, [0]), 2), dilate(all_, 6))
    general = bound_reduction_degree([dilate(all_, 6)], delta, config=config)
    assert isogeny_degree_bound(1, 2, config).bound == general.bound
    assert general.terms[0].mixed_volume == 108


def test_isogeny_degree_bound_polynomial():
    reports = [isogeny_degree_bound(2, d) for d in (1, 2, 3)]
    coefficients = reports[0].details['coefficients']
    assert len(coefficients) == 3
    assert [r.details['coefficients'] for r in reports] == [coefficients] * 3
    for d, report in zip((1, 2, 3), reports):
        assert report.bound == sum(c * d**i for i, c in enumerate(coefficients))
        assert report.bound <= report.details['G_n'] * d**2
    with pytest.raises(ValueError, match='need n >= 1 and d >= 1'):
        isogeny_degree_bound(1, 0)
