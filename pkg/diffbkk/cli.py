import argparse
import json
import logging
import sys
from fractions import Fraction
from math import factorial
from pathlib import Path
from textwrap import dedent
from typing import Any, Callable, Dict, List, NamedTuple, NoReturn, Optional, Sequence

from .applications import (
    MobiusMap,
    SemiAbelianParams,
    f_const,
    f_const_proof,
    fs_baselines,
    isogeny_bound,
    isogeny_degree_bound,
    semiabelian_bound,
    semiabelian_bound_engine,
    torus_bound,
    torus_dim2_bounds,
    torus_lattice_bound,
)
from .bounds import (
    BoundConfig,
    EVariant,
    GammaVariant,
    HypothesisError,
    as_json_value,
    bound_ci,
    bound_degree_simple,
    bound_general,
    bound_hp,
    bound_kushnirenko,
    bound_reduction_degree,
    compare_bounds,
)
from .diffpoly import eliminate_linear, tau_containment, tau_system
from .mixedvol import Algorithm, Entry, FormalCombination, bkk_count, compute_mixed_volume
from .parse import format_poly, format_system, parse_system
from .polytope import LatticePolytope, dilate, from_json, hull, is_coideal, minkowski_sum, volume
from .version import VERSION

logger = logging.getLogger('diffbkk.cli')


class Result(NamedTuple):
    data: Dict[str, Any]
    text: Optional[str] = None


Handler = Callable[[argparse.Namespace], Result]


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(1, f'{self.prog}: error: {message}\n')


def _read_json(path: str) -> Any:
    return json.loads(Path(path).read_text())


def _read_polytope(path: str) -> LatticePolytope:
    return from_json(_read_json(path))


def _read_entry(path: str) -> Entry:
    obj = _read_json(path)
    if isinstance(obj, dict) and 'blocks' in obj:
        return FormalCombination.from_json(obj)
    return from_json(obj)


def _config(args: argparse.Namespace, default_gamma: GammaVariant = GammaVariant.theorem12) -> BoundConfig:
    return BoundConfig(args.gamma_variant or default_gamma, args.e_variant)


def _degrees(text: str) -> List[int]:
    if '-' in text:
        first, last = text.split('-', 1)
        return list(range(int(first), int(last) + 1))
    return [int(d) for d in text.split(',')]


def _polytope_hull(args: argparse.Namespace) -> Result:
    obj = _read_json(args.file)
    points = obj['points'] if isinstance(obj, dict) else obj
    p = hull(points)
    return Result({'polytope': p, 'affine_dim': p.dim, 'facets': list(p.facets), 'volume': volume(p)})


def _polytope_sum(args: argparse.Namespace) -> Result:
    total = _read_polytope(args.files[0])
    for path in args.files[1:]:
        total = minkowski_sum(total, _read_polytope(path))
    return Result({'polytope': total})


def _polytope_dilate(args: argparse.Namespace) -> Result:
    return Result({'polytope': dilate(_read_polytope(args.file), args.factor), 'factor': args.factor})


def _polytope_volume(args: argparse.Namespace) -> Result:
    p = _read_polytope(args.file)
    return Result({'volume': volume(p), 'affine_dim': p.dim})


def _polytope_coideal(args: argparse.Namespace) -> Result:
    return Result({'coideal': is_coideal(_read_polytope(args.file))})


def _mixedvol(args: argparse.Namespace) -> Result:
    entries = [_read_entry(path) for path in args.files]
    value, algorithm = compute_mixed_volume(entries, args.algorithm)
    count = value * factorial(len(entries))
    bkk = count.numerator if count.denominator == 1 else None
    return Result({'mixed_volume': value, 'bkk': bkk, 'algorithm': algorithm, 's': len(entries)})


def _bkk(args: argparse.Namespace) -> Result:
    entries = [_read_entry(path) for path in args.files]
    return Result({'bkk_count': bkk_count(entries, args.algorithm), 's': len(entries)})


def _tau(args: argparse.Namespace) -> Result:
    system = parse_system(Path(args.file).read_text())
    tau = tau_system(system.polys)
    data = {
        'layout': tau.layout.to_dict(),
        'consts': list(system.constants),
        'polys': [format_poly(p) for p in tau.polys],
        'containment': [tau_containment(p) for p in system.polys],
    }
    return Result(data, format_system(tau.layout, tau.polys, system.constants))


def _eliminate(args: argparse.Namespace) -> Result:
    system = parse_system(Path(args.file).read_text())
    resultant = eliminate_linear(system.polys)
    data = {'layout': resultant.layout.to_dict(), 'consts': list(system.constants), 'resultant': format_poly(resultant)}
    return Result(data, format_system(resultant.layout, [resultant], system.constants))


def _bound_ci(args: argparse.Namespace) -> Result:
    deltas = [_read_polytope(path) for path in args.deltas]
    return Result(bound_ci(deltas, _config(args), algorithm=args.algorithm).to_dict())


def _bound_general(args: argparse.Namespace) -> Result:
    ci = [_read_polytope(path) for path in args.ci]
    report = bound_general(ci, _read_polytope(args.delta), config=_config(args), algorithm=args.algorithm)
    return Result(report.to_dict())


def _bound_kushnirenko(args: argparse.Namespace) -> Result:
    return Result(bound_kushnirenko(_read_polytope(args.delta), args.k, _config(args)).to_dict())


def _bound_degree(args: argparse.Namespace) -> Result:
    ci = [_read_polytope(path) for path in args.ci]
    report = bound_reduction_degree(ci, _read_polytope(args.delta), config=_config(args), algorithm=args.algorithm)
    return Result(report.to_dict())


def _bound_simple(args: argparse.Namespace) -> Result:
    report = bound_degree_simple(args.n, args.l, args.k, args.d_x, args.d_s, _config(args), args.m)
    return Result(report.to_dict())


def _bound_hp(args: argparse.Namespace) -> Result:
    return Result({'bound': bound_hp(args.deg_x, args.deg_s, args.m, args.l)})


def _app_semiabelian(args: argparse.Namespace) -> Result:
    params = SemiAbelianParams(args.N, args.n, args.r, args.t, args.d_a, args.d_omega, args.d_x)
    config = _config(args)
    return Result(
        {
            'params': params.to_dict(),
            'config': config.to_dict(),
            'f_const': f_const(params, config),
            'f_const_proof': f_const_proof(params, config),
            'bound': semiabelian_bound(params, config),
            'engine': semiabelian_bound_engine(params, config),
        }
    )


def _volume_arg(args: argparse.Namespace) -> Fraction:
    if args.polytope:
        return volume(_read_polytope(args.polytope))
    if args.vol is None:
        raise ValueError('either --vol or --polytope is required')
    return Fraction(args.vol)


def _app_torus(args: argparse.Namespace) -> Result:
    vol = _volume_arg(args)
    return Result({'n': args.n, 'r': args.r, 'volume': vol, 'bound': torus_bound(args.n, args.r, vol, _config(args))})


def _app_torus2(args: argparse.Namespace) -> Result:
    vol = _volume_arg(args)
    bound = torus_lattice_bound(args.n, args.r, vol, _config(args))
    return Result({'n': args.n, 'r': args.r, 'volume': vol, 'bound': bound})


def _app_torus_dim2(args: argparse.Namespace) -> Result:
    polytope = _read_polytope(args.polytope) if args.polytope else None
    return Result(dict(torus_dim2_bounds(args.r, args.d, polytope, _config(args)).to_dict(), r=args.r))


def _app_isogeny(args: argparse.Namespace) -> Result:
    alpha = MobiusMap.parse(args.alpha)
    report = isogeny_bound(alpha, _config(args, GammaVariant.refined), exact_gamma=args.exact_gamma)
    return Result(report.to_dict())


def _app_isogeny_degree(args: argparse.Namespace) -> Result:
    return Result(isogeny_degree_bound(args.n, args.d, _config(args), args.m).to_dict())


def _app_fs_baseline(args: argparse.Namespace) -> Result:
    return Result(fs_baselines(args.n, args.m, args.deg_v).to_dict())


def _compare(args: argparse.Namespace) -> Result:
    table = compare_bounds(args.n, args.l, args.k, args.m, _degrees(args.degrees), _config(args))
    return Result(table.to_dict())


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '--format', default='text', choices=['text', 'json'], help='Output format, defaults to "text"'
    )
    common.add_argument('--out', type=str, help='Write the report to this path instead of standard output')
    common.add_argument(
        '--gamma-variant',
        choices=[v.value for v in GammaVariant],
        help='Multiple of the all-coordinates simplex in Γ, defaults to "theorem12" ("refined" for "app isogeny")',
    )
    common.add_argument(
        '--e-variant', default='printed', choices=[v.value for v in EVariant], help='Form of E_{s,k}'
    )
    common.add_argument(
        '--algorithm',
        default='auto',
        choices=[a.value for a in Algorithm],
        help='Mixed volume algorithm, defaults to "auto"',
    )
    common.add_argument('--verbose', action='store_true', help='Set log level to "debug", wins over `--verbosity`')
    common.add_argument(
        '--verbosity',
        default='warning',
        choices=['warning', 'info', 'debug'],
        help='Log level, defaults to "warning"',
    )
    return common


def _add(
    group: Any, name: str, handler: Handler, common: argparse.ArgumentParser, help_: str
) -> argparse.ArgumentParser:
    p = group.add_parser(name, parents=[common], help=help_)
    p.set_defaults(handler=handler)
    return p


def _group(sub: Any, name: str, help_: str) -> Any:
    return sub.add_parser(name, help=help_).add_subparsers(dest='action', required=True, parser_class=_Parser)


def _add_polytope(sub: Any, common: argparse.ArgumentParser) -> None:
    group = _group(sub, 'polytope', 'Lattice polytope operations')
    _add(group, 'hull', _polytope_hull, common, 'Convex hull of a point set').add_argument('file')
    _add(group, 'sum', _polytope_sum, common, 'Minkowski sum').add_argument('files', nargs='+')
    p = _add(group, 'dilate', _polytope_dilate, common, 'Integer dilation')
    p.add_argument('file')
    p.add_argument('--factor', type=int, required=True)
    _add(group, 'volume', _polytope_volume, common, 'Euclidean volume').add_argument('file')
    _add(group, 'coideal', _polytope_coideal, common, 'Co-ideal test').add_argument('file')


def _add_bound(sub: Any, common: argparse.ArgumentParser) -> None:
    group = _group(sub, 'bound', 'Bounds on the number of solutions')
    _add(group, 'ci', _bound_ci, common, 'Complete intersection bound').add_argument('deltas', nargs='+')
    for name, handler, help_ in (
        ('general', _bound_general, 'General bound, summed and simplified'),
        ('degree', _bound_degree, 'Degree of the reduction'),
    ):
        p = _add(group, name, handler, common, help_)
        p.add_argument('--ci', nargs='*', default=[], help='Newton polytopes of the complete intersection')
        p.add_argument('--delta', required=True, help='Polytope containing every equation')
    p = _add(group, 'kushnirenko', _bound_kushnirenko, common, 'E_{s,k} Vol(Δ)')
    p.add_argument('--delta', required=True)
    p.add_argument('--k', type=int, required=True)
    p = _add(group, 'simple', _bound_simple, common, 'E_{s,k} d_X^n d_S^{nl}')
    for flag in ('--n', '--l', '--k', '--d-x', '--d-s'):
        p.add_argument(flag, type=int, required=True)
    p.add_argument('--m', type=int, help='dim X, adds the doubly exponential comparison')
    p = _add(group, 'hp', _bound_hp, common, 'Doubly exponential baseline')
    for flag in ('--deg-x', '--deg-s', '--m', '--l'):
        p.add_argument(flag, type=int, required=True)


def _add_app(sub: Any, common: argparse.ArgumentParser) -> None:
    group = _group(sub, 'app', 'Diophantine applications')
    p = _add(group, 'semiabelian', _app_semiabelian, common, 'Semi-abelian lattice point bound')
    for flag in ('--N', '--n', '--r'):
        p.add_argument(flag, type=int, required=True)
    for flag in ('--t', '--d-a', '--d-omega', '--d-x'):
        p.add_argument(flag, type=int, default=1)
    for name, handler, help_ in (
        ('torus', _app_torus, 'Torus bound'),
        ('torus2', _app_torus2, 'Lattice bound on the torus'),
    ):
        p = _add(group, name, handler, common, help_)
        p.add_argument('--n', type=int, required=True)
        p.add_argument('--r', type=int, required=True)
        p.add_argument('--vol', type=str, help='Volume of Δ, an integer or p/q')
        p.add_argument('--polytope', type=str, help='Polytope JSON whose volume is used')
    p = _add(group, 'torus-dim2', _app_torus_dim2, common, 'Baseline and improved bound in dimension two')
    p.add_argument('--r', type=int, required=True)
    p.add_argument('--d', type=int)
    p.add_argument('--polytope', type=str)
    p = _add(group, 'isogeny', _app_isogeny, common, 'Isogeny count for the χ-system')
    p.add_argument('--alpha', default='1,0,0,1', help='Möbius map coefficients a,b,c,d')
    p.add_argument('--exact-gamma', action='store_true', help='Also evaluate the exact Γ')
    p = _add(group, 'isogeny-degree', _app_isogeny_degree, common, 'Degree bound with its polynomial in d')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--d', type=int, required=True)
    p.add_argument('--m', type=int)
    p = _add(group, 'fs-baseline', _app_fs_baseline, common, 'Earlier isogeny estimates')
    for flag in ('--n', '--m', '--deg-v'):
        p.add_argument(flag, type=int, required=True)


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = _Parser(
        prog='diffbkk',
        description=dedent((cli.__doc__ or '').strip('\n')),
        formatter_class=argparse.RawTextHelpFormatter,
    )
    parser.add_argument('--version', '-V', action='version', version=f'%(prog)s v{VERSION}')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)
    _add_polytope(sub, common)
    _add(sub, 'mixedvol', _mixedvol, common, 'Mixed volume').add_argument('files', nargs='+')
    _add(sub, 'bkk', _bkk, common, 'BKK count s!·V').add_argument('files', nargs='+')
    _add(sub, 'tau', _tau, common, 'First-order τ system of a system file').add_argument('file')
    _add(sub, 'eliminate', _eliminate, common, 'Eliminate the ζ^(1) block').add_argument('file')
    _add_bound(sub, common)
    _add_app(sub, common)
    p = _add(sub, 'compare', _compare, common, 'New bound against the doubly exponential one')
    for flag in ('--n', '--l', '--k', '--m'):
        p.add_argument(flag, type=int, required=True)
    p.add_argument('--degrees', default='1-10', help='"first-last" or a comma separated list, defaults to "1-10"')
    return parser


def _text_lines(data: Any, prefix: str = '') -> List[str]:
    if isinstance(data, dict) and not ('points' in data and 'vertices' in data):
        lines = []
        for key in sorted(data):
            lines += _text_lines(data[key], f'{prefix}.{key}' if prefix else key)
        return lines
    value = data if isinstance(data, str) else json.dumps(data, sort_keys=True)
    return [f'{prefix}: {value}']


def render(result: Result, fmt: str) -> str:
    data = as_json_value(result.data)
    if fmt == 'json':
        return json.dumps(data, sort_keys=True, indent=2) + '\n'
    if result.text is not None:
        return result.text
    return '\n'.join(_text_lines(data)) + '\n'


def _setup_logging(args: argparse.Namespace) -> None:
    if args.verbose:
        log_level = logging.DEBUG
    else:
        log_level = getattr(logging, args.verbosity.upper())

    pkg_logger = logging.getLogger('diffbkk')
    for old in [h for h in pkg_logger.handlers if h.get_name() == 'diffbkk.cli']:
        pkg_logger.removeHandler(old)
    hdlr = logging.StreamHandler()
    hdlr.set_name('diffbkk.cli')
    hdlr.setLevel(log_level)
    hdlr.setFormatter(logging.Formatter(fmt='[%(asctime)s] %(message)s', datefmt='%H:%M:%S'))
    pkg_logger.addHandler(hdlr)
    pkg_logger.setLevel(log_level)


def run(argv: Sequence[str]) -> int:
    """
    Run one invocation and return its exit code: `0` on success, `1` for invalid input and `2` when a hypothesis of
    the requested bound does not hold.
    """
    args = build_parser().parse_args(list(argv))
    _setup_logging(args)
    logger.debug('diffbkk v%s %s', VERSION, ' '.join(argv))
    try:
        result = args.handler(args)
    except HypothesisError as e:
        print(f'hypothesis violated: {e}', file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError, ArithmeticError) as e:
        print(f'invalid input: {e}', file=sys.stderr)
        return 1
    except OSError as e:
        print(f'cannot read input: {e}', file=sys.stderr)
        return 1

    output = render(result, args.format)
    if args.out:
        Path(args.out).write_text(output)
        logger.info('report written to "%s"', args.out)
    else:
        sys.stdout.write(output)
    return 0


def cli(*args_: str) -> None:
    """
    Exact Bezout and BKK type bounds for algebraic-differential systems.

    Example of the BKK count of two polytopes:

        diffbkk bkk a.json b.json

    Example of the isogeny bound as JSON:

        diffbkk app isogeny --alpha 1,2,3,4 --format json
    """
    args = args_ or sys.argv[1:]
    code = run(args)
    if code:
        sys.exit(code)
