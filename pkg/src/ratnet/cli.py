from ratnet import __version__
from ratnet.approx.classic import Family, approximant_for_budget, convergence_table
from ratnet.approx.ratfun import DEFAULT_GRID, UNIT, Interval, relu, sup_error
from ratnet.approx.zolotarev import relu_approximant
from ratnet.config import ExperimentConfig, apply_env, load_config
from ratnet.constructive.builders import (
    monomial_network, monomial_radius, monomial_size_bound,
    piecewise_network, random_piecewise, ratify_relu_network, relu_reference
)
from ratnet.constructive.network import (
    Layer, RationalNetwork, certify, random_relu_network
)
from ratnet.constructive.taylor import TARGETS, TaylorPlan, taylor_network
from ratnet.errors import ConfigError, RatnetError
from ratnet.nn.activations import ActivationKind
from ratnet.nn.model import DenseRationalNet
from ratnet.nn.targets import make_dataset
from ratnet.nn.training import oscillation, train
from ratnet.storage import save_network, write_frame
from ratnet.ui import show_header, show_summary, show_table
from ratnet.utils.logging_config import init_logging, get_logger

import numpy as np
import pandas as pd

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence


logger = get_logger(__name__)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_ERROR = 2

DEFAULT_BUDGETS = {
    Family.ZOLOTAREV: [7, 14, 21, 28],
    Family.NEWMAN: [21, 35, 53, 75],
    Family.BEST_POLY: [5, 9, 17, 33],
}

# Budget at which the three families are ranked against each other
COMPARE_BUDGET = 14

# Activations trained side by side by train-compare
COMPARED_ACTIVATIONS = (
    ActivationKind.RELU,
    ActivationKind.SINUSOID,
    ActivationKind.RATIONAL,
    ActivationKind.POLYNOMIAL,
)

CONSTRUCT_KINDS = ('monomial', 'piecewise', 'taylor', 'ratify', 'relu-approx')


# -----------------------------------------------------------------------------
# fig1
# -----------------------------------------------------------------------------

def _non_increasing(errors: Sequence[float], strict: bool = False) -> bool:
    pairs = list(zip(errors, errors[1:]))
    if strict:
        return all(b < a for a, b in pairs)
    return all(b <= a for a, b in pairs)


def cmd_fig1(
    out_csv: Path,
    families: Sequence[Family],
    budgets: Optional[Sequence[int]] = None,
    n_grid: int = DEFAULT_GRID
) -> int:
    logger.info(f'fig1: families {[f.value for f in families]} -> {out_csv}')

    tables = [
        convergence_table(family, budgets or DEFAULT_BUDGETS[family], n_grid)
        for family in families
    ]
    frame = pd.concat(tables, ignore_index=True)
    write_frame(frame, out_csv)
    show_table(frame)

    ok = True
    for family, table in zip(families, tables):
        errors = list(table['sup_error'])
        strict = family is Family.ZOLOTAREV
        if not _non_increasing(errors, strict=strict):
            logger.warning(f'{family.value} errors do not decrease: {errors}')
            print(f'{family.value}: errors are not decreasing in budget')
            ok = False

    if len(families) > 1:
        at_budget = {
            family: sup_error(
                relu, approximant_for_budget(family, COMPARE_BUDGET),
                UNIT, n_grid
            ).max_abs_error
            for family in families
        }
        ranked = sorted(at_budget, key=at_budget.get)
        expected = [f for f in Family if f in at_budget]
        show_table(pd.DataFrame(
            [(f.value, at_budget[f]) for f in expected],
            columns=['family', f'sup_error @ {COMPARE_BUDGET} params']
        ))
        if ranked != expected:
            print(f'Ordering at {COMPARE_BUDGET} parameters violated: '
                  f'{[f.value for f in ranked]}')
            ok = False

    print(f'Wrote {len(frame)} rows to {out_csv}')
    return EXIT_OK if ok else EXIT_VIOLATED


# -----------------------------------------------------------------------------
# train-compare
# -----------------------------------------------------------------------------

def cmd_train_compare(config_path: Optional[Path], out_dir: Path) -> int:
    config = (
        load_config(config_path) if config_path
        else apply_env(ExperimentConfig())
    )
    train_config = config.train_config()

    rng = np.random.default_rng(config.seed)
    inputs, targets = make_dataset(config.target, config.n_samples, rng)

    rows, finals = [], {}
    for kind in COMPARED_ACTIVATIONS:
        net = DenseRationalNet.initialize(
            config.architecture, kind, seed=config.seed,
            rational_type=config.rational_type, bound=config.bound
        )
        _, history = train(net, inputs, targets, train_config)
        write_frame(history.to_frame(), out_dir / f'{kind.value}.csv')

        finals[kind] = history.final_val_mse
        rows.append((
            kind.value,
            net.trainable_param_count(),
            history.val_mse[0],
            history.final_val_mse,
            oscillation(history),
            history.rollbacks
        ))

    show_table(pd.DataFrame(rows, columns=[
        'activation', 'params', 'initial_val_mse', 'final_val_mse',
        'oscillation', 'rollbacks'
    ]))

    if finals[ActivationKind.RATIONAL] < finals[ActivationKind.RELU]:
        print('Rational activations beat ReLU on validation MSE')
        return EXIT_OK
    print('Rational activations did NOT beat ReLU on validation MSE')
    return EXIT_VIOLATED


# -----------------------------------------------------------------------------
# construct
# -----------------------------------------------------------------------------

def _single_node(activation) -> RationalNetwork:
    layer = Layer(np.ones((1, 1)), np.zeros(1), (activation,))
    return RationalNetwork(1, (layer,), np.ones((1, 1)), np.zeros(1))


def _report(
    net: RationalNetwork,
    error: float,
    epsilon: float,
    extra: Sequence[tuple[str, object]] = ()
) -> bool:
    passed = error <= epsilon
    show_summary([
        *extra,
        ('size', net.size()),
        ('depth', net.depth()),
        ('relays', net.relay_count()),
        ('params', net.param_count()),
        ('certified error', error),
        ('tolerance', epsilon),
        ('check', 'pass' if passed else 'FAIL'),
    ])
    return passed


def _construct_relu_approx(args: argparse.Namespace) -> tuple[RationalNetwork, bool]:
    approximant = relu_approximant(args.eps)
    error = sup_error(relu, approximant, UNIT, DEFAULT_GRID).max_abs_error
    print(f'k={approximant.stages}, stages={approximant.stages}, '
          f'params={approximant.param_count()}')
    net = _single_node(approximant)
    return net, _report(net, error, args.eps, [('ell', approximant.ell)])


def _construct_monomial(args: argparse.Namespace) -> tuple[RationalNetwork, bool]:
    net = monomial_network(args.n, args.rp)
    x = np.random.default_rng(args.seed).uniform(-2.0, 2.0, size=1000)
    exact = x ** args.n
    error = float(np.max(np.abs(net(x) - exact)) / np.max(np.abs(exact)))
    bound = monomial_size_bound(args.n, args.rp)
    radius = monomial_radius(args.n)
    passed = _report(net, error, 1e-10, [('n', args.n), ('r_P', args.rp),
                                         ('size bound', bound),
                                         ('radius', f'{radius:.4g}')])
    return net, passed and net.size() <= bound


def _construct_piecewise(args: argparse.Namespace) -> tuple[RationalNetwork, bool]:
    rng = np.random.default_rng(args.seed)
    g = random_piecewise(args.m, args.lipschitz, rng)
    net = piecewise_network(g, args.eps)
    report = certify(net, lambda x: g(x[:, 0]), Interval(0.0, 1.0), 10_000)
    stages = net.layers[0].activations[0].stages if net.layers else 0
    return net, _report(net, report.max_abs_error, args.eps, [
        ('breakpoints', args.m), ('L', args.lipschitz),
        ('stages per hinge', stages)
    ])


def _construct_taylor(args: argparse.Namespace) -> tuple[RationalNetwork, bool]:
    target = TARGETS[args.target]
    plan = TaylorPlan.create(target.d, args.order, args.eps)
    net = taylor_network(target.derivatives, target.d, args.order, args.eps)
    report = certify(net, target.function, Interval(0.0, 1.0), 10_000,
                     n_random=1000 if target.d > 1 else 0,
                     rng=np.random.default_rng(args.seed))
    return net, _report(net, report.max_abs_error, args.eps, [
        ('target', args.target), ('d', target.d), ('n', args.order),
        ('N', plan.N)
    ])


def _construct_ratify(args: argparse.Namespace) -> tuple[RationalNetwork, bool]:
    try:
        dims = [int(v) for v in args.dims.split(',')]
    except ValueError:
        raise ConfigError(f'--dims must be comma separated ints: {args.dims}')

    rng = np.random.default_rng(args.seed)
    f = random_relu_network(dims, rng)
    net = ratify_relu_network(f, args.eps, args.schedule)
    reference = relu_reference(f)
    report = certify(net, reference.evaluate, UNIT, 10_000,
                     n_random=1000 if f.input_dim > 1 else 0, rng=rng)
    return net, _report(net, report.max_abs_error, args.eps, [
        ('dims', args.dims), ('ReLU layers', f.depth()),
        ('schedule', args.schedule)
    ])


def cmd_construct(kind: str, args: argparse.Namespace, out_path: Optional[Path]) -> int:
    builders = {
        'relu-approx': _construct_relu_approx,
        'monomial': _construct_monomial,
        'piecewise': _construct_piecewise,
        'taylor': _construct_taylor,
        'ratify': _construct_ratify,
    }
    logger.info(f'construct {kind}: {vars(args)}')
    net, passed = builders[kind](args)
    if out_path is not None:
        save_network(net, out_path)
        print(f'Network written to {out_path}')
    return EXIT_OK if passed else EXIT_VIOLATED


# -----------------------------------------------------------------------------
# Entry point
# -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='ratnet', description='Rational neural networks CLI'
    )
    parser.add_argument(
        '--debug',
        action='store_true',
        help='Enable debug output to console'
    )
    sub = parser.add_subparsers(dest='command', required=True)

    fig1 = sub.add_parser('fig1', help='ReLU approximation error vs parameters')
    fig1.add_argument('--out', type=Path, default=Path('fig1.csv'))
    fig1.add_argument(
        '--families', nargs='+', default=[f.value for f in Family],
        choices=[f.value for f in Family]
    )
    fig1.add_argument(
        '--budgets', nargs='+', type=int, default=None,
        help='Parameter budgets for every family (default: per family)'
    )
    fig1.add_argument('--grid', type=int, default=DEFAULT_GRID)

    compare = sub.add_parser(
        'train-compare', help='Train ReLU/sinusoid/rational/polynomial nets'
    )
    compare.add_argument('--config', type=Path, default=None)
    compare.add_argument('--out-dir', type=Path, default=Path('train_compare'))

    construct = sub.add_parser('construct', help='Build and certify a network')
    construct.add_argument('kind', choices=CONSTRUCT_KINDS)
    construct.add_argument('--eps', type=float, default=None)
    construct.add_argument('--n', type=int, default=9)
    construct.add_argument('--rp', type=int, default=3)
    construct.add_argument('--m', type=int, default=5)
    construct.add_argument('--lipschitz', type=float, default=3.0)
    construct.add_argument('--order', type=int, default=3)
    construct.add_argument('--target', choices=sorted(TARGETS), default='exp')
    construct.add_argument('--dims', default='1,3,3,1')
    construct.add_argument('--schedule', choices=['flat', 'geometric'],
                           default='flat')
    construct.add_argument('--seed', type=int, default=0)
    construct.add_argument('--out', type=Path, default=None)
    return parser


DEFAULT_EPS = {
    'relu-approx': 0.1,
    'monomial': 1e-10,
    'piecewise': 1e-3,
    'taylor': 1e-2,
    'ratify': 0.1,
}


def run(args: argparse.Namespace) -> int:
    match args.command:
        case 'fig1':
            families = [Family(f) for f in args.families]
            return cmd_fig1(args.out, families, args.budgets, args.grid)
        case 'train-compare':
            return cmd_train_compare(args.config, args.out_dir)
        case 'construct':
            if args.eps is None:
                args.eps = DEFAULT_EPS[args.kind]
            return cmd_construct(args.kind, args, args.out)
    raise ConfigError(f'Unknown command {args.command!r}')


def main(argv: Optional[Sequence[str]] = None) -> None:
    parser = build_parser()
    args = parser.parse_args(argv)
    init_logging(
        console_level=logging.DEBUG if args.debug else None,
        file_level=logging.DEBUG
    )

    logger.info('=' * 80)
    logger.info(f'ratnet {args.command} starting')
    logger.info(f'Version: {__version__}')
    logger.info('=' * 80)

    show_header()

    try:
        code = run(args)
    except RatnetError as e:
        logger.exception(f'{args.command} failed: {e}')
        print(f'Error: {e}')
        code = EXIT_ERROR
    except KeyboardInterrupt:
        logger.info(f'{args.command} interrupted (Ctrl+C)')
        code = EXIT_ERROR
    finally:
        logger.info('ratnet is shutting down...')

    sys.exit(code)


if __name__ == '__main__':
    main()
