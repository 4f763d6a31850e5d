"""Command line: ``pinching {se,sweep,oracle,lemma1}``.

Exit status is 0 on success, 2 for a violated precondition or a usage
error, 3 when a post-run check fails and 1 for any other failure.
"""
from __future__ import annotations
import argparse
import logging
from pathlib import Path
import sys
from typing import Dict, List, Optional, Sequence, TextIO

import pandas as pd

from . import __version__
from .asymptotics import lemma1_table
from .beamforming import Scheme
from .errors import CheckFailure, PinchingError, PreconditionError
from .experiments import (FLOAT_FORMAT, SCENARIOS, STRATEGIES, RunOptions, SweepTable,
                          custom_sweep, enforce_checks, plot_script, replay, run_scenario)
from .metrics import se_centralized_exact, se_distributed, se_general
from .model import drop_seed, load_config, sample_users
from .oracle import QuadratureScheme, QuadratureSpec, oracle_report

__all__ = [
    'EXIT_OK',
    'EXIT_FAILURE',
    'EXIT_PRECONDITION',
    'EXIT_CHECK',
    'setup_logging',
    'build_parser',
    'run_cli',
    'main',
]

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PRECONDITION = 2
EXIT_CHECK = 3

# command-line flag -> config file key
OVERRIDES = {
    'n': 'n', 'd': 'd', 'D': 'D', 'L': 'L', 'fc_hz': 'fc_hz',
    'n_eff': 'n_eff', 'noise_dbm': 'noise_dbm', 'pt_dbm': 'pt_dbm', 'seed': 'seed',
}

def setup_logging(verbosity: int = 0) -> None:
    """WARNING by default, INFO with ``-v``, DEBUG with ``-vv``; on stderr."""
    level = logging.WARNING if verbosity <= 0 else (
        logging.INFO if verbosity == 1 else logging.DEBUG)
    logging.basicConfig(
        stream=sys.stderr, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    logging.getLogger().setLevel(level)

def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    system = common.add_argument_group('System configuration')
    system.add_argument('--config', type=Path, help='key=value config file')
    system.add_argument('--n', type=int, help='waveguides, users and PAs')
    system.add_argument('--d', type=float, help='waveguide spacing, m')
    system.add_argument('--D', type=float, help='waveguide height, m')
    system.add_argument('--L', type=float, help='waveguide length, m')
    system.add_argument('--fc-hz', type=float, help='carrier frequency, Hz')
    system.add_argument('--n-eff', type=float, help='effective refractive index')
    system.add_argument('--noise-dbm', type=float, help='noise power, dBm')
    system.add_argument('--pt-dbm', type=float, help='transmit power, dBm')
    system.add_argument('--seed', type=int, help='master seed')
    output = common.add_argument_group('Output')
    output.add_argument('--out', type=Path, help='CSV file; standard output if omitted')
    output.add_argument('--plot-script', type=Path,
                        help='also write a matplotlib script plotting --out')
    output.add_argument('--threads', type=int,
                        help='worker threads, capped by PINCH_SE_THREADS')
    output.add_argument('-v', '--verbose', action='count', default=0,
                        help='-v for progress, -vv for debugging output')
    return common

def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog='pinching', allow_abbrev=False,
        description='Spectral efficiency of pinching-antenna downlinks.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', required=True)

    se = commands.add_parser('se', parents=[common], allow_abbrev=False,
                             help='SE of one sampled drop')
    se.add_argument('--strategy', choices=('centralized', 'distributed', 'general'),
                    default='distributed')
    se.add_argument('--beamformer', choices=[s.value for s in Scheme], default='mrt')
    se.add_argument('--i', type=int, dest='i_users', help='users served at once (general)')
    se.add_argument('--q', type=int, dest='q_pas', help='PAs per user (general)')
    se.add_argument('--independent-y', action='store_true',
                    help='draw every user\'s y separately instead of one shared y')

    sweep = commands.add_parser('sweep', parents=[common], allow_abbrev=False,
                                help='figure scenario or custom sweep')
    source = sweep.add_mutually_exclusive_group(required=True)
    source.add_argument('--figure', choices=list(SCENARIOS))
    source.add_argument('--axis', action='append', metavar='KEY=V1,V2,...',
                        help='custom sweep axis over a config key; repeatable')
    source.add_argument('--replay', type=Path, metavar='CSV',
                        help='re-run a table from its embedded provenance')
    sweep.add_argument('--strategies', default='distributed-mrt',
                       help=f'custom sweep strategies from {", ".join(STRATEGIES)}')
    sweep.add_argument('--drops', type=int, default=100, help='Monte-Carlo drops per cell')
    sweep.add_argument('--step', type=float, default=5.0, help='P_t grid step, dB')
    sweep.add_argument('--strict', action='store_true',
                       help='advisory check failures also fail the run')

    oracle = commands.add_parser('oracle', parents=[common], allow_abbrev=False,
                                 help='quadrature audit of the interference approximation')
    oracle.add_argument('--scheme', choices=[s.value for s in QuadratureScheme],
                        default='simpson')
    oracle.add_argument('--max-step', type=float, help='initial quadrature step, m')

    commands.add_parser('lemma1', parents=[common], allow_abbrev=False,
                        help='T factor and approximate interference of every pair')
    return parser

def _overrides(args: argparse.Namespace) -> Dict[str, str]:
    values = {}
    for attr, key in OVERRIDES.items():
        value = getattr(args, attr)
        if value is not None:
            values[key] = str(value) if isinstance(value, int) else repr(value)
    return values

def _emit(frame: pd.DataFrame, out: Optional[Path], stream: TextIO) -> None:
    if out is None:
        frame.to_csv(stream, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        return
    with open(out, 'w', newline='', encoding='utf-8') as f:
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    logger.info('Wrote %s', out)

def _companion(path: Path, part: str) -> Path:
    return path.with_name(f'{path.stem}-{part}{path.suffix}')

def _emit_tables(tables: Sequence[SweepTable], args: argparse.Namespace,
                 stream: TextIO) -> None:
    for j, table in enumerate(tables):
        out = args.out
        if out is not None and j > 0:
            out = _companion(out, table.metadata.get('part', str(j)))
        if out is None:
            table.write(stream)
        else:
            table.to_csv(out)
        if args.plot_script is not None:
            script = args.plot_script if j == 0 else _companion(
                args.plot_script, table.metadata.get('part', str(j)))
            script.write_text(plot_script(table, out), encoding='utf-8')
            logger.info('Wrote %s', script)

def _run_se(args: argparse.Namespace, stream: TextIO) -> None:
    cfg, seed = load_config(args.config, _overrides(args))
    drop = sample_users(cfg, drop_seed(seed, 0), worst_case_y=not args.independent_y)
    if args.strategy == 'centralized':
        result = se_centralized_exact(drop, cfg)
    elif args.strategy == 'distributed':
        result = se_distributed(drop, cfg, Scheme(args.beamformer))
    else:
        if args.i_users is None or args.q_pas is None:
            raise PreconditionError('--strategy general needs --i and --q')
        result = se_general(drop, cfg, args.i_users, args.q_pas)
    record = result.to_record(pt_dbm=cfg.pt_dbm, seed=seed)
    _emit(pd.DataFrame([record]), args.out, stream)

def _parse_axis(text: str) -> tuple:
    key, sep, raw = text.partition('=')
    if not sep or not raw:
        raise PreconditionError(f'Axis {text!r} is not KEY=V1,V2,...')
    try:
        return key.strip(), [float(v) for v in raw.split(',')]
    except ValueError:
        raise PreconditionError(f'Axis {key!r} has a non-numeric value in {raw!r}') from None

def _run_sweep(args: argparse.Namespace, stream: TextIO) -> None:
    if args.plot_script is not None and args.out is None:
        raise PreconditionError('--plot-script needs --out for the CSV it plots')
    if args.replay is not None:
        table = replay(SweepTable.from_csv(args.replay), args.threads)
        tables = [table]
    else:
        defaults = SCENARIOS[args.figure].defaults if args.figure else {}
        cfg, seed = load_config(args.config, _overrides(args), defaults)
        options = RunOptions(seed, args.drops, args.step, args.threads)
        if args.figure:
            tables = run_scenario(args.figure, cfg, options)
        else:
            axes = dict(_parse_axis(text) for text in args.axis)
            strategies = [s.strip() for s in args.strategies.split(',') if s.strip()]
            tables = [custom_sweep(cfg, axes, strategies, options)]
    _emit_tables(tables, args, stream)
    enforce_checks(tables, args.strict)

def _run_oracle(args: argparse.Namespace, stream: TextIO) -> None:
    cfg, _ = load_config(args.config, _overrides(args))
    spec = QuadratureSpec(max_step=args.max_step, scheme=QuadratureScheme(args.scheme))
    _emit(oracle_report(cfg, spec), args.out, stream)

def _run_lemma1(args: argparse.Namespace, stream: TextIO) -> None:
    cfg, _ = load_config(args.config, _overrides(args))
    _emit(lemma1_table(cfg), args.out, stream)

COMMANDS = {
    'se': _run_se,
    'sweep': _run_sweep,
    'oracle': _run_oracle,
    'lemma1': _run_lemma1,
}

def run_cli(argv: Optional[List[str]] = None, stream: Optional[TextIO] = None) -> int:
    """Parse ``argv``, run the command and return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    setup_logging(args.verbose)
    try:
        COMMANDS[args.command](args, sys.stdout if stream is None else stream)
    except PreconditionError as exc:
        logger.error('Precondition violated: %s', exc)
        return EXIT_PRECONDITION
    except CheckFailure as exc:
        logger.error('%s', exc)
        return EXIT_CHECK
    except (PinchingError, OSError) as exc:
        logger.error('%s', exc)
        return EXIT_FAILURE
    return EXIT_OK

def main() -> None:
    sys.exit(run_cli())
