#!/usr/bin/env python3
"""
Command-line interface

    python3 cli.py analyze --tt 01 --p 0.3
    python3 cli.py verify --n 3 --json report.json
    python3 cli.py search --n 3 --p 0.3 --mode exhaustive
    python3 cli.py sweep --n 3 --mode exhaustive
    python3 cli.py stability --tt 01 --p 0.5 --eps 0.2 --mc 100000
    python3 cli.py moments --tt 0111 --p 0.3 --eps 0.1

Exit codes: 0 success, 1 blocking check failure (verify), 2 usage error.
Logs go to stderr; JSON written to '-' goes to stdout.
"""
import logging
import sys
from dataclasses import dataclass
from typing import Optional

import click

from config import Config
from core import Bias, bias_grid, parse_truth_table
from discord_webhook import DiscordWebhook
from errors import BBLabError
from families import parse_family
from reports import dumps, utc_timestamp, write_json, write_leaderboard_csv
from restriction import Chain
from search import (EXHAUSTIVE, MODES, RANDOM, REFINE, SweepReport, exhaustive_search, p_sweep, random_search,
                    refine_search)
from verify import (ExhaustiveSource, FileSource, RandomSource, analyze_function, moments_report, run_suite,
                    stability_report)

logger = logging.getLogger(__name__)


@dataclass
class Options:
    workers: int
    archive: bool
    db_uri: Optional[str]
    timestamp: bool

    def created(self) -> Optional[str]:
        return utc_timestamp() if self.timestamp else None


class BiasType(click.ParamType):
    name = 'p'

    def convert(self, value, param, ctx):
        if isinstance(value, Bias):
            return value
        try:
            return Bias(value)
        except BBLabError as e:
            self.fail(str(e), param, ctx)


class GridType(click.ParamType):
    """Comma-separated biases"""
    name = 'p-grid'

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        parts = [part for part in str(value).split(',') if part.strip()]
        if not parts:
            self.fail('empty p-grid', param, ctx)
        try:
            return tuple(bias.p for bias in bias_grid(parts))
        except BBLabError as e:
            self.fail(str(e), param, ctx)


BIAS = BiasType()
GRID = GridType()


def _function(tt, family):
    if tt and family:
        raise click.UsageError('Use only one of --tt and --family')
    try:
        if family:
            return parse_family(family)
        if tt:
            return parse_truth_table(tt)
    except BBLabError as e:
        raise click.BadParameter(str(e), param_hint='--family' if family else '--tt')
    raise click.UsageError('One of --tt or --family is required')


def _chain(text, n):
    if not text:
        return None
    try:
        return Chain.parse(text, n)
    except BBLabError as e:
        raise click.BadParameter(str(e), param_hint='--chain')


def _echo_summary(report: dict, keys):
    for key in keys:
        value = report.get(key)
        if isinstance(value, float):
            value = f'{value:.12g}'
        elif isinstance(value, list):
            value = ', '.join(f'{v:.12g}' if isinstance(v, float) else str(v) for v in value)
        click.echo(f'{key:>20}: {value}')


def _emit(report: dict, json_path: Optional[str], summary):
    if json_path:
        write_json(report, json_path)
    if json_path != '-':
        summary(report)


def _archive(opts: Options, report, kind: str):
    if not opts.archive:
        return
    from app import create_app
    from archive import RunArchive

    app = create_app({'SQLALCHEMY_DATABASE_URI': opts.db_uri} if opts.db_uri else None, start_jobs=False)
    with app.app_context():
        archive = RunArchive()
        run_id = archive.save_verification(report) if kind == 'verify' else archive.save_search(report)
    if run_id is not None:
        logger.info(f"Archived as run {run_id}")


@click.group()
@click.option('--log-level', default=Config.LOG_LEVEL, show_default=True,
              type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False))
@click.option('--workers', type=click.IntRange(min=1), envvar='BBLAB_WORKERS', default=Config.WORKERS,
              show_default=True, help='Worker processes for verify/search (env BBLAB_WORKERS)')
@click.option('--archive/--no-archive', default=False, help='Store verify/search runs in the run archive')
@click.option('--db', 'db_uri', default=None, help='Archive database URI (default from config)')
@click.option('--timestamp/--no-timestamp', default=False, help="Fill the report's created field")
@click.pass_context
def cli(ctx, log_level, workers, archive, db_uri, timestamp):
    """p-biased Fourier entropy / influence toolkit"""
    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format=Config.LOG_FORMAT,
        datefmt=Config.LOG_DATEFMT,
        stream=sys.stderr,
        force=True
    )
    ctx.obj = Options(workers=workers, archive=archive, db_uri=db_uri, timestamp=timestamp)


ANALYZE_KEYS = ('tt', 'n', 'p', 'entropy', 'influences', 'total_influence', 'sum_sq_influences', 'min_entropy',
                'support_size', 'ratio', 'theorem_slack', 'conjecture_slack', 'entropy_via_moments',
                'moments_delta')


@cli.command()
@click.option('--tt', help='Truth table (binary, or hex with 0x prefix)')
@click.option('--family', help='Named function, e.g. dictator:3:1, parity:4, majority:3')
@click.option('--file', 'path', type=click.Path(dir_okay=False), help='One truth table per line')
@click.option('--p', 'bias', type=BIAS, required=True)
@click.option('--chain', help='Coordinate chain, e.g. 3,1,2')
@click.option('--json', 'json_path', help="Write JSON report ('-' for stdout)")
def analyze(tt, family, path, bias, chain, json_path):
    """Entropy, influences and slacks of one function (or every function in --file)"""
    if path:
        if tt or family:
            raise click.UsageError('Use --file or --tt/--family, not both')
        try:
            functions = list(FileSource(path))
        except BBLabError as e:
            raise click.BadParameter(str(e), param_hint='--file')
    else:
        functions = [_function(tt, family)]

    reports = [analyze_function(f, bias, _chain(chain, f.n)) for f in functions]

    def summary(_):
        for index, report in enumerate(reports):
            if index:
                click.echo('')
            _echo_summary(report, ANALYZE_KEYS)

    _emit(reports[0] if len(reports) == 1 else reports, json_path, summary)


@cli.command()
@click.option('--n', type=click.IntRange(min=0), help='Exhaustive over all functions on n coordinates')
@click.option('--file', 'path', type=click.Path(dir_okay=False), help='One truth table per line')
@click.option('--random', 'random_count', type=click.IntRange(min=1),
              help='With --n: this many random functions instead of all of them')
@click.option('--p-grid', type=GRID, default=','.join(str(p) for p in Config.DEFAULT_P_GRID), show_default=True)
@click.option('--chain', help='Coordinate chain, e.g. 3,1,2')
@click.option('--seed', type=int, default=Config.DEFAULT_SEED, show_default=True)
@click.option('--json', 'json_path', help="Write JSON report ('-' for stdout)")
@click.pass_obj
def verify(opts, n, path, random_count, p_grid, chain, seed, json_path):
    """Run the identity and inequality suite; exit 1 on blocking failures"""
    if (n is None) == (path is None):
        raise click.UsageError('Exactly one of --n and --file is required')
    try:
        if path:
            source = FileSource(path)
        elif random_count:
            source = RandomSource(n, random_count, seed)
        else:
            source = ExhaustiveSource(n)
    except BBLabError as e:
        raise click.BadParameter(str(e), param_hint='--file' if path else '--n')

    try:
        report = run_suite(source, p_grid, _chain(chain, source.n), seed, opts.workers, created=opts.created())
    except BBLabError as e:
        raise click.UsageError(str(e))

    def summary(data):
        click.echo(f"Suite {data['suite']}: {data['functions']} functions x {len(data['params']['p_grid'])} biases")
        for check in data['checks']:
            status = 'ok' if not check['failures'] else f"{check['failures']} FAILED"
            slack = check['min_slack']
            click.echo(f"  {check['name']:>28}: {status:>10}  min slack {slack:.3e}" if slack is not None
                       else f"  {check['name']:>28}: {status:>10}")

    data = report.to_dict()
    _emit(data, json_path, summary)
    _archive(opts, report, 'verify')
    DiscordWebhook.notify_verification(data)

    if not report.passed:
        logger.error(f"Blocking failures: {report.blocking_failures()}")
        sys.exit(1)


def _search_summary(data):
    parts = data.get('reports', [data])
    for part in parts:
        best = part['best']
        click.echo(f"n={part['n']} p={part['p']}: h(q)={part['h_q']:.12g} q(1-q)={part['proven_constant']:.12g}")
        if best:
            click.echo(f"  min ratio {best['ratio']:.12g} at {best['tt']} "
                       f"(evaluated {part['stats']['evaluated']}, argmin set {len(part['argmin'])})")
        if part['violations']:
            click.echo(f"  {len(part['violations'])} CONJECTURE VIOLATORS", err=True)


def _finish_search(opts, report, json_path, csv_path, timing):
    report.created = opts.created()
    data = report.to_dict(timing=timing)
    _emit(data, json_path, _search_summary)
    if csv_path:
        write_leaderboard_csv(data, csv_path)
    _archive(opts, report, 'search')
    DiscordWebhook.notify_search(data)


@cli.command()
@click.option('--n', type=click.IntRange(min=1), help='Coordinates (exhaustive/random)')
@click.option('--p', 'bias', type=BIAS, help='Single bias')
@click.option('--p-grid', type=GRID, help='Comma-separated biases')
@click.option('--mode', type=click.Choice(MODES), default=EXHAUSTIVE, show_default=True)
@click.option('--samples', type=click.IntRange(min=1), help='Random tables (random mode, or refine start pool)')
@click.option('--seed', type=int, default=Config.DEFAULT_SEED, show_default=True)
@click.option('--top', 'top_k', type=click.IntRange(min=1), default=Config.LEADERBOARD_K, show_default=True)
@click.option('--tt', help='Refine: start table')
@click.option('--budget', type=click.IntRange(min=0), default=1000, show_default=True, help='Refine: flip budget')
@click.option('--dedup-permutations', is_flag=True, help='Exhaustive: one table per permutation orbit')
@click.option('--force-long', is_flag=True, help=f'Allow exhaustive n={Config.LONG_EXHAUSTIVE_MAX_N}')
@click.option('--timing', is_flag=True, help='Include wall time in the report')
@click.option('--json', 'json_path', help="Write JSON report ('-' for stdout)")
@click.option('--csv', 'csv_path', help='Write the leaderboard as CSV')
@click.pass_obj
def search(opts, n, bias, p_grid, mode, samples, seed, top_k, tt, budget, dedup_permutations, force_long,
           timing, json_path, csv_path):
    """Hunt for functions minimizing Ent / sum Inf^2"""
    if bias and p_grid:
        raise click.UsageError('Use only one of --p and --p-grid')
    grid = (bias.p,) if bias else p_grid
    if not grid:
        raise click.UsageError('One of --p or --p-grid is required')
    if mode == RANDOM and not samples:
        raise click.UsageError('--mode random needs --samples')
    if mode == REFINE and not tt and not (n and samples):
        raise click.UsageError('--mode refine needs --tt, or --n with --samples')
    if mode != REFINE and n is None:
        raise click.UsageError(f'--mode {mode} needs --n')

    try:
        if mode == REFINE:
            reports = []
            for p in grid:
                current = Bias(p)
                if tt:
                    start = parse_truth_table(tt)
                else:
                    pool = random_search(n, current, samples, seed, top_k, opts.workers)
                    if pool.best is None:
                        raise click.UsageError('Random start pool drew only constant functions')
                    start = pool.best.function()
                reports.append(refine_search(start, current, budget, seed, top_k))
            report = reports[0] if len(reports) == 1 else SweepReport(reports[0].n, REFINE, seed, reports)
        elif len(grid) > 1:
            report = p_sweep(n, grid, mode, samples, seed, top_k, opts.workers, dedup_permutations, force_long)
        elif mode == RANDOM:
            report = random_search(n, Bias(grid[0]), samples, seed, top_k, opts.workers)
        else:
            report = exhaustive_search(n, Bias(grid[0]), top_k, dedup_permutations, opts.workers, force_long)
    except BBLabError as e:
        raise click.UsageError(str(e))

    _finish_search(opts, report, json_path, csv_path, timing)


@cli.command()
@click.option('--n', type=click.IntRange(min=1), required=True)
@click.option('--p-grid', type=GRID, default=','.join(str(p) for p in Config.DEFAULT_P_GRID), show_default=True)
@click.option('--mode', type=click.Choice([EXHAUSTIVE, RANDOM]), default=EXHAUSTIVE, show_default=True)
@click.option('--samples', type=click.IntRange(min=1), help='Random mode sample count')
@click.option('--seed', type=int, default=Config.DEFAULT_SEED, show_default=True)
@click.option('--top', 'top_k', type=click.IntRange(min=1), default=Config.LEADERBOARD_K, show_default=True)
@click.option('--dedup-permutations', is_flag=True)
@click.option('--force-long', is_flag=True)
@click.option('--timing', is_flag=True)
@click.option('--json', 'json_path', help="Write JSON report ('-' for stdout)")
@click.option('--csv', 'csv_path', help='Write all leaderboards as CSV')
@click.pass_obj
def sweep(opts, n, p_grid, mode, samples, seed, top_k, dedup_permutations, force_long, timing, json_path,
          csv_path):
    """Per-p minimum ratio against the h(q) and q(1-q) reference curves"""
    if mode == RANDOM and not samples:
        raise click.UsageError('--mode random needs --samples')
    try:
        report = p_sweep(n, p_grid, mode, samples, seed, top_k, opts.workers, dedup_permutations, force_long)
    except BBLabError as e:
        raise click.UsageError(str(e))
    _finish_search(opts, report, json_path, csv_path, timing)


@cli.command()
@click.option('--tt', help='Truth table')
@click.option('--family', help='Named function')
@click.option('--p', 'bias', type=BIAS, required=True)
@click.option('--eps', type=float, required=True, help='Resampling rate in [0, 1]')
@click.option('--mc', 'mc_samples', type=click.IntRange(min=1), help='Also estimate by Monte Carlo')
@click.option('--seed', type=int, default=Config.DEFAULT_SEED, show_default=True)
@click.option('--json', 'json_path', help="Write JSON report ('-' for stdout)")
@click.pass_obj
def stability(opts, tt, family, bias, eps, mc_samples, seed, json_path):
    """Noise stability S_eps(f), spectral and optionally Monte Carlo"""
    f = _function(tt, family)
    try:
        report = stability_report(f, bias, eps, mc_samples, seed, opts.workers)
    except BBLabError as e:
        raise click.BadParameter(str(e), param_hint='--eps')
    _emit(report, json_path, lambda data: _echo_summary(data, list(data)))


@cli.command()
@click.option('--tt', help='Truth table')
@click.option('--family', help='Named function')
@click.option('--p', 'bias', type=BIAS, required=True)
@click.option('--eps', type=float, required=True, help='Moment parameter in [0, 0.5)')
@click.option('--chain', help='Coordinate chain, e.g. 3,1,2')
@click.option('--ledger/--no-ledger', default=True, show_default=True,
              help=f'Include the proof ledger (n <= {Config.LEDGER_MAX_N})')
@click.option('--json', 'json_path', help="Write JSON report ('-' for stdout)")
def moments(tt, family, bias, eps, chain, ledger, json_path):
    """epsilon-moments along a chain, increments, telescoping residual and proof ledger"""
    f = _function(tt, family)
    try:
        report = moments_report(f, bias, eps, _chain(chain, f.n), ledger=ledger)
    except BBLabError as e:
        raise click.UsageError(str(e))

    def summary(data):
        click.echo(f"f={data['tt']} p={data['p']} eps={data['eps']} chain={data['chain']}")
        for row in data['moments']:
            click.echo(f"  M[J_{row['k']}] = {row['value']:.15g}   J = {row['alive']}")
        for row in data['increments']:
            click.echo(f"  Delta_{row['k']} (coord {row['coordinate']}) = {row['direct']:.15g}   "
                       f"two-point residual {row['residual']:.2e}")
        click.echo(f"  telescoping residual {data['telescoping_residual']:.2e}")
        if data['ledger']:
            click.echo(dumps(data['ledger']), nl=False)

    _emit(report, json_path, summary)


if __name__ == '__main__':
    cli()
