"""
Command-line interface: one click group, one subcommand per library operation.
Results go to stdout (CSV or JSON, floats at 17 significant digits); diagnostics go to stderr.
"""
import csv
import json
import math
import logging
import sys
from dataclasses import dataclass, replace
from typing import Any, List, Optional, Tuple

import click
import numpy as np

import config
from analysis import NAMED_FUNCTIONS, DEFAULT_SWEEP_VALUES, convergence_order, error_stats, sweep_power
from errors import GridMismatch, TrigSplineError, ValidationError
from factors import FactorKind, TailControl, interpolation_factors
from grid import TWO_PI, make_grid
from performance import PerformanceMonitor
from polyoracle import build_cubic_periodic, build_linear, moments_via_trigspline
from power import power_spline_series
from spline import SplineSpec, build_spline, eval_spline, sample_period
from trigpoly import SampleSet, dft_coeffs

# Configure logging
logger = logging.getLogger(__name__)

# Tolerance for matching CSV t values against grid nodes
NODE_MATCH_TOL = 1e-9

# Ranges this close to one period are evaluated on the full-period grid
PERIOD_SNAP_TOL = 1e-6


@dataclass
class RunConfig:
    """Options shared by every subcommand"""
    log_level: Optional[str] = None
    tail_rel_tol: Optional[float] = None
    tail_max_terms: Optional[int] = None

    def tail(self) -> TailControl:
        tail = TailControl()
        if self.tail_rel_tol is not None:
            tail = replace(tail, rel_tol=self.tail_rel_tol)
        if self.tail_max_terms is not None:
            tail = replace(tail, max_terms=self.tail_max_terms)
        return tail


# Formatting

def format_number(value: Any) -> str:
    """Fixed 17-significant-digit rendering; non-finite values become null"""
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if not math.isfinite(value):
        return 'null'
    return format(value, '.17g')


def to_json(obj: Any) -> str:
    """Deterministic JSON; keys keep insertion order"""
    if obj is None:
        return 'null'
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return '{' + ', '.join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + '}'
    if isinstance(obj, (list, tuple, np.ndarray)):
        return '[' + ', '.join(to_json(v) for v in obj) + ']'
    return format_number(obj)


def emit_csv(header: List[str], rows: List[Tuple[Any, ...]]) -> None:
    click.echo(','.join(header))
    for row in rows:
        click.echo(','.join(cell if isinstance(cell, str) else format_number(cell) for cell in row))


# Input

def load_spec(path: str, cfg: RunConfig) -> Tuple[SplineSpec, Optional[int]]:
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            data = json.load(handle)
    except json.JSONDecodeError as e:
        raise ValidationError(f"Spec file {path} is not valid JSON: {str(e)}")
    if not isinstance(data, dict):
        raise ValidationError(f"Spec file {path} must hold a JSON object")

    N = data.get('N')
    return SplineSpec.from_dict(data, tail=cfg.tail()), (int(N) if N is not None else None)


def read_values(path: str, indicator: int, expected_N: Optional[int] = None) -> SampleSet:
    """Samples from CSV with a header row: either `t,value` or `value` columns"""
    with open(path, 'r', encoding='utf-8', newline='') as handle:
        reader = csv.DictReader(handle)
        columns = [name.strip() for name in (reader.fieldnames or [])]
        if 'value' not in columns:
            raise ValidationError(f"{path}: header must contain a 'value' column, got {columns}")
        rows = [{key.strip(): (val or '').strip() for key, val in row.items() if key is not None} for row in reader]

    try:
        values = [float(row['value']) for row in rows]
        times = [float(row['t']) for row in rows] if 't' in columns else None
    except ValueError as e:
        raise ValidationError(f"{path}: {str(e)}")

    N = len(values)
    if expected_N is not None and expected_N != N:
        raise GridMismatch(f"Spec declares N={expected_N} but {path} has {N} samples")
    grid = make_grid(N, indicator)

    if times is not None:
        mismatch = np.abs(np.asarray(times) - grid.nodes)
        if np.any(mismatch > NODE_MATCH_TOL):
            i = int(np.argmax(mismatch))
            raise GridMismatch(f"{path}: t={times[i]!r} in row {i + 1} is not node {grid.node(i + 1)!r} "
                               f"of grid N={N}, I={indicator}")

    return SampleSet(grid, values)


def _run(name: str, action) -> None:
    """Execute a command body, mapping library errors to exit codes"""
    try:
        with PerformanceMonitor.timed(f"cli.{name}"):
            action()
    except TrigSplineError as e:
        logger.error(f"Error running {name}: {str(e)}")
        click.echo(f"error: {e}", err=True)
        sys.exit(e.exit_code)
    except OSError as e:
        logger.error(f"Error running {name}: {str(e)}")
        click.echo(f"error: {e}", err=True)
        sys.exit(2)


# Commands

@click.group()
@click.option('--log-level', default=None, help='Logging level (default from TRIGSPLINE_LOG_LEVEL).')
@click.option('--tail-tol', type=float, default=None, help='Relative tolerance for alias tails.')
@click.option('--tail-max-terms', type=int, default=None, help='Budget of alias indices per tail.')
@click.pass_context
def cli(ctx, log_level, tail_tol, tail_max_terms):
    """Trigonometric interpolation splines."""
    config.configure_logging(log_level)
    ctx.obj = RunConfig(log_level=log_level, tail_rel_tol=tail_tol, tail_max_terms=tail_max_terms)


@cli.command()
@click.option('--N', 'N', type=int, required=True, help='Odd node count.')
@click.option('--indicator', type=int, default=0, show_default=True, help='Grid indicator 0 or 1.')
def nodes(N, indicator):
    """Print the grid nodes, one per line."""
    def action():
        for t in make_grid(N, indicator).nodes:
            click.echo(format_number(t))
    _run('nodes', action)


@cli.command()
@click.option('--in', 'in_path', required=True, help='Samples CSV.')
@click.option('--indicator', type=int, default=0, show_default=True, help='Grid indicator of the samples.')
@click.option('--method', type=click.Choice(['direct', 'fft']), default='direct', show_default=True)
def coeffs(in_path, indicator, method):
    """Print the interpolation coefficients a0, a, b as JSON."""
    def action():
        c = dft_coeffs(read_values(in_path, indicator), method=method)
        click.echo(to_json({'a0': c.a0, 'a': c.a, 'b': c.b}))
    _run('coeffs', action)


@cli.command(name='eval')
@click.option('--spec', 'spec_path', required=True, help='Spline spec JSON.')
@click.option('--in', 'in_path', required=True, help='Samples CSV on the I2 grid.')
@click.option('--t0', type=float, default=0.0, show_default=True, help='First evaluation point.')
@click.option('--t1', type=float, default=TWO_PI, help='End of the range (excluded). [default: 2π]')
@click.option('--points', type=int, default=1000, show_default=True, help='Uniform points on [t0, t1).')
@click.option('--deriv', type=int, default=0, show_default=True, help='Derivative order.')
@click.option('--unsafe-derivative', is_flag=True, help='Allow deriv = r.')
@click.pass_obj
def eval_command(cfg, spec_path, in_path, t0, t1, points, deriv, unsafe_derivative):
    """Print t,value of the spline on a uniform grid of [t0, t1)."""
    def action():
        if points < 1:
            raise ValidationError(f"--points must be positive, got {points}")
        spec, N = load_spec(spec_path, cfg)
        s = build_spline(read_values(in_path, spec.I2, N), spec)
        if abs((t1 - t0) - TWO_PI) <= PERIOD_SNAP_TOL:
            # A full period goes through the folded spectrum
            t, values = sample_period(s, points, q=deriv, offset=t0, allow_unsafe=unsafe_derivative)
        else:
            t = t0 + (t1 - t0) * np.arange(points) / points
            values = eval_spline(s, t, q=deriv, allow_unsafe=unsafe_derivative)
        emit_csv(['t', 'value'], list(zip(t, values)))
    _run('eval', action)


@cli.command()
@click.option('--spec', 'spec_path', required=True, help='Spline spec JSON (must give N).')
@click.pass_obj
def factors(cfg, spec_path):
    """Print the interpolation factors hc, hs and the tail plan as JSON."""
    def action():
        spec, N = load_spec(spec_path, cfg)
        if N is None:
            raise ValidationError("The factors command needs N in the spec file")
        grid = make_grid(N, spec.I2)
        hc = interpolation_factors(spec.gamma, spec.kind, spec.r, grid.N, spec.I1, spec.I2, spec.tail)
        hs = interpolation_factors(spec.eta, spec.kind, spec.r, grid.N, spec.I1, spec.I2, spec.tail)
        plan = hc.plan if spec.gamma.has_aliases else hs.plan
        click.echo(to_json({
            'hc': hc.values,
            'hs': hs.values,
            'tail_terms': plan.terms,
            'effective_tol': plan.effective_tol,
            'relaxed': plan.relaxed,
        }))
    _run('factors', action)


@cli.command()
@click.option('--spec', 'spec_path', required=True, help='Spline spec JSON.')
@click.option('--in', 'in_path', required=True, help='Samples CSV on the I2 grid.')
@click.option('--deriv', type=int, default=0, show_default=True, help='Derivative order.')
@click.option('--panels', type=int, default=4096, show_default=True, help='Simpson panels.')
@click.pass_obj
def power(cfg, spec_path, in_path, deriv, panels):
    """Print average power by Parseval and by quadrature."""
    def action():
        spec, N = load_spec(spec_path, cfg)
        s = build_spline(read_values(in_path, spec.I2, N), spec)
        report = power_spline_series(s, deriv, panels=panels)
        click.echo(to_json({
            'series': report.series_value,
            'quadrature': report.quadrature_value,
            'pc': report.pc,
            'ps': report.ps,
            'a0_term': report.a0_term,
            'quadrature_error': report.quadrature_error,
        }))
    _run('power', action)


@cli.command()
@click.option('--spec', 'spec_path', required=True, help='Spline spec JSON.')
@click.option('--in', 'in_path', required=True, help='Samples CSV on the I2 grid.')
@click.option('--oracle', type=click.Choice(['cubic', 'linear']), required=True)
@click.option('--points', type=int, default=1000, show_default=True)
@click.pass_obj
def compare(cfg, spec_path, in_path, oracle, points):
    """Print sup and L2 distance between the spline and a polynomial-spline oracle."""
    def action():
        spec, N = load_spec(spec_path, cfg)
        samples = read_values(in_path, spec.I2, N)
        s = build_spline(samples, spec)
        reference = build_cubic_periodic(samples) if oracle == 'cubic' else build_linear(samples)
        stats = error_stats(s, reference, points)
        click.echo(to_json({'sup_err': stats.sup_err, 'l2_err': stats.l2_err}))
    _run('compare', action)


@cli.command()
@click.option('--in', 'in_path', required=True, help='Samples CSV.')
@click.option('--indicator', type=int, default=0, show_default=True)
@click.pass_obj
def moments(cfg, in_path, indicator):
    """Print cubic-spline moments from the trigonometric spline and from the cyclic system."""
    def action():
        samples = read_values(in_path, indicator)
        trig = moments_via_trigspline(samples, cfg.tail())
        cyclic = build_cubic_periodic(samples).moments
        scale = max(float(np.max(np.abs(cyclic))), 1e-300)
        click.echo(to_json({
            'trig': trig,
            'cyclic': cyclic,
            'max_rel_diff': float(np.max(np.abs(trig - cyclic))) / scale,
        }))
    _run('moments', action)


def _parse_grid(grid: str) -> Tuple[float, ...]:
    if grid == 'default':
        return DEFAULT_SWEEP_VALUES
    try:
        return tuple(float(part) for part in grid.split(',') if part.strip())
    except ValueError:
        raise ValidationError(f"--grid must be 'default' or comma-separated numbers, got {grid!r}")


@cli.command()
@click.option('--in', 'in_path', required=True, help='Samples CSV.')
@click.option('--indicator', type=int, default=0, show_default=True)
@click.option('--r', 'r', type=int, required=True)
@click.option('--nu', type=click.Choice([kind.value for kind in FactorKind]), default='nu1', show_default=True)
@click.option('--deriv', type=int, default=0, show_default=True)
@click.option('--grid', default='default', show_default=True, help="'default' or values for γ2, γ3.")
@click.option('--free', is_flag=True, help='Vary H independently of Γ.')
@click.option('--workers', type=int, default=1, show_default=True)
@click.pass_obj
def sweep(cfg, in_path, indicator, r, nu, deriv, grid, free, workers):
    """Print g1,g2,g3,power,flag for each parameter cell."""
    def action():
        samples = read_values(in_path, indicator)
        result = sweep_power(samples, r, nu, deriv, values=_parse_grid(grid), free=free,
                             tail=cfg.tail(), workers=workers)
        header = ['g1', 'g2', 'g3'] + (['h1', 'h2', 'h3'] if free else []) + ['power', 'flag']
        rows = []
        for cell in result.cells:
            row = list(cell.gamma.as_tuple()) + (list(cell.eta.as_tuple()) if free else [])
            rows.append(tuple(row + [cell.power if cell.power is not None else '', cell.flag]))
        emit_csv(header, rows)
        click.echo(f"baseline_power={format_number(result.baseline_power)} winners={len(result.winners)}", err=True)
    _run('sweep', action)


@cli.command()
@click.option('--fn', 'fn_name', type=click.Choice(sorted(NAMED_FUNCTIONS)), required=True)
@click.option('--r', 'r', type=int, required=True)
@click.option('--nu', type=click.Choice([kind.value for kind in FactorKind]), default='nu1', show_default=True)
@click.option('--Ns', 'Ns', required=True, help='Comma-separated odd node counts.')
@click.option('--points', type=int, default=1000, show_default=True)
@click.pass_obj
def convergence(cfg, fn_name, r, nu, Ns, points):
    """Print N,sup_err rows followed by a JSON summary line."""
    def action():
        try:
            sizes = [int(part) for part in Ns.split(',') if part.strip()]
        except ValueError:
            raise ValidationError(f"--Ns must be comma-separated integers, got {Ns!r}")
        report = convergence_order(NAMED_FUNCTIONS[fn_name], r, nu, sizes, points=points, tail=cfg.tail())
        emit_csv(['N', 'sup_err'], list(zip(report.Ns, report.sup_errs)))
        click.echo(to_json({'order': report.order, 'exact': report.exact}))
    _run('convergence', action)


def run(argv: Optional[List[str]] = None) -> int:
    """Invoke the CLI and return its exit code"""
    try:
        cli.main(args=argv, prog_name='trigspline', standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return 2
    except SystemExit as e:
        return int(e.code or 0)
    return 0
