"""
Quadrature, error metrics, convergence orders, power sweeps over parameter
vectors and orthogonality checks for fundamental splines.
"""
import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import simpson as _scipy_simpson

from errors import (DegenerateFactor, DegenerateFit, NoWitnessFound, OddPanels, PreconditionViolation,
                    TailBudgetExceeded, ValidationError)
from factors import FactorKind, ParamVector, TailControl
from grid import TWO_PI, UniformGrid, make_grid
from performance import PerformanceMonitor
from polyoracle import PeriodicPolySpline, build_cubic_periodic, build_linear, eval_poly
from power import spline_power
from spline import (SplineSpec, TrigSpline, build_spline, check_derivative_order, eval_spline,
                    fundamental_on_period, sample_period)
from trigpoly import FourierCoeffs, SampleSet, eval_tm, eval_trig_poly

# Configure logging
logger = logging.getLogger(__name__)

DEFAULT_PANELS = 4096
DEFAULT_SWEEP_VALUES = (-1.0, -0.5, 0.0, 0.5, 1.0, 1.5)

NAMED_FUNCTIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    'expsin': lambda t: np.exp(np.sin(t)),
    'cos3': lambda t: np.cos(3.0 * t),
    'abs_sin': lambda t: np.abs(np.sin(t)),
}


@dataclass(frozen=True)
class Curve:
    """A 2π-periodic curve; on_period(points) gives values at 2πp/points when a faster route exists"""
    fn: Callable[[np.ndarray], np.ndarray]
    on_period: Optional[Callable[[int], np.ndarray]] = None

    def __call__(self, t) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(t, dtype=float)), dtype=float)

    def sample(self, points: int) -> np.ndarray:
        if self.on_period is not None:
            return np.asarray(self.on_period(points), dtype=float)
        return self(TWO_PI * np.arange(points) / points)

    def times(self, other: "Curve") -> "Curve":
        return Curve(lambda t: self(t) * other(t), lambda points: self.sample(points) * other.sample(points))

    def minus(self, other: "Curve") -> "Curve":
        return Curve(lambda t: self(t) - other(t), lambda points: self.sample(points) - other.sample(points))

    def squared(self) -> "Curve":
        return self.times(self)


def as_curve(obj: Any, q: int = 0) -> Curve:
    """Wrap splines, oracles, polynomials or plain callables as a Curve (q-th derivative)"""
    if isinstance(obj, Curve):
        return obj
    if isinstance(obj, TrigSpline):
        check_derivative_order(q, obj.spec.r)
        return Curve(lambda t: np.atleast_1d(eval_spline(obj, t, q)),
                     lambda points: sample_period(obj, points, q=q)[1])
    if isinstance(obj, PeriodicPolySpline):
        return Curve(lambda t: np.atleast_1d(eval_poly(obj, t, q)))
    if isinstance(obj, FourierCoeffs):
        return Curve(lambda t: np.atleast_1d(eval_trig_poly(obj, t, q)))
    if callable(obj):
        if q:
            raise ValidationError("Derivatives of plain callables are not available")
        return Curve(obj)
    raise ValidationError(f"Cannot evaluate object of type {type(obj).__name__}")


# Quadrature

def _check_panels(panels: int) -> None:
    if panels < 2 or panels % 2 != 0:
        raise OddPanels(f"Simpson's rule needs an even panel count >= 2, got {panels}")


def simpson_periodic_samples(values: np.ndarray) -> float:
    """Simpson over [0, 2π] from values at 2πp/P, p = 0..P-1 (the endpoint repeats the first value)"""
    values = np.asarray(values, dtype=float)
    _check_panels(values.shape[0])
    closed = np.append(values, values[0])
    return float(_scipy_simpson(closed, dx=TWO_PI / values.shape[0]))


def simpson(f: Any, panels: int = DEFAULT_PANELS, a: float = 0.0, b: float = TWO_PI) -> float:
    """Composite Simpson rule for ∫_a^b f"""
    _check_panels(panels)
    curve = as_curve(f)
    if a == 0.0 and b == TWO_PI and curve.on_period is not None:
        return simpson_periodic_samples(curve.sample(panels))

    x = np.linspace(a, b, panels + 1)
    return float(_scipy_simpson(curve(x), x=x))


def simpson_certified(f: Any, panels: int = DEFAULT_PANELS, a: float = 0.0,
                      b: float = TWO_PI) -> Tuple[float, float]:
    """Simpson value and the change against half as many panels"""
    if panels % 4 != 0:
        raise OddPanels(f"Certified Simpson needs a panel count divisible by 4, got {panels}")
    fine = simpson(f, panels, a, b)
    coarse = simpson(f, panels // 2, a, b)
    return fine, abs(fine - coarse)


# Error metrics

@dataclass(frozen=True)
class ErrorStats:
    sup_err: float
    l2_err: float
    points: int

    def to_dict(self) -> Dict[str, Any]:
        return {'sup_err': self.sup_err, 'l2_err': self.l2_err, 'points': self.points}


def error_stats(fa: Any, fb: Any, points: int = 1000) -> ErrorStats:
    """Sup and L2 distance over a uniform sample of [0, 2π)"""
    if points < 2:
        raise ValidationError(f"Need at least 2 points, got {points}")
    diff = as_curve(fa).minus(as_curve(fb)).sample(points)
    sup_err = float(np.max(np.abs(diff)))
    # Rectangle rule is the periodic trapezoid rule
    l2_err = math.sqrt(TWO_PI / points * math.fsum(diff ** 2))
    return ErrorStats(sup_err=sup_err, l2_err=l2_err, points=points)


# Convergence

@dataclass(frozen=True)
class ConvergenceReport:
    Ns: Tuple[int, ...]
    sup_errs: Tuple[float, ...]
    order: float
    exact: bool

    def to_dict(self) -> Dict[str, Any]:
        return {'Ns': list(self.Ns), 'sup_errs': list(self.sup_errs), 'order': self.order, 'exact': self.exact}


def convergence_order(f: Callable[[np.ndarray], np.ndarray], r: int, kind: Union[str, FactorKind],
                      Ns: Sequence[int], points: int = 1000,
                      gamma: Sequence[float] = (1.0, 1.0, 1.0), eta: Optional[Sequence[float]] = None,
                      tail: Optional[TailControl] = None) -> ConvergenceReport:
    """Order p in sup_err ~ N^-p, from a least-squares fit of log sup_err against log N"""
    Ns = tuple(int(N) for N in Ns)
    if len(Ns) < 3:
        raise DegenerateFit(f"Need at least 3 grid sizes for a convergence fit, got {len(Ns)}")
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValidationError(f"Grid sizes must be strictly increasing, got {Ns}")

    spec = SplineSpec(gamma, eta if eta is not None else gamma, kind, r, 0, 0, tail or TailControl())
    target = Curve(f)
    errors = []
    for N in Ns:
        samples = SampleSet.from_function(make_grid(N, 0), f)
        stats = error_stats(build_spline(samples, spec), target, points)
        logger.debug(f"Convergence {spec.kind.value} r={r} N={N}: sup_err={stats.sup_err:.3e}")
        errors.append(stats.sup_err)

    scale = 1.0 + float(np.max(np.abs(target.sample(points))))
    if max(errors) <= 1e-10 * scale:
        return ConvergenceReport(Ns=Ns, sup_errs=tuple(errors), order=math.nan, exact=True)

    slope, _ = np.polyfit(np.log(Ns), np.log(np.maximum(errors, 1e-300)), 1)
    return ConvergenceReport(Ns=Ns, sup_errs=tuple(errors), order=float(-slope), exact=False)


# Parameter sweeps

@dataclass(frozen=True)
class SweepCell:
    gamma: ParamVector
    eta: ParamVector
    power: Optional[float]
    flag: str


@dataclass(frozen=True)
class SweepResult:
    """Power of St(Γ, H) over a parameter grid against a polynomial-spline baseline"""
    cells: List[SweepCell]
    baseline_power: float
    q: int

    @property
    def results(self) -> List[SweepCell]:
        return [cell for cell in self.cells if cell.power is not None]

    @property
    def winners(self) -> List[SweepCell]:
        return [cell for cell in self.cells if cell.flag == 'winner']


def _baseline_panels(N: int, panels: int) -> int:
    """Smallest multiple of 2N at or above `panels`, so panel edges hit every knot"""
    step = 2 * N
    return step * max(1, math.ceil(panels / step))


def sweep_baseline(samples: SampleSet, r: int, q: int, kind: FactorKind, tail: TailControl,
                   panels: int = DEFAULT_PANELS) -> float:
    """P of the polynomial spline of degree r through the samples, by quadrature"""
    if r == 3:
        oracle = build_cubic_periodic(samples)
    elif r == 1:
        oracle = build_linear(samples)
    else:
        # The simple ν1 spline of odd degree r is the polynomial spline itself
        I = samples.grid.indicator
        oracle = build_spline(samples, SplineSpec.simple(FactorKind.NU1, r, I, I, tail))

    count = _baseline_panels(samples.grid.N, panels)
    offset = samples.grid.offset
    t = offset + TWO_PI * np.arange(count) / count
    if isinstance(oracle, TrigSpline):
        _, values = sample_period(oracle, count, q=q, offset=offset)
    else:
        values = eval_poly(oracle, t, q)
    return simpson_periodic_samples(np.asarray(values) ** 2) / math.pi


def _sweep_cell(samples: SampleSet, base: SplineSpec, gamma: ParamVector, eta: ParamVector,
                q: int, baseline: float) -> SweepCell:
    with PerformanceMonitor.timed('sweep_cell'):
        try:
            spline = build_spline(samples, base.with_params(gamma.as_tuple(), eta.as_tuple()))
            value = spline_power(spline, q)
        except (DegenerateFactor, TailBudgetExceeded) as e:
            logger.warning(f"Sweep cell Γ={gamma.as_tuple()} H={eta.as_tuple()} skipped: {str(e)}")
            return SweepCell(gamma=gamma, eta=eta, power=None, flag='degenerate')

    flag = 'winner' if value < baseline else 'ok'
    return SweepCell(gamma=gamma, eta=eta, power=value, flag=flag)


def sweep_grid(values: Sequence[float] = DEFAULT_SWEEP_VALUES, free: bool = False) -> List[Tuple[ParamVector, ParamVector]]:
    """(Γ, H) pairs with γ1 = η1 = 1; H = Γ unless free"""
    gammas = [ParamVector(1.0, g2, g3) for g2, g3 in product(values, repeat=2)]
    if not free:
        return [(g, g) for g in gammas]
    return [(g, e) for g in gammas for e in gammas]


def sweep_power(samples: SampleSet, r: int, kind: Union[str, FactorKind], q: int,
                values: Sequence[float] = DEFAULT_SWEEP_VALUES, free: bool = False,
                tail: Optional[TailControl] = None, panels: int = DEFAULT_PANELS,
                workers: Optional[int] = None) -> SweepResult:
    """P(St(Γ, H), q) over a parameter grid, flagged against the polynomial-spline power"""
    check_derivative_order(q, r)
    kind = FactorKind.parse(kind)
    tail = tail or TailControl()
    I = samples.grid.indicator
    base = SplineSpec.simple(kind, r, I, I, tail)

    baseline = sweep_baseline(samples, r, q, kind, tail, panels)
    pairs = sweep_grid(values, free)
    logger.info(f"Sweeping {len(pairs)} cells ({kind.value}, r={r}, q={q}), baseline power {baseline:.6g}")

    def run(pair):
        return _sweep_cell(samples, base, pair[0], pair[1], q, baseline)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            cells = list(executor.map(run, pairs))
    else:
        cells = [run(pair) for pair in pairs]

    result = SweepResult(cells=cells, baseline_power=baseline, q=q)
    if not result.winners:
        logger.info("No parameter vector in the sweep beats the polynomial spline")
    return result


# Orthogonality

@dataclass(frozen=True)
class Witness:
    k: int
    j: int
    value: float


def tm_gram(grid: UniformGrid, panels: int = DEFAULT_PANELS) -> np.ndarray:
    """Gram matrix ∫ tm_k tm_j of the fundamental trigonometric polynomials"""
    _check_panels(panels)
    t = TWO_PI * np.arange(panels) / panels
    basis = [np.atleast_1d(eval_tm(grid, k, t)) for k in range(1, grid.N + 1)]
    return _gram(basis)


def _gram(basis: List[np.ndarray]) -> np.ndarray:
    size = len(basis)
    gram = np.empty((size, size))
    for a in range(size):
        for b in range(a, size):
            gram[a, b] = gram[b, a] = simpson_periodic_samples(basis[a] * basis[b])
    return gram


def fundamental_gram(spec: SplineSpec, grid: UniformGrid, panels: int = DEFAULT_PANELS) -> np.ndarray:
    """Gram matrix ∫ st_k st_j of the fundamental splines"""
    _check_panels(panels)
    basis = [fundamental_on_period(spec, grid, k, panels)[1] for k in range(1, grid.N + 1)]
    return _gram(basis)


def orthogonality_witness(spec: SplineSpec, grid: UniformGrid, threshold: float = 1e-6,
                          panels: int = DEFAULT_PANELS) -> Witness:
    """The pair k != j with the largest |∫ st_k st_j|, required to exceed threshold"""
    if not spec.equal_params:
        raise PreconditionViolation("Orthogonality witness needs Γ = H")
    if not spec.gamma.has_aliases:
        raise PreconditionViolation(
            "Γ = (γ1, 0, 0) gives the fundamental trigonometric polynomials, which are orthogonal")

    gram = fundamental_gram(spec, grid, panels)
    off = np.abs(gram - np.diag(np.diag(gram)))
    a, b = np.unravel_index(int(np.argmax(off)), off.shape)
    k, j = sorted((int(a) + 1, int(b) + 1))
    value = float(gram[k - 1, j - 1])

    if abs(value) <= threshold:
        raise NoWitnessFound(f"All off-diagonal inner products are below {threshold:g} (largest {value:.3e})")
    return Witness(k=k, j=j, value=value)


def scale_invariance(samples: SampleSet, spec: SplineSpec, factor: float, points: int = 1000) -> float:
    """sup |St(Γ, H) - St(cΓ, cH)| over a uniform sample"""
    if factor == 0.0 or not math.isfinite(factor):
        raise ValidationError(f"Scale factor must be finite and non-zero, got {factor!r}")
    scaled = spec.with_params(spec.gamma.scaled(factor).as_tuple(), spec.eta.scaled(factor).as_tuple())
    return error_stats(build_spline(samples, spec), build_spline(samples, scaled), points).sup_err
