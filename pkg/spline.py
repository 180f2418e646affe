"""
Trigonometric interpolation splines St^(I1,I2)(Γ, H, ν, r, t).

A spline is one Fourier series: every frequency j not divisible by N belongs to
exactly one base harmonic k (j = k, mN + k or mN - k), and its amplitude is the
interpolation coefficient of k scaled by γ·ν_j / hc_k (cosine part) or
η·ν_j / hs_k (sine part), with the stitching sign (-1)^(m·I1).
"""
import math
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterator, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.fft

from errors import (DerivativeOrderTooHigh, FundamentalRequiresEqualParams, GridMismatch,
                    NonFinite, ValidationError)
from factors import (FactorKind, ParamVector, TailControl, TailPlan, alias_blocks, alias_sign,
                     interpolation_factors, nu_values, plan_tail)
from grid import TWO_PI, Indicator, UniformGrid, wrap_array
from performance import PerformanceMonitor
from trigpoly import FourierCoeffs, SampleSet, dft_coeffs

# Configure logging
logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]

# Upper bound on the (points x frequencies) matrix built per step of direct evaluation
DIRECT_BLOCK_ELEMENTS = 1 << 22
DIRECT_ALIAS_CHUNK = 4096

SIMPLE = (1.0, 1.0, 1.0)
POLYNOMIAL = (1.0, 0.0, 0.0)


@dataclass(frozen=True)
class SplineSpec:
    """Everything that defines a spline except the data"""
    gamma: ParamVector
    eta: ParamVector
    kind: FactorKind
    r: int
    I1: Indicator = Indicator.ZERO
    I2: Indicator = Indicator.ZERO
    tail: TailControl = field(default_factory=TailControl)

    def __post_init__(self):
        object.__setattr__(self, 'gamma', ParamVector.of(self.gamma))
        object.__setattr__(self, 'eta', ParamVector.of(self.eta))
        object.__setattr__(self, 'kind', FactorKind.parse(self.kind))
        object.__setattr__(self, 'I1', Indicator.coerce(self.I1))
        object.__setattr__(self, 'I2', Indicator.coerce(self.I2))
        if isinstance(self.r, bool) or int(self.r) != self.r or int(self.r) < 1:
            raise ValidationError(f"Spline order r must be a positive integer, got {self.r!r}")
        object.__setattr__(self, 'r', int(self.r))

    @classmethod
    def simple(cls, kind: Union[str, FactorKind], r: int, I1: int = 0, I2: int = 0,
               tail: Optional[TailControl] = None) -> "SplineSpec":
        """Γ = H = (1, 1, 1)"""
        return cls(SIMPLE, SIMPLE, kind, r, I1, I2, tail or TailControl())

    @classmethod
    def from_dict(cls, data: Dict[str, Any], tail: Optional[TailControl] = None) -> "SplineSpec":
        """Build from the spec.json schema; tail fields in the document win over `tail`"""
        try:
            base_tail = tail or TailControl()
            tail_kwargs = {}
            if data.get('tail_rel_tol') is not None:
                tail_kwargs['rel_tol'] = float(data['tail_rel_tol'])
            if data.get('tail_max_terms') is not None:
                tail_kwargs['max_terms'] = int(data['tail_max_terms'])
            return cls(
                gamma=ParamVector.of(data.get('gamma', SIMPLE)),
                eta=ParamVector.of(data.get('eta', data.get('gamma', SIMPLE))),
                kind=FactorKind.parse(data.get('nu', 'nu1')),
                r=data['r'],
                I1=data.get('I1', 0),
                I2=data.get('I2', 0),
                tail=replace(base_tail, **tail_kwargs),
            )
        except KeyError as e:
            raise ValidationError(f"Spline spec is missing field {e}")
        except (TypeError, ValueError) as e:
            raise ValidationError(f"Malformed spline spec: {e}")

    def to_dict(self, N: Optional[int] = None) -> Dict[str, Any]:
        data = {
            'I1': int(self.I1),
            'I2': int(self.I2),
            'r': self.r,
            'nu': self.kind.value,
            'gamma': list(self.gamma.as_tuple()),
            'eta': list(self.eta.as_tuple()),
            'tail_rel_tol': self.tail.rel_tol,
            'tail_max_terms': self.tail.max_terms,
        }
        if N is not None:
            data = {'N': N, **data}
        return data

    def with_indicators(self, I1: int, I2: int) -> "SplineSpec":
        return replace(self, I1=Indicator.coerce(I1), I2=Indicator.coerce(I2))

    def with_params(self, gamma: Sequence[float], eta: Optional[Sequence[float]] = None) -> "SplineSpec":
        return replace(self, gamma=ParamVector.of(gamma), eta=ParamVector.of(eta if eta is not None else gamma))

    @property
    def equal_params(self) -> bool:
        return self.gamma == self.eta


@dataclass(frozen=True, eq=False)
class TrigSpline:
    """A built spline: interpolation coefficients plus precomputed factors hc_k, hs_k"""
    spec: SplineSpec
    coeffs: FourierCoeffs
    hc: np.ndarray
    hs: np.ndarray
    plan: TailPlan

    @property
    def grid(self) -> UniformGrid:
        return self.coeffs.grid

    @property
    def N(self) -> int:
        return self.grid.N

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def effective_tol(self) -> float:
        return self.plan.effective_tol

    def series(self) -> "_AliasSeries":
        return _AliasSeries(
            N=self.N, kind=self.spec.kind, r=self.spec.r,
            cos_amp=self.coeffs.a / self.hc, sin_amp=self.coeffs.b / self.hs,
            cos_params=self.spec.gamma.as_tuple(), sin_params=self.spec.eta.as_tuple(),
            parity=int(self.spec.I1),
        )


@dataclass(frozen=True, eq=False)
class _AliasSeries:
    """Base-harmonic amplitudes and the recipe that spreads them over the alias frequencies"""
    N: int
    kind: FactorKind
    r: int
    cos_amp: np.ndarray
    sin_amp: np.ndarray
    cos_params: Tuple[float, float, float]
    sin_params: Tuple[float, float, float]
    parity: int

    @property
    def has_aliases(self) -> bool:
        return any(p != 0.0 for p in self.cos_params[1:] + self.sin_params[1:])

    def blocks(self, terms: int, chunk: int) -> Iterator[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """(frequencies, cosine amplitudes, sine amplitudes); the base block first, then m ascending"""
        k = np.arange(1, len(self.cos_amp) + 1, dtype=np.int64)
        g1, g2, g3 = self.cos_params
        e1, e2, e3 = self.sin_params

        base = nu_values(self.kind, k, self.r, self.N)
        yield k, g1 * base * self.cos_amp, e1 * base * self.sin_amp

        if not self.has_aliases:
            return

        for m in alias_blocks(terms, chunk):
            sign = alias_sign(m, self.parity)[:, None]
            plus = m[:, None] * self.N + k[None, :]
            minus = m[:, None] * self.N - k[None, :]
            nu_plus = sign * nu_values(self.kind, plus, self.r, self.N)
            nu_minus = sign * nu_values(self.kind, minus, self.r, self.N)

            freq = np.concatenate((plus.ravel(), minus.ravel()))
            cos_part = np.concatenate(((g2 * nu_plus * self.cos_amp).ravel(),
                                       (g3 * nu_minus * self.cos_amp).ravel()))
            # The (mN - k) sine terms enter with a minus sign
            sin_part = np.concatenate(((e2 * nu_plus * self.sin_amp).ravel(),
                                       (-e3 * nu_minus * self.sin_amp).ravel()))
            yield freq, cos_part, sin_part


class _Neumaier:
    """Elementwise compensated accumulator"""

    def __init__(self, shape):
        self.total = np.zeros(shape)
        self.comp = np.zeros(shape)

    def add(self, x: np.ndarray) -> None:
        t = self.total + x
        big = np.abs(self.total) >= np.abs(x)
        self.comp += np.where(big, (self.total - t) + x, (x - t) + self.total)
        self.total = t

    def result(self) -> np.ndarray:
        return self.total + self.comp


def _series_at(series: _AliasSeries, terms: int, t: np.ndarray, q: int) -> np.ndarray:
    """Direct evaluation Σ j^q [A_j cos(jt + qπ/2) + B_j sin(jt + qπ/2)]"""
    t = wrap_array(t)
    acc = _Neumaier(t.shape)
    shift = q * math.pi / 2.0

    for freq, cos_part, sin_part in series.blocks(terms, DIRECT_ALIAS_CHUNK):
        weight = freq.astype(float) ** q
        cw, sw = cos_part * weight, sin_part * weight
        step = max(1, DIRECT_BLOCK_ELEMENTS // max(1, freq.size))
        block = np.empty(t.shape)
        for start in range(0, t.size, step):
            stop = min(start + step, t.size)
            phase = np.mod(np.outer(t[start:stop], freq), TWO_PI) + shift
            block[start:stop] = np.cos(phase) @ cw + np.sin(phase) @ sw
        acc.add(block)

    return acc.result()


def _series_on_period(series: _AliasSeries, terms: int, points: int, offset: float, q: int) -> np.ndarray:
    """
    The same sum on t_p = offset + 2πp/points: frequencies are folded modulo the point
    count (cos/sin of j·t_p only depend on j mod points) and one inverse FFT finishes it.
    """
    folded = np.zeros(points, dtype=complex)
    for freq, cos_part, sin_part in series.blocks(terms, 65536):
        weight = freq.astype(float) ** q
        phase = np.mod(freq.astype(float) * offset, TWO_PI)
        z = (cos_part - 1j * sin_part) * weight * np.exp(1j * phase)
        idx = np.mod(freq, points)
        folded += np.bincount(idx, weights=z.real, minlength=points)
        folded += 1j * np.bincount(idx, weights=z.imag, minlength=points)

    values = points * scipy.fft.ifft(folded)
    return (np.exp(1j * q * math.pi / 2.0) * values).real


def _series_power(series: _AliasSeries, terms: int, q: int) -> Tuple[float, float]:
    """Σ j^2q A_j² and Σ j^2q B_j², compensated"""
    cos_parts, sin_parts = [], []
    for freq, cos_part, sin_part in series.blocks(terms, 65536):
        weight = freq.astype(float) ** (2 * q)
        cos_parts.append(math.fsum(cos_part ** 2 * weight))
        sin_parts.append(math.fsum(sin_part ** 2 * weight))
    return math.fsum(cos_parts), math.fsum(sin_parts)


def check_derivative_order(q: int, r: int, allow_unsafe: bool = False) -> None:
    """q <= r - 1, or q = r when the caller accepts a non-uniformly convergent series"""
    if q < 0:
        raise ValidationError(f"Derivative order must be non-negative, got {q}")
    if q > r or (q == r and not allow_unsafe):
        raise DerivativeOrderTooHigh(
            f"Derivative order {q} not available for a spline of order {r} (need q <= {r - 1})")
    if q == r:
        logger.warning(f"Evaluating derivative of order q=r={r}; the series does not converge uniformly")


def _eval_terms(s: TrigSpline, series: _AliasSeries, q: int) -> int:
    """Alias count for evaluating the q-th derivative; q = 0 reuses the factor plan"""
    if not series.has_aliases:
        return 0
    if q == 0:
        return s.plan.terms
    return plan_tail(s.spec.kind, s.spec.r, s.N, s.spec.tail, q=q).terms


def build_spline(samples: SampleSet, spec: SplineSpec) -> TrigSpline:
    """Interpolation coefficients on Δ_N^(I2) plus interpolation factors"""
    if samples.grid.indicator != spec.I2:
        raise GridMismatch(
            f"Samples live on grid I={int(samples.grid.indicator)} but the spline interpolates on I2={int(spec.I2)}")

    with PerformanceMonitor.timed('build_spline'):
        N = samples.grid.N
        coeffs = dft_coeffs(samples)
        hc_table = interpolation_factors(spec.gamma, spec.kind, spec.r, N, spec.I1, spec.I2, spec.tail)
        hs_table = interpolation_factors(spec.eta, spec.kind, spec.r, N, spec.I1, spec.I2, spec.tail)

    # Factors and series share one plan whenever anything carries aliases
    plan = hc_table.plan
    if spec.gamma.has_aliases or spec.eta.has_aliases:
        plan = plan_tail(spec.kind, spec.r, N, spec.tail)
    if plan.relaxed:
        logger.warning(f"Tail budget relaxed for {spec.kind.value}, r={spec.r}, N={N}: "
                       f"{plan.terms} terms, effective tolerance {plan.effective_tol:.3g}")

    return TrigSpline(spec=spec, coeffs=coeffs, hc=hc_table.values, hs=hs_table.values, plan=plan)


def eval_spline(s: TrigSpline, t: ArrayLike, q: int = 0, allow_unsafe: bool = False) -> Union[float, np.ndarray]:
    """Value of the spline (or its q-th derivative) at t"""
    check_derivative_order(q, s.spec.r, allow_unsafe)
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t_arr)):
        raise NonFinite("Evaluation points must be finite")
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr).ravel()

    series = s.series()
    values = _series_at(series, _eval_terms(s, series, q), t_arr, q)
    if q == 0:
        values = values + s.coeffs.a0 / 2.0

    return float(values[0]) if scalar else values


def sample_period(s: TrigSpline, points: int, q: int = 0, offset: float = 0.0,
                  allow_unsafe: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """Spline values on the full-period grid offset + 2πp/points, p = 0..points-1"""
    check_derivative_order(q, s.spec.r, allow_unsafe)
    if points < 1:
        raise ValidationError(f"Point count must be positive, got {points}")
    if not math.isfinite(offset):
        raise NonFinite("Grid offset must be finite")

    series = s.series()
    values = _series_on_period(series, _eval_terms(s, series, q), points, offset, q)
    if q == 0:
        values = values + s.coeffs.a0 / 2.0

    t = offset + TWO_PI * np.arange(points) / points
    return t, values


def series_power(s: TrigSpline, q: int) -> Tuple[float, float]:
    """(pc, ps): energy of the cosine and sine parts of the q-th derivative"""
    check_derivative_order(q, s.spec.r)
    series = s.series()
    terms = 0
    if series.has_aliases:
        terms = plan_tail(s.spec.kind, s.spec.r, s.N, s.spec.tail, q=q, power=2).terms
    return _series_power(series, terms, q)


# Fundamental splines

def _fundamental_series(spec: SplineSpec, grid: UniformGrid) -> Tuple[_AliasSeries, int]:
    if not spec.equal_params:
        raise FundamentalRequiresEqualParams(
            f"Fundamental splines need Γ = H, got Γ={spec.gamma.as_tuple()} H={spec.eta.as_tuple()}")
    if grid.indicator != spec.I2:
        raise GridMismatch(f"Fundamental splines live on grid I2={int(spec.I2)}, got I={int(grid.indicator)}")

    table = interpolation_factors(spec.gamma, spec.kind, spec.r, grid.N, spec.I1, spec.I2, spec.tail)
    n = grid.n
    # Written in u = t - t_k the alias sign becomes (-1)^(m(I1 - I2))
    series = _AliasSeries(
        N=grid.N, kind=spec.kind, r=spec.r,
        cos_amp=np.full(n, 2.0 / grid.N) / table.values, sin_amp=np.zeros(n),
        cos_params=spec.gamma.as_tuple(), sin_params=(0.0, 0.0, 0.0),
        parity=(int(spec.I1) - int(spec.I2)) % 2,
    )
    return series, table.plan.terms


def _fundamental_terms(spec: SplineSpec, grid: UniformGrid, series: _AliasSeries, base_terms: int, q: int) -> int:
    if not series.has_aliases:
        return 0
    if q == 0:
        return base_terms
    return plan_tail(spec.kind, spec.r, grid.N, spec.tail, q=q).terms


def eval_fundamental(spec: SplineSpec, grid: UniformGrid, k: int, t: ArrayLike, q: int = 0,
                     allow_unsafe: bool = False) -> Union[float, np.ndarray]:
    """st_k^(I1,I2)(Γ, ν, r, q, t) = (1/N)[1 + 2Σ c_l(t - t_k)/hc_l], differentiated q times"""
    check_derivative_order(q, spec.r, allow_unsafe)
    t_k = grid.node(k)
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t_arr)):
        raise NonFinite("Evaluation points must be finite")
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr).ravel()

    series, base_terms = _fundamental_series(spec, grid)
    terms = _fundamental_terms(spec, grid, series, base_terms, q)
    values = _series_at(series, terms, t_arr - t_k, q)
    if q == 0:
        values = values + 1.0 / grid.N

    return float(values[0]) if scalar else values


def fundamental_on_period(spec: SplineSpec, grid: UniformGrid, k: int, points: int, q: int = 0,
                          offset: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """st_k on the full-period grid offset + 2πp/points"""
    check_derivative_order(q, spec.r)
    t_k = grid.node(k)
    series, base_terms = _fundamental_series(spec, grid)
    terms = _fundamental_terms(spec, grid, series, base_terms, q)
    values = _series_on_period(series, terms, points, offset - t_k, q)
    if q == 0:
        values = values + 1.0 / grid.N

    t = offset + TWO_PI * np.arange(points) / points
    return t, values


def reconstruct_from_fundamentals(values: Sequence[float], spec: SplineSpec, grid: UniformGrid,
                                  t: ArrayLike, q: int = 0) -> Union[float, np.ndarray]:
    """Σ f_k st_k(t), or its q-th derivative"""
    f = np.asarray(values, dtype=float).ravel()
    if f.shape[0] != grid.N:
        raise ValidationError(f"Expected {grid.N} values, got {f.shape[0]}")

    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    total = sum(f[k - 1] * np.atleast_1d(eval_fundamental(spec, grid, k, t_arr, q))
                for k in range(1, grid.N + 1))

    return float(total[0]) if scalar else total
