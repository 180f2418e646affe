"""
Average power P(f, q) = (1/π)∫[f^(q)]² over the period, computed from spectra
(Parseval) and, for splines, cross-checked by quadrature.
"""
import math
import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Union

import numpy as np

from errors import ValidationError
from grid import TWO_PI
from spline import TrigSpline, check_derivative_order, sample_period, series_power
from trigpoly import FourierCoeffs, eval_trig_poly

# Configure logging
logger = logging.getLogger(__name__)

DEFAULT_PANELS = 4096


@dataclass(frozen=True)
class PowerReport:
    """Both routes to P(St, q); series_value = a0_term + pc + ps"""
    q: int
    series_value: float
    pc: float
    ps: float
    a0_term: float
    quadrature_value: Optional[float] = None
    quadrature_error: Optional[float] = None

    @property
    def relative_gap(self) -> Optional[float]:
        if self.quadrature_value is None:
            return None
        return abs(self.series_value - self.quadrature_value) / max(abs(self.series_value), 1e-300)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['series'] = data.pop('series_value')
        data['quadrature'] = data.pop('quadrature_value')
        return data


def _check_order(q: int) -> None:
    if q < 0:
        raise ValidationError(f"Derivative order must be non-negative, got {q}")


def power_trigpoly(c: FourierCoeffs, q: int = 0) -> float:
    """a0²/2·[q=0] + Σ k^2q (a_k² + b_k²)"""
    _check_order(q)
    weight = c.harmonics.astype(float) ** (2 * q)
    terms = list((c.a ** 2 + c.b ** 2) * weight)
    if q == 0:
        terms.append(c.a0 ** 2 / 2.0)
    return math.fsum(terms)


def power_from_nodes(c: FourierCoeffs, offset: float = 0.0) -> float:
    """
    P(T_n, 0) from the values of T_n on the N-node grid starting at `offset`.
    Any such grid is exact for a degree-n polynomial, so this matches power_trigpoly(c, 0).
    """
    N = c.grid.N
    t = offset + TWO_PI * np.arange(N) / N
    values = eval_trig_poly(c, t)
    return 2.0 / N * math.fsum(values ** 2)


def quadrature_panels(N: int, panels: int) -> int:
    """Smallest multiple of 8N at or above `panels`: knots on either grid then sit on Simpson pair edges, also after halving"""
    step = 8 * N
    return step * max(1, math.ceil(panels / step))


def _spline_quadrature(s: TrigSpline, q: int, panels: int) -> float:
    # Deferred to keep power importable from analysis
    from analysis import simpson_periodic_samples

    _, values = sample_period(s, panels, q=q)
    return simpson_periodic_samples(values ** 2) / math.pi


def power_spline_series(s: TrigSpline, q: int = 0, quadrature: bool = True,
                        panels: int = DEFAULT_PANELS) -> PowerReport:
    """P(St, q) by Parseval over the alias spectrum; optionally checked by Simpson"""
    check_derivative_order(q, s.spec.r)
    pc, ps = series_power(s, q)
    a0_term = s.coeffs.a0 ** 2 / 2.0 if q == 0 else 0.0
    series_value = math.fsum([a0_term, pc, ps])

    quad_value = quad_error = None
    if quadrature:
        panels = quadrature_panels(s.N, panels)
        quad_value = _spline_quadrature(s, q, panels)
        # Richardson estimate from halving the panel count
        quad_error = abs(quad_value - _spline_quadrature(s, q, panels // 2)) / 15.0
        logger.debug(f"Power q={q}: series={series_value!r} quadrature={quad_value!r} (±{quad_error:.2e})")

    return PowerReport(q=q, series_value=series_value, pc=pc, ps=ps, a0_term=a0_term,
                       quadrature_value=quad_value, quadrature_error=quad_error)


def spline_power(s: TrigSpline, q: int = 0) -> float:
    """P(St, q) by the series route only"""
    return power_spline_series(s, q, quadrature=False).series_value


def half_norm(obj: Union[TrigSpline, FourierCoeffs], n: int) -> float:
    """{∫|f^(n)|²}^(1/2) over [0, 2π], i.e. sqrt(π·P(f, n))"""
    if isinstance(obj, TrigSpline):
        value = spline_power(obj, n)
    elif isinstance(obj, FourierCoeffs):
        value = power_trigpoly(obj, n)
    else:
        raise ValidationError(f"half_norm expects a spline or polynomial coefficients, got {type(obj).__name__}")
    return math.sqrt(math.pi * max(value, 0.0))
