"""
Classical periodic polynomial splines (broken line and cubic) on a uniform grid,
used as independent oracles for the trigonometric splines.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from errors import DerivativeOrderTooHigh, SingularSystem, ValidationError
from factors import FactorKind, TailControl
from grid import UniformGrid, wrap_array
from spline import SplineSpec, build_spline, sample_period
from trigpoly import SampleSet

# Configure logging
logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]


@dataclass(frozen=True, eq=False)
class PeriodicPolySpline:
    """Periodic spline of degree 1 or 3 with knots at the grid nodes; moments are nodal second derivatives"""
    grid: UniformGrid
    degree: int
    values: np.ndarray
    moments: np.ndarray


def solve_cyclic_tridiagonal(lower: ArrayLike, diag: ArrayLike, upper: ArrayLike, rhs: ArrayLike) -> np.ndarray:
    """
    Solve A x = rhs where row i is lower[i]·x[i-1] + diag[i]·x[i] + upper[i]·x[i+1], indices mod N.

    The corners A[0, N-1] = lower[0] and A[N-1, 0] = upper[N-1] are folded into a rank-one
    update (Sherman-Morrison); both banded solves share one solve_banded call.
    """
    rhs = np.asarray(rhs, dtype=float)
    N = rhs.shape[0]
    if N < 3:
        raise ValidationError(f"Cyclic system needs at least 3 unknowns, got {N}")
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (N,))
    diag = np.broadcast_to(np.asarray(diag, dtype=float), (N,)).copy()
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (N,))

    alpha = upper[N - 1]    # bottom-left corner
    beta = lower[0]         # top-right corner
    gamma = -diag[0]
    if gamma == 0.0:
        raise SingularSystem("Zero leading diagonal entry in cyclic system")

    diag[0] -= gamma
    diag[N - 1] -= alpha * beta / gamma

    ab = np.zeros((3, N))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]

    u = np.zeros(N)
    u[0] = gamma
    u[N - 1] = alpha
    try:
        solved = solve_banded((1, 1), ab, np.column_stack((rhs, u)))
    except (LinAlgError, ValueError) as e:
        raise SingularSystem(f"Banded solve failed: {str(e)}")

    y, z = solved[:, 0], solved[:, 1]
    denom = 1.0 + z[0] + beta * z[N - 1] / gamma
    if denom == 0.0 or not np.isfinite(denom):
        raise SingularSystem("Rank-one correction is singular")

    x = y - (y[0] + beta * y[N - 1] / gamma) / denom * z
    if not np.all(np.isfinite(x)):
        raise SingularSystem("Cyclic solve produced non-finite values")
    return x


def cubic_moment_system(samples: SampleSet):
    """Diagonals and right side of M_{j-1} + 4M_j + M_{j+1} = (6/h²)(f_{j-1} - 2f_j + f_{j+1})"""
    f = samples.values
    h = samples.grid.step
    rhs = 6.0 / h ** 2 * (np.roll(f, 1) - 2.0 * f + np.roll(f, -1))
    N = samples.grid.N
    return np.ones(N), np.full(N, 4.0), np.ones(N), rhs


def build_linear(samples: SampleSet) -> PeriodicPolySpline:
    """Periodic broken line through the samples"""
    N = samples.grid.N
    return PeriodicPolySpline(grid=samples.grid, degree=1, values=np.array(samples.values), moments=np.zeros(N))


def build_cubic_periodic(samples: SampleSet) -> PeriodicPolySpline:
    """Periodic cubic spline; moments solve the cyclic 1-4-1 system"""
    lower, diag, upper, rhs = cubic_moment_system(samples)
    moments = solve_cyclic_tridiagonal(lower, diag, upper, rhs)
    logger.debug(f"Cubic oracle N={samples.grid.N}: max |M| = {np.max(np.abs(moments)):.6g}")
    return PeriodicPolySpline(grid=samples.grid, degree=3, values=np.array(samples.values), moments=moments)


def eval_poly(s: PeriodicPolySpline, t: ArrayLike, q: int = 0) -> Union[float, np.ndarray]:
    """Piecewise evaluation of the q-th derivative with periodic wraparound"""
    if q < 0:
        raise ValidationError(f"Derivative order must be non-negative, got {q}")
    if q > s.degree:
        raise DerivativeOrderTooHigh(f"Derivative order {q} exceeds spline degree {s.degree}")

    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    u = wrap_array(np.atleast_1d(t_arr).ravel() - s.grid.offset)

    N, h = s.grid.N, s.grid.step
    j = np.minimum((u // h).astype(np.int64), N - 1)
    nxt = (j + 1) % N
    left = u - j * h           # t - x_j
    right = h - left           # x_{j+1} - t
    f0, f1 = s.values[j], s.values[nxt]

    if s.degree == 1:
        if q == 0:
            values = f0 + (f1 - f0) * left / h
        else:
            values = (f1 - f0) / h
    else:
        M0, M1 = s.moments[j], s.moments[nxt]
        if q == 0:
            values = (M0 * right ** 3 / (6.0 * h) + M1 * left ** 3 / (6.0 * h)
                      + (f0 - M0 * h ** 2 / 6.0) * right / h + (f1 - M1 * h ** 2 / 6.0) * left / h)
        elif q == 1:
            values = (-M0 * right ** 2 / (2.0 * h) + M1 * left ** 2 / (2.0 * h)
                      + (f1 - f0) / h - (M1 - M0) * h / 6.0)
        elif q == 2:
            values = (M0 * right + M1 * left) / h
        else:
            values = (M1 - M0) / h

    values = np.asarray(values, dtype=float)
    return float(values[0]) if scalar else values


def moments_via_trigspline(samples: SampleSet, tail: Optional[TailControl] = None) -> np.ndarray:
    """Second derivative of the simple ν1, r=3 trigonometric spline at the interpolation nodes"""
    I = samples.grid.indicator
    spec = SplineSpec.simple(FactorKind.NU1, 3, I, I, tail or TailControl())
    s = build_spline(samples, spec)
    _, moments = sample_period(s, samples.grid.N, q=2, offset=samples.grid.offset)
    return moments
