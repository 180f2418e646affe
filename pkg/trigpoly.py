import math
import logging
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple, Union

import numpy as np
import scipy.fft

from errors import NonFinite, ValidationError
from grid import TWO_PI, UniformGrid, wrap_array

# Configure logging
logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Function values f_i = f(t_i) on the nodes of a grid"""
    grid: UniformGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if values.shape[0] != self.grid.N:
            raise ValidationError(f"Expected {self.grid.N} samples, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise NonFinite("Sample values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_function(cls, grid: UniformGrid, fn: Callable[[np.ndarray], np.ndarray]) -> "SampleSet":
        """Sample a vectorized function on the grid nodes"""
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float))

    @property
    def scale(self) -> float:
        """1 + max|f|, the yardstick for absolute tolerances"""
        return 1.0 + float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class FourierCoeffs:
    """Coefficients a0, a_1..a_n, b_1..b_n of the interpolation polynomial T_n"""
    a0: float
    a: np.ndarray
    b: np.ndarray
    grid: UniformGrid

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def harmonics(self) -> np.ndarray:
        return np.arange(1, self.n + 1)


def dft_coeffs(samples: SampleSet, method: str = "direct") -> FourierCoeffs:
    """
    Interpolation coefficients a_k = (2/N)Σ f_j cos k t_j, b_k = (2/N)Σ f_j sin k t_j.
    method: "direct" evaluates the sums as written; "fft" goes through scipy.fft.
    """
    grid = samples.grid
    f = samples.values
    N = grid.N
    k = np.arange(0, grid.n + 1)

    if method == "direct":
        # Integer reduction of k*(j-1) keeps the angles exact for any k
        j = np.arange(N)
        angle = TWO_PI * np.mod(np.outer(k, j), N) / N + np.outer(k, np.full(N, grid.offset))
        a = (2.0 / N) * (np.cos(angle) @ f)
        b = (2.0 / N) * (np.sin(angle) @ f)
    elif method == "fft":
        spectrum = scipy.fft.fft(f)[: grid.n + 1]
        # Shifted grids pick up the phase e^{-ik·offset}
        spectrum = spectrum * np.exp(-1j * k * grid.offset)
        a = (2.0 / N) * spectrum.real
        b = -(2.0 / N) * spectrum.imag
    else:
        raise ValidationError(f"Unknown coefficient method {method!r}")

    a_k = np.array(a[1:], dtype=float)
    b_k = np.array(b[1:], dtype=float)
    a_k.setflags(write=False)
    b_k.setflags(write=False)
    return FourierCoeffs(a0=float(a[0]), a=a_k, b=b_k, grid=grid)


def _check_finite(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise NonFinite("Evaluation points must be finite")
    return t


def _harmonic_angles(k: np.ndarray, t: np.ndarray) -> np.ndarray:
    """k·t reduced mod 2π, shape (len(t), len(k))"""
    return np.mod(np.outer(wrap_array(t), k), TWO_PI)


def eval_trig_poly(c: FourierCoeffs, t: ArrayLike, q: int = 0) -> Union[float, np.ndarray]:
    """Evaluate T_n (or its q-th derivative) at t"""
    if q < 0:
        raise ValidationError(f"Derivative order must be non-negative, got {q}")
    t_arr = _check_finite(t)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)

    k = c.harmonics
    phase = _harmonic_angles(k, t_arr) + q * math.pi / 2.0
    weight = k.astype(float) ** q
    values = np.cos(phase) @ (c.a * weight) + np.sin(phase) @ (c.b * weight)
    if q == 0:
        values = values + c.a0 / 2.0

    return float(values[0]) if scalar else values


def eval_tm(grid: UniformGrid, k: int, t: ArrayLike) -> Union[float, np.ndarray]:
    """Fundamental trigonometric polynomial tm_k(t) = (1/N)[1 + 2Σ cos j(t - t_k)]"""
    t_k = grid.node(k)
    t_arr = _check_finite(t)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)

    j = np.arange(1, grid.n + 1)
    values = (1.0 + 2.0 * np.cos(_harmonic_angles(j, t_arr - t_k)).sum(axis=1)) / grid.N

    return float(values[0]) if scalar else values


def interpolate_via_fundamentals(samples: SampleSet, t: ArrayLike) -> Union[float, np.ndarray]:
    """T_n(t) written as Σ f_k tm_k(t)"""
    t_arr = _check_finite(t)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)

    basis = np.stack([eval_tm(samples.grid, k, t_arr) for k in range(1, samples.grid.N + 1)], axis=1)
    values = basis @ samples.values

    return float(values[0]) if scalar else values


def node_parseval(samples: SampleSet) -> Tuple[float, float]:
    """Both sides of a0²/2 + Σ(a_k² + b_k²) = (2/N)Σ f_j²"""
    c = dft_coeffs(samples)
    lhs = math.fsum([c.a0 ** 2 / 2.0, *(c.a ** 2), *(c.b ** 2)])
    rhs = 2.0 / samples.grid.N * math.fsum(samples.values ** 2)
    logger.debug(f"Node Parseval for N={samples.grid.N}: lhs={lhs!r} rhs={rhs!r}")
    return lhs, rhs
