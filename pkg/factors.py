import math
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Optional, Sequence, Tuple, Union

import numpy as np

import config
from errors import (AllZeroParams, DegenerateFactor, IndexOutOfRange, NonFinite,
                    TailBudgetExceeded, ValidationError)
from performance import cache_result

# Configure logging
logger = logging.getLogger(__name__)

# Alias indices handled per vectorized block
ALIAS_CHUNK = 65536


class FactorKind(str, Enum):
    """Convergence factor families ν1..ν4"""
    NU1 = "nu1"   # sinc(πk/N)^(1+r)
    NU2 = "nu2"   # |sinc(πk/N)|^(1+r)
    NU3 = "nu3"   # k^-(1+r)
    NU4 = "nu4"   # sign(sin(πk/N)) k^-(1+r)

    @classmethod
    def parse(cls, value: Union[str, "FactorKind"]) -> "FactorKind":
        if isinstance(value, FactorKind):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            choices = ", ".join(kind.value for kind in cls)
            raise ValidationError(f"Unknown convergence factor {value!r}; expected one of {choices}")

    @property
    def is_sinc(self) -> bool:
        return self in (FactorKind.NU1, FactorKind.NU2)


@dataclass(frozen=True)
class ParamVector:
    """Parameter vector Γ = (γ1, γ2, γ3) or H = (η1, η2, η3)"""
    g1: float
    g2: float
    g3: float

    def __post_init__(self):
        values = []
        for name in ('g1', 'g2', 'g3'):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise NonFinite(f"Parameter {name} must be finite, got {value!r}")
            values.append(value)
            object.__setattr__(self, name, value)
        if all(value == 0.0 for value in values):
            raise AllZeroParams("Parameter vector must not be all zeros")

    @classmethod
    def of(cls, values: Union["ParamVector", Sequence[float]]) -> "ParamVector":
        if isinstance(values, ParamVector):
            return values
        values = list(values)
        if len(values) != 3:
            raise ValidationError(f"Parameter vector needs three components, got {len(values)}")
        return cls(*values)

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.g1, self.g2, self.g3)

    def scaled(self, factor: float) -> "ParamVector":
        return ParamVector(self.g1 * factor, self.g2 * factor, self.g3 * factor)

    @property
    def has_aliases(self) -> bool:
        return self.g2 != 0.0 or self.g3 != 0.0

    @property
    def l1(self) -> float:
        return abs(self.g1) + abs(self.g2) + abs(self.g3)


@dataclass(frozen=True)
class TailControl:
    """How far the infinite alias sums are carried"""
    rel_tol: float = field(default_factory=config.default_tail_rel_tol)
    max_terms: int = field(default_factory=config.default_tail_max_terms)
    strict: bool = False
    degeneracy_tol: float = field(default_factory=config.degeneracy_rel_tol)

    def __post_init__(self):
        if not self.rel_tol > 0.0:
            raise ValidationError(f"Tail tolerance must be positive, got {self.rel_tol!r}")
        if int(self.max_terms) < 1:
            raise ValidationError(f"Tail term budget must be at least 1, got {self.max_terms!r}")
        object.__setattr__(self, 'max_terms', int(self.max_terms))

    def doubled(self) -> "TailControl":
        return replace(self, max_terms=2 * self.max_terms)


@dataclass(frozen=True)
class TailPlan:
    """Number of alias indices to sum and the relative accuracy that buys"""
    terms: int
    effective_tol: float
    relaxed: bool
    decay: int


@dataclass(frozen=True, eq=False)
class FactorTable:
    """Interpolation factors for k = 1..n with the tail plan used to sum them"""
    values: np.ndarray
    plan: TailPlan


def _sin_pi_ratio(j: np.ndarray, N: int) -> np.ndarray:
    """sin(πj/N) with j reduced exactly modulo 2N first"""
    reduced = np.mod(j, 2 * N)
    values = np.sin(np.pi * reduced / N)
    return np.where((reduced == 0) | (reduced == N), 0.0, values)


def nu_values(kind: FactorKind, j: np.ndarray, r: int, N: int) -> np.ndarray:
    """Vectorized convergence factors ν_j(r) for positive integer frequencies j"""
    j = np.asarray(j, dtype=np.int64)
    exponent = 1 + r

    if kind.is_sinc:
        sinc = _sin_pi_ratio(j, N) * N / (np.pi * j)
        if kind is FactorKind.NU1:
            return np.power(sinc, exponent)
        return np.power(np.abs(sinc), exponent)

    decay = np.power(j.astype(float), -float(exponent))
    if kind is FactorKind.NU3:
        return decay
    return np.sign(_sin_pi_ratio(j, N)) * decay


def nu(kind: FactorKind, k: int, r: int, N: int) -> float:
    """Convergence factor ν_k(r) of the given kind"""
    kind = FactorKind.parse(kind)
    if k < 1:
        raise IndexOutOfRange(f"Harmonic index must be positive, got {k}")
    if r < 1:
        raise ValidationError(f"Spline order must be at least 1, got {r}")
    return float(nu_values(kind, np.array([k]), r, N)[0])


def _log_abs_nu(kind: FactorKind, k: np.ndarray, r: int, N: int) -> np.ndarray:
    """log|ν_k(r)| computed without underflow"""
    if kind.is_sinc:
        return (1 + r) * np.log(np.abs(_sin_pi_ratio(k, N) * N / (np.pi * k)))
    return -(1 + r) * np.log(k.astype(float))


def alias_sign(m: np.ndarray, parity: int) -> np.ndarray:
    """(-1)^(m·parity) for alias indices m"""
    m = np.asarray(m)
    if parity % 2 == 0:
        return np.ones(m.shape)
    return np.where(m % 2 == 0, 1.0, -1.0)


def _tail_terms(kind: FactorKind, r: int, N: int, q: int, power: int) -> Tuple[int, float, float]:
    """Decay exponent, log of the bound constant and log of the leading-term scale"""
    decay = power * (1 + r - q)
    log_c = power * (1 + r) * math.log(N / math.pi) if kind.is_sinc else 0.0
    k = np.arange(1, (N - 1) // 2 + 1)
    log_scale = power * float(np.min(q * np.log(k) + _log_abs_nu(kind, k, r, N)))
    return decay, log_c, log_scale


def remainder_bound(kind: FactorKind, r: int, N: int, terms: int, q: int = 0, power: int = 1) -> float:
    """
    Relative bound on Σ_{m>terms} of the alias terms, each bounded by C·j^-(decay),
    using the integral of (xN - n)^-(decay) beyond the cut.
    """
    kind = FactorKind.parse(kind)
    decay, log_c, log_scale = _tail_terms(kind, r, N, q, power)
    if decay <= 1:
        return math.inf

    n = (N - 1) // 2
    log_bound = (math.log(2.0) + log_c - math.log(N * (decay - 1))
                 - (decay - 1) * math.log(terms * N - n) - log_scale)
    return math.exp(log_bound)


def tail_length(kind: FactorKind, r: int, N: int, rel_tol: float,
                max_terms: Optional[int] = None, q: int = 0, power: int = 1) -> int:
    """Smallest alias count M whose remainder bound is below rel_tol"""
    kind = FactorKind.parse(kind)
    if not rel_tol > 0.0:
        raise ValidationError(f"Tail tolerance must be positive, got {rel_tol!r}")
    max_terms = config.default_tail_max_terms() if max_terms is None else max_terms

    decay, log_c, log_scale = _tail_terms(kind, r, N, q, power)
    if decay <= 1:
        raise TailBudgetExceeded(
            f"Alias series with decay exponent {decay} has no finite tail bound",
            required_terms=math.inf, max_terms=max_terms)

    n = (N - 1) // 2
    log_target = (math.log(2.0) + log_c - math.log(N * (decay - 1))
                  - log_scale - math.log(rel_tol)) / (decay - 1)

    # (M·N - n) must reach exp(log_target)
    if log_target > math.log((max_terms + 1) * N):
        required = math.exp(min(log_target, 700.0)) / N
        raise TailBudgetExceeded(
            f"Tail for {kind.value}, r={r}, N={N}, q={q} needs about {required:.3g} terms "
            f"(budget {max_terms})", required_terms=required, max_terms=max_terms)

    terms = max(1, math.ceil((math.exp(log_target) + n) / N))
    if terms > max_terms:
        raise TailBudgetExceeded(
            f"Tail for {kind.value}, r={r}, N={N}, q={q} needs {terms} terms (budget {max_terms})",
            required_terms=terms, max_terms=max_terms)
    return terms


@cache_result(maxsize=1024)
def plan_tail(kind: FactorKind, r: int, N: int, tail: TailControl, q: int = 0, power: int = 1) -> TailPlan:
    """Certified tail length, or the budget with the looser tolerance it actually achieves"""
    kind = FactorKind.parse(kind)
    decay = power * (1 + r - q)
    try:
        terms = tail_length(kind, r, N, tail.rel_tol, tail.max_terms, q=q, power=power)
        plan = TailPlan(terms=terms, effective_tol=tail.rel_tol, relaxed=False, decay=decay)
    except TailBudgetExceeded as e:
        if tail.strict:
            raise
        effective = remainder_bound(kind, r, N, tail.max_terms, q=q, power=power)
        logger.info(f"{e}; relaxing to {tail.max_terms} terms (effective tolerance {effective:.3g})")
        plan = TailPlan(terms=tail.max_terms, effective_tol=effective, relaxed=True, decay=decay)

    logger.debug(f"Tail plan {kind.value} r={r} N={N} q={q} power={power}: {plan}")
    return plan


def alias_blocks(terms: int, chunk: int = ALIAS_CHUNK) -> Iterator[np.ndarray]:
    """Alias indices 1..terms in ascending blocks"""
    for start in range(1, terms + 1, chunk):
        yield np.arange(start, min(start + chunk, terms + 1), dtype=np.int64)


@cache_result(maxsize=512)
def _factor_table(params: ParamVector, kind: FactorKind, r: int, N: int, parity: int,
                  tail: TailControl) -> FactorTable:
    n = (N - 1) // 2
    k = np.arange(1, n + 1, dtype=np.int64)
    base = params.g1 * nu_values(kind, k, r, N)

    if params.has_aliases:
        plan = plan_tail(kind, r, N, tail)
        # Per-harmonic partial sums, each compensated; blocks in ascending m
        partials = [[float(value)] for value in base]
        for m in alias_blocks(plan.terms):
            sign = alias_sign(m, parity)[:, None]
            plus = sign * params.g2 * nu_values(kind, m[:, None] * N + k[None, :], r, N)
            minus = sign * params.g3 * nu_values(kind, m[:, None] * N - k[None, :], r, N)
            for i in range(n):
                partials[i].append(math.fsum(np.concatenate((plus[:, i], minus[:, i]))))
        values = np.array([math.fsum(parts) for parts in partials])
    else:
        plan = TailPlan(terms=0, effective_tol=0.0, relaxed=False, decay=1 + r)
        values = base

    # An unusable denominator cannot be patched up later
    scale = np.abs(nu_values(kind, k, r, N))
    threshold = tail.degeneracy_tol * params.l1 * scale
    bad = np.nonzero(np.abs(values) < threshold)[0]
    if bad.size:
        i = int(bad[0])
        raise DegenerateFactor(
            f"Interpolation factor for k={i + 1} is {values[i]:.3e}, below {threshold[i]:.3e} "
            f"(params={params.as_tuple()}, {kind.value}, r={r}, N={N})")

    values.setflags(write=False)
    return FactorTable(values=values, plan=plan)


def interpolation_factors(params: ParamVector, kind: FactorKind, r: int, N: int,
                          I1: int, I2: int, tail: Optional[TailControl] = None) -> FactorTable:
    """hc_k (or hs_k) for all k = 1..n; the sign pattern depends only on I1 - I2 mod 2"""
    kind = FactorKind.parse(kind)
    if r < 1:
        raise ValidationError(f"Spline order must be at least 1, got {r}")
    tail = tail or TailControl()
    parity = (int(I1) - int(I2)) % 2
    return _factor_table(ParamVector.of(params), kind, int(r), int(N), parity, tail)


def _single_factor(params, kind, k, r, N, I1, I2, tail) -> float:
    n = (N - 1) // 2
    if not 1 <= k <= n:
        raise IndexOutOfRange(f"Harmonic index {k} outside 1..{n}")
    return float(interpolation_factors(params, kind, r, N, I1, I2, tail).values[k - 1])


def hc(gamma: ParamVector, kind: FactorKind, k: int, r: int, N: int,
       I1: int, I2: int, tail: Optional[TailControl] = None) -> float:
    """Cosine interpolation factor hc_k^(I1,I2)(Γ, ν, r)"""
    return _single_factor(gamma, kind, k, r, N, I1, I2, tail)


def hs(eta: ParamVector, kind: FactorKind, k: int, r: int, N: int,
       I1: int, I2: int, tail: Optional[TailControl] = None) -> float:
    """Sine interpolation factor hs_k^(I1,I2)(H, ν, r)"""
    return _single_factor(eta, kind, k, r, N, I1, I2, tail)
