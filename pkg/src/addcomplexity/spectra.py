"""Marginal eigenvalue spectra.

A marginal spectrum is described by the eigenvalue ``lambda0`` that belongs to
the constant eigenvector and a non-increasing stream of the remaining
eigenvalues.  Streams may be infinite; every spectrum therefore carries its
exact reduced trace and a certified bound on the mass left after any prefix,
so that callers decide themselves how much of the stream they consume.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from itertools import count, islice
from typing import Callable, Iterator, Sequence

from .errors import ConfigurationError, DomainError, ValidationError

__all__ = [
    "zeta",
    "KorobovParams",
    "MarginalSpectrum",
    "SigmaRule",
    "SequenceModel",
    "korobov_eigenvalue",
    "korobov_spectrum",
    "explicit_spectrum",
    "marginal_at",
]

ZETA_TOL = 1e-13
ZETA_MIN_ARG = 1.0 + 1e-6

# B_2, B_4, ..., B_14
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6)


def _zeta_tail_terms(p: float, K: int) -> list[float]:
    """Euler-Maclaurin terms for sum_{k >= K} k**-p.

    The last entry is the first omitted correction; for x**-p its magnitude
    bounds the truncation error.
    """
    terms = [K ** (1.0 - p) / (p - 1.0), 0.5 * K**-p]
    rising = p  # p (p+1) ... (p+2i-2)
    fact = 2.0  # (2i)!
    for i, b in enumerate(_BERNOULLI, start=1):
        if i > 1:
            rising *= (p + 2 * i - 3) * (p + 2 * i - 2)
            fact *= (2 * i - 1) * (2 * i)
        terms.append(b / fact * rising * K ** (-p - 2 * i + 1))
    return terms


@functools.lru_cache(maxsize=1 << 16)
def zeta(p: float) -> float:
    """Riemann zeta function for real ``p > 1``.

    Direct summation of the first ``K - 1`` terms plus the integral tail
    ``K**(1-p)/(p-1)`` refined by Euler-Maclaurin corrections.  ``K`` is grown
    until the first omitted correction is below ``1e-13``.
    """
    p = float(p)
    if not p > 1.0 or math.isnan(p):
        raise DomainError(f"zeta requires p > 1, got {p!r}")
    if p < ZETA_MIN_ARG:
        raise DomainError(f"zeta argument {p!r} too close to the pole at 1")
    if p > 60.0:
        # 2**-60 is already below double resolution relative to 1
        return math.fsum(k**-p for k in range(1, 8))
    K = 8
    while True:
        tail = _zeta_tail_terms(p, K)
        if abs(tail[-1]) < ZETA_TOL:
            break
        K *= 2
    head = [k**-p for k in range(K - 1, 0, -1)]
    return math.fsum(head + tail[:-1])


@dataclass(frozen=True)
class KorobovParams:
    """Parameters of the Korobov covariance alpha + 2 beta sum k^-sigma cos(...).

    ``alpha = 0`` is admitted: the constant eigenvector then carries no mass,
    which is what the parametric families with ratio limit ``r = 0`` produce.
    """

    alpha: float
    beta: float
    sigma: float

    def __post_init__(self) -> None:
        if not (self.alpha >= 0.0 and math.isfinite(self.alpha)):
            raise DomainError(f"alpha must be finite and >= 0, got {self.alpha!r}")
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise DomainError(f"beta must be finite and > 0, got {self.beta!r}")
        if not self.sigma > 1.0:
            raise DomainError(f"sigma must be > 1, got {self.sigma!r}")


def korobov_eigenvalue(params: KorobovParams, k: int) -> float:
    """Eigenvalue number ``k`` of the Korobov kernel (``k = 0`` is alpha)."""
    if k < 0:
        raise DomainError(f"eigenvalue index must be >= 0, got {k}")
    if k == 0:
        return params.alpha
    m = (k + 1) // 2
    return params.beta * m**-params.sigma


@dataclass(frozen=True, eq=False)
class MarginalSpectrum:
    """Spectrum of one marginal covariance operator.

    ``values()`` returns a fresh iterator over the non-increasing eigenvalues
    with index ``k >= 1``; ``tail_bound(K)`` bounds the sum of everything after
    the first ``K`` of them.
    """

    lambda0: float
    reduced_trace: float
    _stream: Callable[[], Iterator[float]] = field(repr=False)
    _tail: Callable[[int], float] = field(repr=False)
    length: int | None = None
    params: KorobovParams | None = None

    @property
    def full_trace(self) -> float:
        return self.lambda0 + self.reduced_trace

    @property
    def is_finite(self) -> bool:
        return self.length is not None

    def values(self) -> Iterator[float]:
        return self._stream()

    def prefix(self, K: int) -> list[float]:
        return list(islice(self._stream(), K))

    def tail_bound(self, K: int) -> float:
        if K < 0:
            raise DomainError("prefix length must be >= 0")
        return self._tail(K)

    def first(self) -> float:
        """Largest eigenvalue of the reduced spectrum (0 when it is empty)."""
        return next(self._stream(), 0.0)


def _korobov_stream(beta: float, sigma: float) -> Iterator[float]:
    for m in count(1):
        v = beta * m**-sigma
        # both members of a pair share one computed value
        yield v
        yield v


def korobov_spectrum(params: KorobovParams) -> MarginalSpectrum:
    beta, sigma = params.beta, params.sigma
    reduced = 2.0 * beta * zeta(sigma)

    def tail(K: int) -> float:
        m = K // 2
        if m == 0:
            return reduced
        return 2.0 * beta * m ** (1.0 - sigma) / (sigma - 1.0)

    return MarginalSpectrum(
        lambda0=params.alpha,
        reduced_trace=reduced,
        _stream=lambda: _korobov_stream(beta, sigma),
        _tail=tail,
        params=params,
    )


def explicit_spectrum(lambda0: float, values: Sequence[float]) -> MarginalSpectrum:
    """Finite spectrum from an explicit non-increasing list."""
    vals = tuple(float(v) for v in values)
    lambda0 = float(lambda0)
    if not (lambda0 >= 0.0 and math.isfinite(lambda0)):
        raise ValidationError(f"lambda0 must be finite and >= 0, got {lambda0!r}")
    for i, v in enumerate(vals):
        if not (v >= 0.0 and math.isfinite(v)):
            raise ValidationError(f"eigenvalue #{i + 1} is negative or not finite: {v!r}")
        if i and v > vals[i - 1]:
            raise ValidationError(
                f"eigenvalues must be non-increasing: #{i} = {vals[i - 1]!r} < #{i + 1} = {v!r}"
            )
    # exact remaining sums, suffix_sums[K] = sum(vals[K:])
    suffix_sums = [math.fsum(vals[K:]) for K in range(len(vals) + 1)]

    def tail(K: int) -> float:
        return suffix_sums[min(K, len(vals))]

    return MarginalSpectrum(
        lambda0=lambda0,
        reduced_trace=suffix_sums[0],
        _stream=lambda: iter(vals),
        _tail=tail,
        length=len(vals),
    )


@dataclass(frozen=True)
class SigmaRule:
    """Decay exponent as a function of the marginal index ``j``."""

    kind: str = "log_affine"
    s0: float = 2.0
    s1: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("log_affine", "affine", "constant"):
            raise ConfigurationError(f"unknown sigma rule kind {self.kind!r}")

    def __call__(self, j: int) -> float:
        if self.kind == "log_affine":
            return self.s0 + self.s1 * math.log1p(j)
        if self.kind == "affine":
            return self.s0 + self.s1 * j
        return self.s0

    @property
    def diverges(self) -> bool:
        return self.kind != "constant" and self.s1 > 0


FAMILIES = ("korobov_parametric", "explicit_list", "homogeneous")


@dataclass(frozen=True)
class SequenceModel:
    """Rule producing the marginal spectrum of coordinate ``j = 1, 2, ...``.

    Use the constructors :meth:`korobov`, :meth:`explicit` and
    :meth:`homogeneous` rather than the raw initializer.
    """

    family: str
    c: float = 1.0
    tau: float = 0.0
    r: float = 0.0
    rho: float = 0.0
    sigma_rule: SigmaRule | None = None
    marginals: tuple[MarginalSpectrum, ...] = ()
    cycle: bool = False

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown model family {self.family!r}")
        if self.family == "korobov_parametric":
            if not self.c > 0:
                raise ConfigurationError(f"c must be > 0, got {self.c!r}")
            if not self.r >= 0:
                raise ConfigurationError(f"r must be >= 0, got {self.r!r}")
            if self.sigma_rule is None:
                raise ConfigurationError("korobov_parametric model needs a sigma rule")
        elif not self.marginals:
            raise ConfigurationError(f"{self.family} model needs at least one marginal")

    @classmethod
    def korobov(cls, c=1.0, tau=0.0, r=0.0, sigma_rule=None, rho=0.0) -> "SequenceModel":
        return cls(
            "korobov_parametric",
            c=float(c),
            tau=float(tau),
            r=float(r),
            rho=float(rho),
            sigma_rule=sigma_rule if sigma_rule is not None else SigmaRule(),
        )

    @classmethod
    def explicit(cls, marginals: Sequence[MarginalSpectrum], cycle=False) -> "SequenceModel":
        return cls("explicit_list", marginals=tuple(marginals), cycle=cycle)

    @classmethod
    def homogeneous(cls, spectrum: MarginalSpectrum) -> "SequenceModel":
        return cls("homogeneous", marginals=(spectrum,))

    @property
    def degenerate(self) -> bool:
        """Korobov family whose alpha/beta ratio diverges."""
        return self.family == "korobov_parametric" and math.isinf(self.r)

    def beta(self, j: int) -> float:
        return self.c * j**-self.tau

    def ratio(self, j: int) -> float:
        return self.r + self.rho / j

    def korobov_params(self, j: int) -> KorobovParams:
        if self.degenerate:
            raise ConfigurationError(
                f"marginal j={j}: r = inf cannot be materialized (alpha_j/beta_j diverges)"
            )
        beta = self.beta(j)
        try:
            return KorobovParams(alpha=self.ratio(j) * beta, beta=beta, sigma=self.sigma_rule(j))
        except DomainError as exc:
            raise ConfigurationError(f"marginal j={j}: {exc}") from exc

    def marginal(self, j: int) -> MarginalSpectrum:
        if j < 1:
            raise ConfigurationError(f"marginal index must be >= 1, got {j}")
        if self.family == "korobov_parametric":
            return _cached_korobov(self.korobov_params(j))
        if self.family == "homogeneous":
            return self.marginals[0]
        n = len(self.marginals)
        if j > n and not self.cycle:
            raise ConfigurationError(f"marginal j={j} requested but only {n} are listed")
        return self.marginals[(j - 1) % n]


@functools.lru_cache(maxsize=1 << 16)
def _cached_korobov(params: KorobovParams) -> MarginalSpectrum:
    return korobov_spectrum(params)


def marginal_at(model: SequenceModel, j: int) -> MarginalSpectrum:
    """The ``j``-th marginal spectrum of ``model`` (1-based)."""
    return model.marginal(j)
