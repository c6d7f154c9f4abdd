"""Asymptotic predictors for ``n(eps)`` as the dimension grows.

Two general predictors are provided, both driven by a :class:`LimitSpec`:

* sharp asymptotics ``e^{a_d} * sum_j trace_j * ∫_0^{1-(eps/eps0)^2} exp(F^{-1})``
  where ``F`` convolves the limit ``U`` of the per-marginal distributions with
  the limit ``W`` of the trace weights;
* logarithmic asymptotics ``ln sum_j trace_j + a_d + F^{-1}(1-(eps/eps0)^2) b_d``
  for families that need a diverging norming sequence ``b_d``.

For the parametric Korobov family the limits are known in closed form and
shipped as presets, together with the resulting linear (``tau < 1``) and
log-linear (``tau = 1``) growth laws.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

from .complexity import DEFAULT_TERM_CAP, exact_complexity
from .errors import DomainError, InsufficientCoverageError, RegimeError, ValidationError
from .field import assemble, epsilon_0, trace_divergence_probe
from .spectra import SequenceModel
from .spectral_df import MASS_TOL, StepDistribution, build_Uj

__all__ = [
    "LeftExponential",
    "RightExponential",
    "UniformLimit",
    "LimitSpec",
    "AsymptoticPrediction",
    "ReportRow",
    "reflect",
    "shift",
    "convolve_limit",
    "limit_F",
    "korobov_limit_spec",
    "homogeneous_limit_spec",
    "theorem2_prediction",
    "theorem3_log_prediction",
    "korobov_epsilon0",
    "korobov_Q",
    "korobov_linear_prediction",
    "korobov_log_prediction",
    "convergence_report",
]


def _check_level(y: float) -> None:
    if not 0.0 <= y <= 1.0:
        raise DomainError(f"probability level {y!r} outside [0, 1]")


@dataclass(frozen=True)
class LeftExponential:
    """``exp(rate (x - at))`` below ``at``, 1 from ``at`` on."""

    rate: float
    at: float = 0.0
    covered_mass = 1.0
    complete = True

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise DomainError(f"rate must be > 0, got {self.rate!r}")

    def cdf(self, x: float) -> float:
        return math.exp(self.rate * (x - self.at)) if x < self.at else 1.0

    __call__ = cdf

    def quantile(self, y: float) -> float:
        _check_level(y)
        return self.at + math.log(y) / self.rate

    def exp_quantile_integral(self, p: float) -> float:
        _check_level(p)
        k = 1.0 + 1.0 / self.rate
        return math.exp(self.at) * p**k / k

    def reflected(self) -> "RightExponential":
        return RightExponential(self.rate, -self.at)

    def shifted(self, s: float) -> "LeftExponential":
        return LeftExponential(self.rate, self.at + s)


@dataclass(frozen=True)
class RightExponential:
    """``1 - exp(-rate (x - at))`` above ``at``, 0 below."""

    rate: float
    at: float = 0.0
    covered_mass = 1.0
    complete = True

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise DomainError(f"rate must be > 0, got {self.rate!r}")

    def cdf(self, x: float) -> float:
        return -math.expm1(-self.rate * (x - self.at)) if x >= self.at else 0.0

    __call__ = cdf

    def quantile(self, y: float) -> float:
        _check_level(y)
        return self.at - math.log1p(-y) / self.rate

    def exp_quantile_integral(self, p: float) -> float:
        _check_level(p)
        a = 1.0 / self.rate
        if a == 1.0:
            core = -math.log1p(-p)
        else:
            core = -math.expm1((1.0 - a) * math.log1p(-p)) / (1.0 - a)
        return math.exp(self.at) * core

    def reflected(self) -> LeftExponential:
        return LeftExponential(self.rate, -self.at)

    def shifted(self, s: float) -> "RightExponential":
        return RightExponential(self.rate, self.at + s)


@dataclass(frozen=True)
class UniformLimit:
    """Uniform distribution function on ``[lo, hi]``."""

    lo: float = 0.0
    hi: float = 1.0
    covered_mass = 1.0
    complete = True

    def __post_init__(self) -> None:
        if not self.hi > self.lo:
            raise DomainError("uniform limit needs hi > lo")

    def cdf(self, x: float) -> float:
        return min(max((x - self.lo) / (self.hi - self.lo), 0.0), 1.0)

    __call__ = cdf

    def quantile(self, y: float) -> float:
        _check_level(y)
        return self.lo + y * (self.hi - self.lo)

    def exp_quantile_integral(self, p: float) -> float:
        _check_level(p)
        w = self.hi - self.lo
        return math.exp(self.lo) * math.expm1(w * p) / w

    def reflected(self) -> "UniformLimit":
        return UniformLimit(-self.hi, -self.lo)

    def shifted(self, s: float) -> "UniformLimit":
        return UniformLimit(self.lo + s, self.hi + s)


def reflect(W):
    """``1 - W(-x - 0)``: the law of ``-V`` for ``V ~ W``."""
    if isinstance(W, StepDistribution):
        if not W.complete:
            raise InsufficientCoverageError("cannot reflect a truncated distribution")
        return StepDistribution.from_atoms(((-x, m) for x, m in W.atoms), covered_mass=1.0)
    return W.reflected()


def shift(W, s: float):
    """Law of ``V + s``."""
    if isinstance(W, StepDistribution):
        locs = tuple(x + s for x in W.locations)
        return StepDistribution(locs, W.masses, W.covered_mass, W.tail_location + s)
    return W.shifted(s)


def _point_mass_location(D) -> float | None:
    if isinstance(D, StepDistribution) and len(D.locations) == 1 and D.complete:
        return D.locations[0]
    return None


def convolve_limit(U: StepDistribution, W: StepDistribution, sign: int) -> StepDistribution:
    """Law of ``u + sign * w`` for independent atomic ``u ~ U``, ``w ~ W``."""
    if sign not in (1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign!r}")
    for name, D in (("U", U), ("W", W)):
        if not D.complete:
            raise InsufficientCoverageError(f"{name} covers only {D.covered_mass!r} of its mass")
    atoms = ((u + sign * w, mu * mw) for u, mu in U.atoms for w, mw in W.atoms)
    return StepDistribution.from_atoms(atoms, covered_mass=1.0)


def limit_F(U, W, sign: int):
    """Limit distribution combining ``U`` and ``W``.

    Exact atomic convolution for two complete step distributions; when one
    side is a point mass the other side is shifted (and reflected for
    ``sign = -1``), which also covers closed-form and truncated inputs.
    """
    u0 = _point_mass_location(U)
    w0 = _point_mass_location(W)
    if u0 is not None and not isinstance(W, StepDistribution):
        return shift(reflect(W) if sign < 0 else W, u0)
    if w0 is not None:
        return shift(U, sign * w0)
    if isinstance(U, StepDistribution) and isinstance(W, StepDistribution):
        return convolve_limit(U, W, sign)
    raise ValidationError("convolution of two non-atomic limits is not supported")


@dataclass(frozen=True)
class LimitSpec:
    """Centering ``ell_j``, sign, ``a_d``, optional norming ``b_d``, limits U, W."""

    ell: Callable[[int], float]
    sign: int
    a_d: Callable[[int], float]
    U: object
    W: object
    b_d: Callable[[int], float] | None = None

    def __post_init__(self) -> None:
        if self.sign not in (1, -1):
            raise DomainError(f"sign must be +1 or -1, got {self.sign!r}")


@dataclass(frozen=True)
class AsymptoticPrediction:
    d: int
    constant_part: float
    predicted_n: float | None = None
    predicted_log_n: float | None = None


def korobov_limit_spec(c: float, tau: float) -> LimitSpec:
    """Preset limits for ``beta_j ~ c j^-tau`` with ``sigma_j -> inf``."""
    if tau > 1:
        raise RegimeError(f"tau={tau!r} > 1: traces converge and n(eps) stays bounded", kind="bounded")
    point = StepDistribution.point_mass(0.0)
    lnc = math.log(c)
    if tau == 1:
        return LimitSpec(
            ell=lambda j: -lnc + math.log(j),
            sign=1,
            a_d=lambda d: 0.0,
            b_d=lambda d: math.log(d),
            U=point,
            W=UniformLimit(0.0, 1.0),
        )

    def ell(j: int) -> float:
        return -lnc + tau * math.log(j)

    if tau == 0:
        W = point
    else:
        W = LeftExponential((1.0 - tau) / abs(tau))
    return LimitSpec(ell=ell, sign=1 if tau >= 0 else -1, a_d=ell, U=point, W=W)


def homogeneous_limit_spec(model: SequenceModel) -> LimitSpec:
    """Trivial limits of a homogeneous model: ``U`` is its own F, ``W`` a point mass."""
    if model.family != "homogeneous":
        raise ValidationError("homogeneous limit spec needs a homogeneous model")
    spectrum = model.marginals[0]
    target = 1.0 if spectrum.is_finite else 1.0 - 1e-9
    return LimitSpec(
        ell=lambda j: 0.0,
        sign=1,
        a_d=lambda d: 0.0,
        U=build_Uj(spectrum, 0.0, target),
        W=StepDistribution.point_mass(0.0),
    )


def _level(model: SequenceModel, eps: float) -> float:
    eps0 = epsilon_0(model)
    if not 0.0 < eps < eps0:
        raise RegimeError(f"eps={eps!r} outside (0, epsilon_0={eps0!r})", kind="n=1")
    return 1.0 - (eps / eps0) ** 2


def _reduced_trace_sum(model: SequenceModel, d: int) -> float:
    return trace_divergence_probe(model, [d])[0][1]


def theorem2_prediction(model: SequenceModel, d: int, eps: float, spec: LimitSpec) -> AsymptoticPrediction:
    """Sharp prediction ``e^{a_d} * (sum of reduced traces) * ∫_0^p exp(F^{-1})``
    with ``p = 1 - (eps/eps0)**2`` and ``F`` combining ``U`` and ``W``."""
    if spec.b_d is not None:
        raise ValidationError("sharp asymptotics take no norming sequence b_d")
    p = _level(model, eps)
    F = limit_F(spec.U, spec.W, spec.sign)
    if p > F.covered_mass + MASS_TOL:
        raise InsufficientCoverageError(f"level {p!r} beyond covered mass {F.covered_mass!r}")
    constant = F.exp_quantile_integral(min(p, F.covered_mass))
    n = math.exp(spec.a_d(d)) * _reduced_trace_sum(model, d) * constant
    return AsymptoticPrediction(d, constant, predicted_n=n)


def theorem3_log_prediction(model: SequenceModel, d: int, eps: float, spec: LimitSpec) -> AsymptoticPrediction:
    """Log-scale prediction; ``1 - (eps/eps0)**2`` must be a continuity point of
    the quantile function (not checked)."""
    if spec.b_d is None:
        raise ValidationError("logarithmic asymptotics need a norming sequence b_d")
    p = _level(model, eps)
    F = spec.W if spec.sign > 0 else reflect(spec.W)
    q = F.quantile(p)
    log_n = math.log(_reduced_trace_sum(model, d)) + spec.a_d(d) + q * spec.b_d(d)
    return AsymptoticPrediction(d, q, predicted_log_n=log_n)


def korobov_epsilon0(r: float) -> float:
    if not r >= 0 or math.isinf(r):
        raise DomainError(f"r must be finite and >= 0, got {r!r}")
    return (1.0 + r / 2.0) ** -0.5


def korobov_Q(eps: float, tau: float, eps0: float) -> float:
    if not tau < 1:
        raise DomainError(f"tau must be < 1, got {tau!r}")
    if not 0.0 < eps0 <= 1.0:
        raise DomainError(f"eps0 must lie in (0, 1], got {eps0!r}")
    if not 0.0 < eps < eps0:
        raise DomainError(f"eps must lie in (0, eps0={eps0!r}), got {eps!r}")
    x = eps / eps0
    if tau >= 0:
        return (1.0 - x * x) ** (1.0 / (1.0 - tau))
    return 1.0 - x ** (2.0 / (1.0 - tau))


def korobov_linear_prediction(d: int, eps: float, tau: float, eps0: float) -> float:
    return 2.0 * korobov_Q(eps, tau, eps0) * d


def korobov_log_prediction(d: int, eps: float, eps0: float) -> float:
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    if not 0.0 < eps < eps0:
        raise DomainError(f"eps must lie in (0, eps0={eps0!r}), got {eps!r}")
    return (1.0 - (eps / eps0) ** 2) * math.log(d)


@dataclass(frozen=True)
class ReportRow:
    d: int
    exact: int | None
    prediction: float | None
    ratio: float | None = None
    log_difference: float | None = None
    flag: str = ""


def convergence_report(
    model: SequenceModel,
    eps: float,
    d_grid: Sequence[int],
    threads: int = 1,
    term_cap: int = DEFAULT_TERM_CAP,
) -> list[ReportRow]:
    """Exact complexity against the Korobov growth law along ``d_grid``.

    ``tau < 1`` compares with ``2 Q(eps) d`` (ratio column), ``tau = 1`` with
    ``(1 - (eps/eps0)^2) ln d`` (log-difference column).  ``tau > 1`` and
    ``r = inf`` are flagged ``bounded`` / ``degenerate`` without prediction.
    """
    grid = list(d_grid)
    if not grid:
        raise ValidationError("d_grid must be non-empty")
    if model.family != "korobov_parametric":
        raise ValidationError("convergence report needs a korobov_parametric model")
    if model.degenerate:
        return [ReportRow(d, None, None, flag="degenerate") for d in grid]
    tau = model.tau
    eps0 = epsilon_0(model)

    def row(d: int) -> ReportRow:
        n = exact_complexity(assemble(model, d), eps, term_cap).n
        if tau > 1:
            return ReportRow(d, n, None, flag="bounded")
        if eps >= eps0:
            return ReportRow(d, n, None, flag="regime:n=1")
        if tau < 1:
            pred = korobov_linear_prediction(d, eps, tau, eps0)
            return ReportRow(d, n, pred, ratio=n / pred)
        if d < 2:
            return ReportRow(d, n, None, flag="regime:d<2")
        pred = korobov_log_prediction(d, eps, eps0)
        return ReportRow(d, n, pred, log_difference=math.log(n) - pred)

    if threads <= 1:
        return [row(d) for d in grid]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(row, grid))
