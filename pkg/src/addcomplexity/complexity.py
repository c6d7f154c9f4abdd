"""Exact average-case approximation complexity of additive fields.

``n(eps)`` is the smallest number of leading eigenvalues of the field's
covariance operator whose sum reaches ``(1 - eps**2)`` times the trace.  The
full eigenvalue sequence is the merged reduced stream with the constant
eigenvector's eigenvalue inserted at its sorted position.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .errors import ConsistencyError, DomainError, RegimeError, ResourceError, ValidationError
from .field import AdditiveField, assemble, epsilon_d, field_from_marginals, merged_stream
from .spectra import MarginalSpectrum, SequenceModel
from .summation import Neumaier

__all__ = [
    "ComplexityResult",
    "DEFAULT_TERM_CAP",
    "exact_complexity",
    "reduced_complexity",
    "homogeneous_complexity",
    "complexity_curve",
    "METHODS",
    "TIE_RTOL",
    "meets",
]

DEFAULT_TERM_CAP = 100_000_000
# partial sums within this relative distance of the threshold count as meeting it
TIE_RTOL = 1e-12
METHODS = ("exact", "reduced", "integral", "homogeneous")


@dataclass(frozen=True)
class ComplexityResult:
    n: int
    method: str
    threshold: float
    achieved_partial_sum: float
    terms_consumed: int


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")


def meets(partial: float, threshold: float) -> bool:
    """``partial >= threshold`` up to rounding in how the threshold was formed."""
    return partial >= threshold - TIE_RTOL * abs(threshold)


def _full_sequence(fld: AdditiveField):
    """Eigenvalues of the field in non-increasing order, lambda0 included.

    lambda0 goes in front of any merged value equal to it.
    """
    lam0 = fld.lambda0_sum
    pending = lam0 > 0.0
    for v, _ in merged_stream(fld):
        if pending and lam0 >= v:
            pending = False
            yield lam0
        yield v
    if pending:
        yield lam0


def _scan(values, threshold: float, term_cap: int) -> tuple[int, float]:
    acc = Neumaier()
    n = 0
    for v in values:
        n += 1
        if n > term_cap:
            raise ResourceError(f"term cap {term_cap} reached before the threshold")
        acc.add(v)
        s = acc.value
        if meets(s, threshold):
            return n, s
    raise ConsistencyError(
        f"spectrum exhausted after {n} terms with partial sum {acc.value!r} < threshold {threshold!r}"
    )


def exact_complexity(fld: AdditiveField, eps: float, term_cap: int = DEFAULT_TERM_CAP) -> ComplexityResult:
    """``min{n : sum of the n largest eigenvalues >= (1 - eps**2) * trace}``.

    Valid for every ``eps`` in (0, 1); at or above ``epsilon_d`` the answer is
    typically 1.
    """
    _check_eps(eps)
    threshold = (1.0 - eps * eps) * fld.full_trace
    n, s = _scan(_full_sequence(fld), threshold, term_cap)
    return ComplexityResult(n, "exact", threshold, s, n)


def _reduced_threshold(fld: AdditiveField, eps: float) -> float:
    _check_eps(eps)
    eps_d = epsilon_d(fld)
    if eps >= eps_d:
        raise RegimeError(f"eps={eps!r} >= epsilon_d={eps_d!r}: n=1 regime", kind="n=1")
    threshold = (fld.reduced_trace_sum / fld.full_trace - eps * eps) * fld.full_trace
    if not threshold > 0.0:
        raise RegimeError(f"eps={eps!r} indistinguishable from epsilon_d={eps_d!r}", kind="n=1")
    return threshold


def reduced_complexity(fld: AdditiveField, eps: float, term_cap: int = DEFAULT_TERM_CAP) -> ComplexityResult:
    """Count of reduced eigenvalues needed once lambda0 is taken for free.

    Satisfies ``reduced <= exact <= reduced + 1``.
    """
    threshold = _reduced_threshold(fld, eps)
    n, s = _scan((v for v, _ in merged_stream(fld)), threshold, term_cap)
    return ComplexityResult(n, "reduced", threshold, s, n)


def homogeneous_complexity(
    spectrum: MarginalSpectrum, d: int, eps: float, term_cap: int = DEFAULT_TERM_CAP
) -> ComplexityResult:
    """Complexity of ``d`` identical marginals via the one-marginal quantile integral.

    The integral gives ``ñ`` with ``ñ <= n <= ñ + 1``; the side is settled by
    checking the partial sums at ``ñ - 1``, ``ñ`` and ``ñ + 1`` directly, so
    the result agrees with :func:`exact_complexity`.
    """
    from .spectral_df import build_Fd, exp_quantile_integral, tolerant_ceil

    if d < 1:
        raise ValidationError(f"dimension must be >= 1, got {d}")
    _check_eps(eps)
    single = field_from_marginals([spectrum])
    eps0 = epsilon_d(single)
    if eps >= eps0:
        raise RegimeError(f"eps={eps!r} >= epsilon_0={eps0!r}: n=1 regime", kind="n=1")
    level = 1.0 - (eps / eps0) ** 2
    F = build_Fd(single, level + min(1e-9, (1.0 - level) / 2), term_cap=term_cap)
    n_tilde = max(1, tolerant_ceil(d * spectrum.reduced_trace * exp_quantile_integral(F, level)))

    fld = field_from_marginals([spectrum] * d)
    threshold = (1.0 - eps * eps) * fld.full_trace
    if n_tilde + 1 > term_cap:
        raise ResourceError(f"term cap {term_cap} below the predicted complexity {n_tilde}")
    acc = Neumaier()
    sums = []
    for v in _full_sequence(fld):
        acc.add(v)
        sums.append(acc.value)
        if len(sums) == n_tilde + 1:
            break
    below = n_tilde < 2 or not meets(sums[n_tilde - 2], threshold)
    for n in (n_tilde, n_tilde + 1):
        if below and n <= len(sums) and meets(sums[n - 1], threshold):
            return ComplexityResult(n, "homogeneous", threshold, sums[n - 1], n)
    # knife-edge rounding in the integral: fall back to the full scan
    n, s = _scan(_full_sequence(fld), threshold, term_cap)
    return ComplexityResult(n, "homogeneous", threshold, s, n)


def _point(model: SequenceModel, d: int, eps: float, method: str, term_cap: int):
    try:
        if method == "homogeneous":
            if model.family != "homogeneous":
                raise ValidationError("homogeneous method needs a homogeneous model")
            return homogeneous_complexity(model.marginals[0], d, eps, term_cap)
        fld = assemble(model, d)
        if method == "exact":
            return exact_complexity(fld, eps, term_cap)
        if method == "reduced":
            return reduced_complexity(fld, eps, term_cap)
        if method == "integral":
            from .spectral_df import integral_complexity

            return integral_complexity(fld, eps, term_cap)
    except RegimeError as exc:
        return exc
    raise ValidationError(f"unknown method {method!r}")


def complexity_curve(
    model: SequenceModel,
    eps: float,
    d_grid: Sequence[int],
    method: str = "exact",
    threads: int = 1,
    term_cap: int = DEFAULT_TERM_CAP,
) -> list[tuple[int, ComplexityResult | RegimeError]]:
    """Evaluate ``method`` at each ``d`` of the grid.

    Grid points where the method is undefined carry the :class:`RegimeError`
    instead of a result.  Output order follows the grid regardless of
    ``threads``.
    """
    grid = list(d_grid)
    if not grid:
        raise ValidationError("d_grid must be non-empty")
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}")
    if threads <= 1:
        results = [_point(model, d, eps, method, term_cap) for d in grid]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda d: _point(model, d, eps, method, term_cap), grid))
    return list(zip(grid, results))
