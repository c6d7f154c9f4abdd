"""Eigenvalue-weighted distribution functions on the log scale.

Each reduced eigenvalue ``v`` of a field (or of one marginal) becomes mass
``v / trace`` at location ``-ln v``.  The resulting distribution is a pure
step function; its generalized inverse integrates exactly, and the
integral of ``exp(F^{-1})`` up to ``1 - (eps/eps_d)**2`` times the reduced
trace recovers the reduced complexity up to the ceiling.

Atoms group bit-identical eigenvalues only.  Values that differ in the last
bits (say, a pair computed by two different formulas) become separate atoms.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

from .complexity import DEFAULT_TERM_CAP, TIE_RTOL, ComplexityResult, _reduced_threshold
from .errors import DomainError, InsufficientCoverageError, ResourceError, ValidationError
from .field import AdditiveField, epsilon_d, merged_stream
from .spectra import MarginalSpectrum, SequenceModel, marginal_at
from .summation import Neumaier

__all__ = [
    "StepDistribution",
    "tolerant_ceil",
    "build_Fd",
    "build_Uj",
    "build_Wd",
    "quantile",
    "exp_quantile_integral",
    "integral_complexity",
    "count_and_defect",
    "sup_distance",
    "midpoint_grid",
]

MASS_TOL = 1e-12
CEIL_RTOL = TIE_RTOL


def tolerant_ceil(x: float, rtol: float = CEIL_RTOL) -> int:
    """Ceiling that treats values within ``rtol`` (relative) of an integer
    as that integer, absorbing rounding in sums of ``exp(-ln v) * v`` terms."""
    r = round(x)
    if abs(x - r) <= rtol * max(1.0, abs(x)):
        return int(r)
    return math.ceil(x)


@dataclass(frozen=True)
class StepDistribution:
    """Purely atomic distribution function, possibly truncated.

    ``covered_mass`` is the total mass of the listed atoms (1 when nothing
    was cut off); ``tail_location`` bounds from below the location of any
    atom that was not materialized.
    """

    locations: tuple[float, ...]
    masses: tuple[float, ...]
    covered_mass: float = None  # type: ignore[assignment]
    tail_location: float = math.inf
    cumulative: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        locs = tuple(float(x) for x in self.locations)
        masses = tuple(float(m) for m in self.masses)
        if len(locs) != len(masses):
            raise ValidationError("locations and masses differ in length")
        if not locs:
            raise ValidationError("a step distribution needs at least one atom")
        if any(b <= a for a, b in zip(locs, locs[1:])):
            raise ValidationError("atom locations must be strictly increasing")
        if any(not m > 0.0 for m in masses):
            raise ValidationError("atom masses must be positive")
        acc = Neumaier()
        cum = []
        for m in masses:
            acc.add(m)
            cum.append(acc.value)
        covered = cum[-1] if self.covered_mass is None else float(self.covered_mass)
        if abs(covered - cum[-1]) > MASS_TOL or not 0.0 < covered <= 1.0 + MASS_TOL:
            raise ValidationError(f"covered_mass {covered!r} inconsistent with atom masses {cum[-1]!r}")
        # pin the last level so F(last atom) == covered_mass exactly
        cum[-1] = covered
        for i in range(len(cum) - 2, -1, -1):
            if cum[i] > covered:
                cum[i] = covered
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "covered_mass", covered)
        object.__setattr__(self, "cumulative", tuple(cum))

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple[float, float]], **kw) -> "StepDistribution":
        """Group bit-identical locations, drop zero masses, sort."""
        grouped: dict[float, float] = {}
        for x, m in atoms:
            if m > 0.0:
                grouped[x] = grouped.get(x, 0.0) + m
        locs = sorted(grouped)
        return cls(tuple(locs), tuple(grouped[x] for x in locs), **kw)

    @classmethod
    def point_mass(cls, at: float = 0.0) -> "StepDistribution":
        return cls((float(at),), (1.0,), 1.0)

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.locations, self.masses))

    @property
    def complete(self) -> bool:
        return abs(self.covered_mass - 1.0) <= MASS_TOL

    def cdf(self, x: float) -> float:
        i = bisect_right(self.locations, x)
        return self.cumulative[i - 1] if i else 0.0

    __call__ = cdf

    def _check_level(self, y: float, lower_open: bool) -> float:
        if math.isnan(y) or y < 0.0 or (lower_open and y == 0.0):
            raise DomainError(f"probability level {y!r} outside the domain")
        if y > self.covered_mass:
            if not self.complete:
                raise InsufficientCoverageError(
                    f"level {y!r} beyond covered mass {self.covered_mass!r} of a truncated distribution"
                )
            if y > 1.0 + MASS_TOL:
                raise DomainError(f"probability level {y!r} exceeds 1")
            # masses summing to 1 - ulp still mean total mass 1
            y = self.covered_mass
        return y

    def quantile(self, y: float) -> float:
        """Generalized inverse ``inf{x : F(x) >= y}`` for ``0 < y <= covered_mass``."""
        y = self._check_level(y, lower_open=True)
        return self.locations[bisect_left(self.cumulative, y)]

    def exp_quantile_integral(self, p: float) -> float:
        """``∫_0^p exp(F^{-1}(y)) dy``, integrated plateau by plateau."""
        p = self._check_level(p, lower_open=False)
        if p == 0.0:
            return 0.0
        k = bisect_left(self.cumulative, p)
        parts = [math.exp(x) * m for x, m in zip(self.locations[:k], self.masses[:k])]
        below = self.cumulative[k - 1] if k else 0.0
        parts.append(math.exp(self.locations[k]) * (p - below))
        return math.fsum(parts)


def quantile(df, y: float) -> float:
    return df.quantile(y)


def exp_quantile_integral(df, p: float) -> float:
    return df.exp_quantile_integral(p)


@dataclass
class _Atoms:
    dist: StepDistribution
    values: list[float]
    mults: list[int]
    consumed: int


def _atoms_from_descending(
    values: Iterator[float], total: float, mass_target: float, shift: float, term_cap: int
) -> _Atoms:
    """Group a non-increasing stream into atoms until ``mass_target`` is covered."""
    vals: list[float] = []
    mults: list[int] = []
    acc = Neumaier()
    consumed = 0
    cur, mult = None, 0
    tail = math.inf
    exhausted = True
    for v in values:
        if v == cur:
            mult += 1
        else:
            if cur is not None:
                vals.append(cur)
                mults.append(mult)
                acc.add(mult * cur)
                if acc.value / total >= mass_target:
                    tail = -math.log(v) - shift if v > 0.0 else math.inf
                    exhausted = False
                    break
            if not v > 0.0:
                # zeros carry no mass; everything after them is zero too
                cur = None
                break
            cur, mult = v, 1
        consumed += 1
        if consumed > term_cap:
            raise ResourceError(
                f"mass target {mass_target!r} not reached within {term_cap} eigenvalues"
            )
    else:
        if cur is not None:
            vals.append(cur)
            mults.append(mult)
            acc.add(mult * cur)
    if not vals:
        raise ValidationError("spectrum has no positive eigenvalue")
    locs = [-math.log(v) - shift for v in vals]
    masses = [m * v / total for v, m in zip(vals, mults)]
    covered = 1.0 if exhausted else acc.value / total
    dist = StepDistribution(tuple(locs), tuple(masses), min(covered, 1.0), tail)
    return _Atoms(dist, vals, mults, consumed)


def _check_target(mass_target: float, upper_closed: bool) -> None:
    ok = 0.0 < mass_target <= 1.0 if upper_closed else 0.0 < mass_target < 1.0
    if not ok:
        raise DomainError(f"mass target {mass_target!r} outside the admissible range")


def _fd_atoms(fld: AdditiveField, mass_target: float, term_cap: int) -> _Atoms:
    _check_target(mass_target, upper_closed=False)
    stream = (v for v, _ in merged_stream(fld))
    return _atoms_from_descending(stream, fld.reduced_trace_sum, mass_target, 0.0, term_cap)


def build_Fd(fld: AdditiveField, mass_target: float, term_cap: int = DEFAULT_TERM_CAP) -> StepDistribution:
    """Distribution of ``-ln v`` weighted by ``v / reduced trace`` over the field."""
    return _fd_atoms(fld, mass_target, term_cap).dist


def build_Uj(
    marginal: MarginalSpectrum,
    shift: float = 0.0,
    mass_target: float = 1.0 - 1e-9,
    term_cap: int = DEFAULT_TERM_CAP,
) -> StepDistribution:
    """Per-marginal analogue of ``build_Fd`` with locations moved by ``-shift``.

    ``mass_target = 1`` is only reachable for finite spectra.
    """
    _check_target(mass_target, upper_closed=True)
    if not marginal.reduced_trace > 0.0:
        raise ValidationError("marginal has an empty reduced spectrum")
    return _atoms_from_descending(
        marginal.values(), marginal.reduced_trace, mass_target, shift, term_cap
    ).dist


def build_Wd(
    model: SequenceModel,
    d: int,
    ell: Callable[[int], float],
    a_d: float = 0.0,
    b_d: float = 1.0,
    sign: int = 1,
) -> StepDistribution:
    """Trace-weighted distribution of the centred, normed shifts ``ell_j``."""
    if d < 1:
        raise ValidationError(f"dimension must be >= 1, got {d}")
    if not b_d > 0.0:
        raise DomainError(f"norming constant must be > 0, got {b_d!r}")
    if sign not in (1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign!r}")
    weights: dict[float, list[float]] = {}
    for j in range(1, d + 1):
        x = sign * (ell(j) - a_d) / b_d
        weights.setdefault(x, []).append(marginal_at(model, j).reduced_trace)
    total = math.fsum(w for ws in weights.values() for w in ws)
    locs = sorted(weights)
    return StepDistribution(tuple(locs), tuple(math.fsum(weights[x]) / total for x in locs), 1.0)


def _located(fld: AdditiveField, eps: float, term_cap: int) -> tuple[_Atoms, int, float]:
    """Atoms of ``F_d`` covering the level ``1 - (eps/eps_d)**2``, the index of
    the atom holding it, and the level itself.

    A level within rounding of a cumulative mass boundary is moved onto it.
    """
    level = 1.0 - (eps / epsilon_d(fld)) ** 2
    atoms = _fd_atoms(fld, level + min(1e-9, (1.0 - level) / 2), term_cap)
    cum = atoms.dist.cumulative
    k = bisect_left(cum, level)
    if k > 0 and level - cum[k - 1] <= TIE_RTOL * level:
        k -= 1
    if abs(cum[k] - level) <= TIE_RTOL * level:
        level = cum[k]
    return atoms, k, level


def integral_complexity(fld: AdditiveField, eps: float, term_cap: int = DEFAULT_TERM_CAP) -> ComplexityResult:
    """Reduced complexity from the quantile integral of ``F_d``.

    Lies within one of :func:`~addcomplexity.complexity.exact_complexity`
    (never above it).
    """
    threshold = _reduced_threshold(fld, eps)
    atoms, _, level = _located(fld, eps, term_cap)
    value = fld.reduced_trace_sum * atoms.dist.exp_quantile_integral(level)
    n = max(1, tolerant_ceil(value))
    # partial sum of the n largest reduced eigenvalues, from the atoms
    parts = []
    left = n
    for v, m in zip(atoms.values, atoms.mults):
        take = min(left, m)
        parts.append(take * v)
        left -= take
        if not left:
            break
    return ComplexityResult(n, "integral", threshold, math.fsum(parts), n)


def count_and_defect(fld: AdditiveField, eps: float, term_cap: int = DEFAULT_TERM_CAP) -> tuple[float, float]:
    """Split of the reduced complexity into a count and an overshoot.

    ``count`` is the reduced trace times the quantile integral up to the
    mass level ``p_d`` of the atom that holds ``1 - (eps/eps_d)**2``;
    ``defect`` is the part of that integral beyond the level.  The ceiling
    of ``count - defect`` is the reduced complexity.
    """
    _reduced_threshold(fld, eps)
    atoms, k, level = _located(fld, eps, term_cap)
    F = atoms.dist
    p_d = F.cumulative[k]
    total = fld.reduced_trace_sum
    count = total * F.exp_quantile_integral(p_d)
    defect = total * math.exp(F.locations[k]) * (p_d - level)
    return count, defect


def sup_distance(df1, df2: Callable[[float], float], grid: Sequence[float]) -> float:
    """``max |df1(x) - df2(x)|`` over the grid points."""
    pts = list(grid)
    if not pts:
        raise ValidationError("grid must be non-empty")
    return max(abs(df1(x) - df2(x)) for x in pts)


def midpoint_grid(df: StepDistribution) -> list[float]:
    """Atom midpoints of ``df`` plus one point beyond each end."""
    locs = df.locations
    mids = [(a + b) / 2 for a, b in zip(locs, locs[1:])]
    return [locs[0] - 1.0, *mids, locs[-1] + 1.0]
