"""Additive fields assembled from marginal spectra.

The reduced spectrum of a d-dimensional additive field is the union of the
marginal reduced spectra; its constant-eigenvector eigenvalue is the sum of
the marginal ones.  Traces are accumulated in ascending ``j`` with Neumaier
compensation so that growing a field one coordinate at a time reproduces a
direct assembly bit for bit.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import RegimeError, ValidationError
from .spectra import MarginalSpectrum, SequenceModel, marginal_at, zeta
from .summation import Neumaier

__all__ = [
    "AdditiveField",
    "MergedStream",
    "assemble",
    "field_from_marginals",
    "extend",
    "epsilon_d",
    "epsilon_0",
    "lambda0_ratio",
    "merged_stream",
    "assumption2_ratio",
    "trace_divergence_probe",
]


@dataclass(frozen=True, eq=False)
class AdditiveField:
    marginals: tuple[MarginalSpectrum, ...]
    _lambda0: Neumaier = field(repr=False)
    _reduced: Neumaier = field(repr=False)
    _full: Neumaier = field(repr=False)

    @property
    def d(self) -> int:
        return len(self.marginals)

    @property
    def lambda0_sum(self) -> float:
        return self._lambda0.value

    @property
    def reduced_trace_sum(self) -> float:
        return self._reduced.value

    @property
    def full_trace(self) -> float:
        return self._full.value


def _grow(marginals: tuple, accs: tuple[Neumaier, Neumaier, Neumaier], new: Iterable):
    lam0, red, full = (a.copy() for a in accs)
    out = list(marginals)
    for m in new:
        lam0.add(m.lambda0)
        red.add(m.reduced_trace)
        full.add(m.full_trace)
        out.append(m)
    if not out:
        raise ValidationError("an additive field needs d >= 1 marginals")
    if not red.value > 0.0:
        raise ValidationError("all marginal reduced spectra are empty: trivial field rejected")
    return AdditiveField(tuple(out), lam0, red, full)


def field_from_marginals(marginals: Sequence[MarginalSpectrum]) -> AdditiveField:
    return _grow((), (Neumaier(), Neumaier(), Neumaier()), marginals)


def assemble(model: SequenceModel, d: int) -> AdditiveField:
    """Field with marginals ``marginal_at(model, 1..d)``."""
    if d < 1:
        raise ValidationError(f"dimension must be >= 1, got {d}")
    return field_from_marginals([marginal_at(model, j) for j in range(1, d + 1)])


def extend(fld: AdditiveField, marginals: Iterable[MarginalSpectrum]) -> AdditiveField:
    """Append further marginals, continuing the trace accumulators."""
    return _grow(fld.marginals, (fld._lambda0, fld._reduced, fld._full), marginals)


def epsilon_d(fld: AdditiveField) -> float:
    return math.sqrt(fld.reduced_trace_sum / fld.full_trace)


def lambda0_ratio(fld: AdditiveField) -> float:
    return fld.lambda0_sum / fld.full_trace


def epsilon_0(model: SequenceModel, d_max: int = 10_000) -> float:
    """Limit of ``epsilon_d`` as ``d`` grows.

    Closed forms are used where they exist: Korobov families with divergent
    ``sum beta_j`` (``tau <= 1``), homogeneous models and cyclic explicit
    lists.  Otherwise the value of ``epsilon_d`` at ``d_max`` (or at the
    length of a non-cyclic list) is returned as an estimate; use
    :func:`trace_divergence_probe` or :func:`epsilon_d` along a grid to judge
    its convergence.
    """
    if model.family == "korobov_parametric":
        if model.degenerate:
            raise RegimeError(
                "r = inf: alpha dominates the trace and n(eps) = 1 for all large d",
                kind="degenerate",
            )
        if model.tau <= 1.0:
            if model.sigma_rule.diverges:
                return (1.0 + model.r / 2.0) ** -0.5
            if model.sigma_rule.kind == "constant":
                two_z = 2.0 * zeta(model.sigma_rule.s0)
                return math.sqrt(two_z / (model.r + two_z))
        return epsilon_d(assemble(model, d_max))
    # homogeneous and cyclic lists: the ratio over one period is the limit;
    # a truncated list only has its full length to offer
    return epsilon_d(field_from_marginals(model.marginals))


class MergedStream:
    """Non-increasing merge of the marginal reduced spectra.

    Yields ``(value, j)`` with ``j`` the 1-based marginal index.  Equal values
    come out ordered by ``j``, then by position within the marginal stream.
    Each instance owns its iterators; create one per consumer.
    """

    def __init__(self, marginals: Sequence[MarginalSpectrum]) -> None:
        self._heap: list = []
        for j, m in enumerate(marginals, start=1):
            it = m.values()
            v = next(it, None)
            if v is not None:
                self._heap.append((-v, j, 0, it))
        heapq.heapify(self._heap)

    def __iter__(self) -> Iterator[tuple[float, int]]:
        return self

    def __next__(self) -> tuple[float, int]:
        heap = self._heap
        if not heap:
            raise StopIteration
        neg, j, k, it = heap[0]
        nxt = next(it, None)
        if nxt is None:
            heapq.heappop(heap)
        else:
            heapq.heapreplace(heap, (-nxt, j, k + 1, it))
        return -neg, j

    def peek(self) -> float | None:
        """Next value without consuming it, ``None`` when exhausted."""
        return -self._heap[0][0] if self._heap else None

    def take(self, n: int) -> list[tuple[float, int]]:
        out = []
        for _ in range(n):
            item = next(self, None)
            if item is None:
                break
            out.append(item)
        return out


def merged_stream(fld: AdditiveField) -> MergedStream:
    return MergedStream(fld.marginals)


def assumption2_ratio(fld: AdditiveField) -> float:
    """Largest first reduced eigenvalue over the reduced trace.

    Tends to zero with ``d`` exactly when the complexity grows without bound
    for every ``eps`` below ``epsilon_0``.
    """
    return max(m.first() for m in fld.marginals) / fld.reduced_trace_sum


def trace_divergence_probe(model: SequenceModel, d_grid: Sequence[int]) -> list[tuple[int, float]]:
    """Partial sums of marginal reduced traces along ``d_grid``."""
    grid = list(d_grid)
    if not grid:
        raise ValidationError("d_grid must be non-empty")
    if any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
        raise ValidationError("d_grid must be strictly increasing positive integers")
    acc = Neumaier()
    out = []
    j = 0
    for d in grid:
        while j < d:
            j += 1
            acc.add(marginal_at(model, j).reduced_trace)
        out.append((d, acc.value))
    return out
