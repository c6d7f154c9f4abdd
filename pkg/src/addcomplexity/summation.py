"""Compensated (Neumaier) summation.

``math.fsum`` is exact but needs the whole sequence; the accumulator here is
used where sums are built incrementally (traces grown one marginal at a time,
running partial sums over an eigenvalue stream).
"""

from __future__ import annotations

from typing import Iterable


class Neumaier:
    """Running sum with a separate compensation term."""

    __slots__ = ("_sum", "_comp")

    def __init__(self, start: float = 0.0) -> None:
        self._sum = float(start)
        self._comp = 0.0

    def add(self, value: float) -> None:
        s = self._sum
        t = s + value
        if abs(s) >= abs(value):
            self._comp += (s - t) + value
        else:
            self._comp += (value - t) + s
        self._sum = t

    @property
    def value(self) -> float:
        return self._sum + self._comp

    def copy(self) -> "Neumaier":
        other = Neumaier()
        other._sum = self._sum
        other._comp = self._comp
        return other

    def __repr__(self) -> str:
        return f"Neumaier({self.value!r})"


def compensated_sum(values: Iterable[float]) -> float:
    acc = Neumaier()
    for v in values:
        acc.add(v)
    return acc.value
