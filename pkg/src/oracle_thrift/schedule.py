"""Doubly-logarithmic epoch grids for the scheduled-query algorithms.

The grid places M oracle rounds over horizon T via the recursion
t_tau = eta * sqrt(t_{tau-1}) with eta = T^(1/(2 - 2^(1-M))), whose un-rounded
closed form is t_tau = eta^(2 - 2^(1-tau)) and closes at t_M = T exactly.
Boundary b_0 = 1 starts epoch 1 and b_1 = ceil(eta) ends it; this keeps the
published eta while covering the full horizon (the recursion's t_1 = eta, not
1, so a literal first boundary of 1 would not close at T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class EpochGrid:
    """Integer epoch boundaries b_0 < ... < b_M with b_0 = 1 and b_M = T + 1.

    Epoch tau (1-based) covers rounds [b_{tau-1}, b_tau).  Equal consecutive
    boundaries are collapsed at construction, so every epoch is nonempty and
    the effective epoch count may be below the requested M.
    """

    T: int
    requested_M: int
    eta: float
    boundaries: tuple[int, ...]

    @property
    def M(self) -> int:
        return len(self.boundaries) - 1

    def epochs(self) -> list[tuple[int, int]]:
        """(start, end) pairs, end-exclusive, partitioning [1, T]."""
        b = self.boundaries
        return [(b[i], b[i + 1]) for i in range(self.M)]

    def closed_form(self, tau: int) -> float:
        """Un-rounded boundary t_tau = eta^(2 - 2^(1-tau))."""
        return self.eta ** (2.0 - 2.0 ** (1 - tau))


def build_grid(T: int, M: int) -> EpochGrid:
    if T < 4:
        raise ValueError("grid requires T >= 4")
    if not (2 <= M <= math.log2(T) + 1e-9):
        raise ValueError(f"need 2 <= M <= log2(T); got M={M}, T={T}")

    eta = T ** (1.0 / (2.0 - 2.0 ** (1 - M)))
    raw = [1]
    b = min(math.ceil(eta), T + 1)
    raw.append(b)
    for _ in range(2, M):
        b = min(math.ceil(eta * math.sqrt(b)), T + 1)
        raw.append(b)
    raw.append(T + 1)

    boundaries = [raw[0]]
    for x in raw[1:]:
        if x > boundaries[-1]:
            boundaries.append(x)
    boundaries[-1] = T + 1
    return EpochGrid(T=T, requested_M=M, eta=eta, boundaries=tuple(boundaries))


def default_M(T: int) -> int:
    """Theta(log log T) epoch count: max(2, ceil(log2(log2 T)) + 1)."""
    if T < 4:
        raise ValueError("need T >= 4")
    return max(2, math.ceil(math.log2(math.log2(T))) + 1)
