"""Combinatorial argmax oracles.

An oracle answers `argmax_{a in feasible} f(a)` for a supplied objective f.
All solvers here enumerate (the action sets are arbitrary subsets of the
hypercube, so nothing smarter is assumed); a top-m fast path covers the
common unconstrained linear case.  Ties break toward the lexicographically
smallest support tuple, so results are deterministic regardless of worker
count.  The batch executor is the only code path that touches the
ComplexityLedger.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, islice
from typing import Callable, Iterator, Sequence

import numpy as np

from .core import Action, ActionSet, ComplexityLedger

DEFAULT_ENUMERATION_CAP = 10_000_000


class OracleError(Exception):
    pass


class EmptyFeasibleSet(OracleError):
    """The constraints eliminated every action."""


class EnumerationBudgetExceeded(OracleError):
    """The feasible set is too large for exact enumeration."""

    def __init__(self, size: int, cap: int):
        super().__init__(f"feasible set has ~{size} actions, exceeds cap {cap}")
        self.size = size
        self.cap = cap


@dataclass(frozen=True)
class LinearWeights:
    """Objective value is the sum of per-arm weights over the activated arms."""

    w: np.ndarray

    def value(self, action: Action) -> float:
        w = self.w
        return float(sum(w[i] for i in action.arms))


@dataclass(frozen=True)
class GeneralEvaluator:
    """Objective given by a pure callable Action -> float."""

    fn: Callable[[Action], float]

    def value(self, action: Action) -> float:
        return float(self.fn(action))


Objective = LinearWeights | GeneralEvaluator


@dataclass(frozen=True)
class OracleQuery:
    """One argmax request: an objective plus optional restrictions of the base set.

    - must_include: every listed arm must be activated.
    - surviving_arms: the support must lie inside this set (None = no restriction).
    - surviving_pairs: every activated unordered pair (i < j) must be listed
      (None = no restriction).
    """

    objective: Objective
    action_set: ActionSet
    must_include: frozenset[int] = frozenset()
    surviving_arms: frozenset[int] | None = None
    surviving_pairs: frozenset[tuple[int, int]] | None = None


@dataclass(frozen=True)
class OracleBatch:
    """An ordered group of queries issued together; costs one adaptivity round."""

    queries: tuple[OracleQuery, ...]

    def __post_init__(self) -> None:
        if not self.queries:
            raise ValueError("a batch must contain at least one query")
        base = self.queries[0].action_set
        if any(q.action_set is not base and q.action_set != base for q in self.queries):
            raise ValueError("all queries in a batch must share the base action set")

    def __len__(self) -> int:
        return len(self.queries)


@dataclass(frozen=True)
class OracleResult:
    action: Action
    value: float


def _pairs_ok(arms: tuple[int, ...], allowed: frozenset[tuple[int, int]]) -> bool:
    for a_idx, i in enumerate(arms):
        for j in arms[a_idx + 1:]:
            if (i, j) not in allowed:
                return False
    return True


def iter_feasible(query: OracleQuery) -> Iterator[Action]:
    """Enumerate the constrained feasible set (deterministic order)."""
    aset = query.action_set
    must = sorted(query.must_include)
    allowed = query.surviving_arms
    pairs = query.surviving_pairs

    if query.must_include and any(i < 0 or i >= aset.d for i in must):
        return
    if allowed is not None and not query.must_include <= allowed:
        return
    if pairs is not None and not _pairs_ok(tuple(must), pairs):
        return

    if aset.kind == "explicit":
        for a in aset.explicit_actions:
            s = set(a.arms)
            if not query.must_include <= s:
                continue
            if allowed is not None and not s <= allowed:
                continue
            if pairs is not None and not _pairs_ok(a.arms, pairs):
                continue
            yield a
        return

    universe = sorted(allowed) if allowed is not None else list(range(aset.d))
    free = [i for i in universe if i not in query.must_include]
    lo = max(1, len(must))
    if len(must) > aset.m:
        return
    sizes = (aset.m,) if aset.kind == "exact" else range(lo, aset.m + 1)
    for k in sizes:
        need = k - len(must)
        if need < 0 or need > len(free):
            continue
        for extra in combinations(free, need):
            arms = tuple(sorted(must + list(extra)))
            if pairs is not None and not _pairs_ok(arms, pairs):
                continue
            yield Action(arms, aset.d)


def feasible_upper_count(query: OracleQuery) -> int:
    """Cheap upper bound on the enumeration size (ignores pair constraints)."""
    aset = query.action_set
    if aset.kind == "explicit":
        return len(aset.explicit_actions)
    n_univ = len(query.surviving_arms) if query.surviving_arms is not None else aset.d
    n_free = n_univ - len(query.must_include)
    if n_free < 0:
        return 0
    lo = max(1, len(query.must_include))
    sizes = (aset.m,) if aset.kind == "exact" else range(lo, aset.m + 1)
    total = 0
    for k in sizes:
        need = k - len(query.must_include)
        if 0 <= need <= n_free:
            total += math.comb(n_free, need)
    return total


def first_feasible(query: OracleQuery) -> Action | None:
    """Any feasible action, or None.  Used as a cheap feasibility probe."""
    return next(iter_feasible(query), None)


def solve_top_m_linear(w: np.ndarray, d: int, m: int, exact_m: bool) -> Action:
    """Fast path for an unconstrained cardinality set with finite linear weights.

    AtMost keeps up to m strictly positive weights (best single arm if none);
    Exact keeps the m largest.  Ties prefer smaller arm indices, which matches
    solve_exact's support-tuple tie-break for every instance without exact
    value ties across different supports.
    """
    order = sorted(range(d), key=lambda i: (-w[i], i))
    if exact_m:
        arms = order[:m]
    else:
        arms = [i for i in order if w[i] > 0.0][:m]
        if not arms:
            arms = [order[0]]
    return Action(tuple(sorted(arms)), d)


def _fast_path_applies(query: OracleQuery) -> bool:
    if not isinstance(query.objective, LinearWeights):
        return False
    if query.action_set.kind == "explicit":
        return False
    if query.must_include or query.surviving_arms is not None or query.surviving_pairs is not None:
        return False
    w = np.asarray(query.objective.w, dtype=np.float64)
    if not np.isfinite(w).all():
        return False
    # zero weights can create cross-size ties under at_most; enumeration owns those
    if query.action_set.kind == "at_most" and np.any(w == 0.0):
        return False
    return True


class ExactOracle:
    """Enumeration-based exact argmax with deterministic tie-breaking."""

    def __init__(self, enumeration_cap: int = DEFAULT_ENUMERATION_CAP):
        self.enumeration_cap = enumeration_cap

    def solve(self, query: OracleQuery) -> OracleResult:
        if _fast_path_applies(query):
            aset = query.action_set
            action = solve_top_m_linear(
                np.asarray(query.objective.w, dtype=np.float64),
                aset.d,
                aset.m,
                exact_m=(aset.kind == "exact"),
            )
            return OracleResult(action, query.objective.value(action))

        size = feasible_upper_count(query)
        if size > self.enumeration_cap:
            raise EnumerationBudgetExceeded(size, self.enumeration_cap)

        objective = query.objective
        best: Action | None = None
        best_value = -math.inf
        for a in iter_feasible(query):
            v = objective.value(a)
            if best is None or v > best_value or (v == best_value and a.arms < best.arms):
                best, best_value = a, v
        if best is None:
            raise EmptyFeasibleSet("constraints eliminated every action")
        return OracleResult(best, best_value)


class AlphaOracle:
    """Test double for an alpha-approximation oracle.

    Solves exactly, then returns the lexicographically smallest action, among
    a deterministic sample of feasible actions that always includes the exact
    optimizer, whose value reaches alpha times the optimum.  With alpha = 1
    this reproduces the exact answer bit for bit.  The value guarantee assumes
    a nonnegative optimum (the UCB objectives it wraps are nonnegative).
    """

    def __init__(self, inner: ExactOracle, alpha: float, sample_size: int = 64):
        if not (0.0 < alpha <= 1.0):
            raise ValueError("alpha must lie in (0, 1]")
        self.inner = inner
        self.alpha = alpha
        self.sample_size = sample_size

    def solve(self, query: OracleQuery) -> OracleResult:
        exact = self.inner.solve(query)
        if self.alpha == 1.0:
            return exact

        total = feasible_upper_count(query)
        stride = max(1, math.ceil(total / self.sample_size))
        sample = list(islice(iter_feasible(query), 0, None, stride))
        if all(a.arms != exact.action.arms for a in sample):
            sample.append(exact.action)

        threshold = self.alpha * exact.value
        best: Action | None = None
        for a in sample:
            if query.objective.value(a) >= threshold:
                if best is None or a.arms < best.arms:
                    best = a
        if best is None:  # negative optimum; the guarantee is vacuous there
            return exact
        return OracleResult(best, query.objective.value(best))


def wrap_alpha(inner: ExactOracle, alpha: float, sample_size: int = 64):
    """Degrade an exact oracle to an alpha-approximate one (alpha=1 is a no-op)."""
    if alpha == 1.0:
        return inner
    return AlphaOracle(inner, alpha, sample_size)


def execute_batch(
    oracle,
    batch: OracleBatch,
    ledger: ComplexityLedger,
    workers: int = 1,
) -> list[OracleResult]:
    """Run one round of queries, charging the ledger exactly once.

    The ledger is charged before evaluation, so a failing query still spends
    the round.  Queries are pure, so parallel evaluation returns results
    positionally identical to sequential evaluation.
    """
    ledger.charge(len(batch))
    if workers > 1 and len(batch) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(oracle.solve, batch.queries))
    return [oracle.solve(q) for q in batch.queries]


def smallest_action_containing(
    action_set: ActionSet,
    must: Sequence[int],
    surviving_arms: frozenset[int] | None = None,
) -> Action | None:
    """Lexicographically smallest feasible action whose support covers `must`.

    Used for deterministic warm-up plays; pair constraints are deliberately
    out of scope here (warm-up runs on the unrestricted set).
    """
    must_set = set(must)
    d = action_set.d
    if any(i < 0 or i >= d for i in must_set):
        return None
    universe = sorted(surviving_arms) if surviving_arms is not None else list(range(d))
    if not must_set <= set(universe):
        return None

    if action_set.kind == "explicit":
        candidates = [
            a for a in action_set.explicit_actions
            if must_set <= set(a.arms) and set(a.arms) <= set(universe)
        ]
        return min(candidates, key=lambda a: a.arms) if candidates else None

    m = action_set.m
    if len(must_set) > m:
        return None
    if action_set.kind == "exact":
        fill = [i for i in universe if i not in must_set]
        need = m - len(must_set)
        if need > len(fill):
            return None
        arms = sorted(must_set | set(fill[:need]))
        return Action(tuple(arms), d)

    # at_most: adding an arm below max(must) shortens the support prefix and
    # thus lowers the tuple; arms above max(must) only lengthen it.
    if not must_set:
        return Action((universe[0],), d)
    slots = m - len(must_set)
    top = max(must_set)
    arms = []
    for i in universe:
        if i in must_set:
            arms.append(i)
        elif slots > 0 and i < top:
            arms.append(i)
            slots -= 1
    return Action(tuple(sorted(arms)), d)
