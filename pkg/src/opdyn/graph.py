"""Time-varying directed influence graphs.

An influence matrix ``W`` is row-stochastic: ``w_ij`` is the weight agent
``i`` places on agent ``j``'s opinion. Arc direction in the derived graph
follows information flow, which is the TRANSPOSE of the adjacency-matrix
habit: ``w_ij > 0`` means agent ``j``'s opinion reaches agent ``i``, so the
graph has the arc ``j -> i``. Every agent listens to herself, so a valid
matrix has a positive diagonal and the derived graph has all self-arcs.

Validity of a matrix is judged against a declared floor ``beta``: every
nonzero weight must be at least ``beta``. The floor is a user-supplied
validation parameter, never inferred from data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import (
    PreconditionError,
    ScheduleExhaustedError,
    ShapeError,
    ValidationError,
)
from .rng import SplitMix64, indexed_choice

ROW_SUM_TOL = 1e-12


# ---------------------------------------------------------------------------
# Influence matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    """One violated validity clause.

    ``clause`` is one of ``"row_sum"``, ``"entry_floor"``, ``"zero_diagonal"``.
    ``index`` is the offending row ``(i,)`` or entry ``(i, j)``.
    """

    clause: str
    index: tuple
    detail: str

    def __str__(self) -> str:
        where = ",".join(str(k) for k in self.index)
        return f"{self.clause}[{where}]: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "\n".join(str(v) for v in self.violations)


def _as_square(entries, what: str = "matrix") -> np.ndarray:
    arr = np.asarray(entries, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"{what} must be square, got shape {arr.shape}")
    if arr.shape[0] < 2:
        raise ShapeError(f"{what} needs at least 2 agents, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"{what} contains non-finite entries")
    return arr


def validate_weight_matrix(entries, beta: float) -> ValidationReport:
    """Check an influence matrix against the row-stochastic weight rules.

    Clauses checked, all reported (not just the first):
      * each row sums to 1 within ``ROW_SUM_TOL``;
      * each entry is either exactly 0 or at least ``beta`` (negative
        entries fail this clause too);
      * each diagonal entry is positive (an agent always hears herself).

    A non-square or non-finite input is a structural problem and raises
    ``ShapeError`` instead of being reported.
    """
    if beta <= 0:
        raise PreconditionError(f"beta must be positive, got {beta}")
    arr = _as_square(entries)
    n = arr.shape[0]
    found: list[Violation] = []
    row_sums = arr.sum(axis=1)
    for i in range(n):
        if abs(row_sums[i] - 1.0) > ROW_SUM_TOL:
            found.append(Violation(
                "row_sum", (i,), f"row sums to {row_sums[i]!r}, expected 1"))
    bad = (arr != 0.0) & (arr < beta)
    for i, j in zip(*np.nonzero(bad)):
        found.append(Violation(
            "entry_floor", (int(i), int(j)),
            f"nonzero entry {arr[i, j]!r} below floor {beta!r}"))
    for i in range(n):
        if arr[i, i] == 0.0:
            found.append(Violation(
                "zero_diagonal", (i,), "agent must keep a self-weight"))
    return ValidationReport(tuple(found))


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Row-stochastic influence matrix with its declared weight floor.

    Construct through :func:`weight_matrix` to get invariants enforced;
    direct construction only checks squareness.
    """

    entries: np.ndarray
    beta: float

    def __post_init__(self):
        arr = _as_square(self.entries).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def graph(self) -> "DirectedGraph":
        return graph_of_matrix(self)


def weight_matrix(entries, beta: float) -> WeightMatrix:
    """Validate and wrap an influence matrix; raises on any violation."""
    report = validate_weight_matrix(entries, beta)
    if not report.ok:
        raise ValidationError(f"invalid weight matrix:\n{report}")
    return WeightMatrix(np.asarray(entries, dtype=float), beta)


def uniform_complete_matrix(n: int) -> WeightMatrix:
    """All-to-all listening with equal weights 1/n."""
    return weight_matrix(np.full((n, n), 1.0 / n), beta=1.0 / n)


def parse_weight_matrix_text(text: str) -> np.ndarray:
    """Parse the plain-text dense format: a line with ``n``, then ``n``
    lines of ``n`` whitespace-separated decimals. Returns the raw array;
    validate separately."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValidationError("empty matrix text")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise ValidationError(f"first line must be the size, got {lines[0]!r}")
    if len(lines) - 1 != n:
        raise ValidationError(f"expected {n} matrix rows, found {len(lines) - 1}")
    rows = []
    for k, ln in enumerate(lines[1:]):
        parts = ln.split()
        if len(parts) != n:
            raise ValidationError(f"row {k} has {len(parts)} entries, expected {n}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ValidationError(f"row {k} contains a non-numeric entry")
    return np.array(rows, dtype=float)


def load_weight_matrix(path, beta: float) -> WeightMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        return weight_matrix(parse_weight_matrix_text(fh.read()), beta)


# ---------------------------------------------------------------------------
# Directed graphs and connectivity
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=True)
class DirectedGraph:
    """Vertices 0..n-1 with arcs as ordered pairs (source, target)."""

    n: int
    arcs: frozenset

    def successors(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.arcs:
            out[i].append(j)
        return out


def graph_of_matrix(matrix) -> DirectedGraph:
    """Directed graph of an influence matrix under the information-flow
    convention: arc ``j -> i`` exactly when ``w_ij`` is nonzero."""
    arr = matrix.entries if isinstance(matrix, WeightMatrix) else _as_square(matrix)
    rows, cols = np.nonzero(arr)
    arcs = frozenset((int(j), int(i)) for i, j in zip(rows, cols))
    return DirectedGraph(arr.shape[0], arcs)


def strongly_connected_components(graph: DirectedGraph) -> list[frozenset]:
    """Tarjan's algorithm, iterative to spare the recursion limit."""
    adj = graph.successors()
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    components: list[frozenset] = []
    counter = 0

    for root in range(graph.n):
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        work = [(root, iter(adj[root]))]
        while work:
            v, children = work[-1]
            advanced = False
            for w in children:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(adj[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                components.append(frozenset(comp))
    return components


def is_strongly_connected(graph: DirectedGraph) -> bool:
    if graph.n <= 1:
        return True
    return len(strongly_connected_components(graph)) == 1


def union_graph(graphs: Sequence[DirectedGraph]) -> DirectedGraph:
    """Union of arc sets over graphs sharing one vertex set."""
    if not graphs:
        raise PreconditionError("union of an empty graph sequence")
    n = graphs[0].n
    arcs: set = set()
    for g in graphs:
        if g.n != n:
            raise ShapeError(f"vertex count mismatch: {g.n} != {n}")
        arcs |= g.arcs
    return DirectedGraph(n, frozenset(arcs))


# ---------------------------------------------------------------------------
# Schedules: the rule producing W(t) for each step t
# ---------------------------------------------------------------------------

def _check_same_shape(matrices: Sequence[WeightMatrix]) -> int:
    if not matrices:
        raise PreconditionError("schedule needs at least one matrix")
    n = matrices[0].n
    for m in matrices:
        if m.n != n:
            raise ShapeError("all schedule matrices must share one agent count")
    return n


def _check_step(t: int, horizon: Optional[int]) -> None:
    if t < 0:
        raise PreconditionError(f"step index must be >= 0, got {t}")
    if horizon is not None and t >= horizon:
        raise ScheduleExhaustedError(
            f"schedule covers steps 0..{horizon - 1}, requested {t}")


@dataclass(frozen=True, eq=False)
class StaticSchedule:
    """One fixed matrix for every step."""

    matrix: WeightMatrix
    horizon: Optional[int] = None

    @property
    def n(self) -> int:
        return self.matrix.n

    @property
    def pool(self) -> tuple[WeightMatrix, ...]:
        return (self.matrix,)

    @property
    def period(self) -> int:
        return 1

    def matrix_at(self, t: int) -> WeightMatrix:
        _check_step(t, self.horizon)
        return self.matrix


@dataclass(frozen=True, eq=False)
class PeriodicSchedule:
    """Cycles through a fixed list of matrices."""

    matrices: tuple[WeightMatrix, ...]

    horizon: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "matrices", tuple(self.matrices))
        _check_same_shape(self.matrices)

    @property
    def n(self) -> int:
        return self.matrices[0].n

    @property
    def pool(self) -> tuple[WeightMatrix, ...]:
        return self.matrices

    @property
    def period(self) -> int:
        return len(self.matrices)

    def matrix_at(self, t: int) -> WeightMatrix:
        _check_step(t, self.horizon)
        return self.matrices[t % len(self.matrices)]


@dataclass(frozen=True, eq=False)
class RandomSchedule:
    """Uniform draw from a matrix pool at every step.

    The draw at step ``t`` is a pure function of (seed, t), so the
    realization is reproducible and randomly accessible.
    """

    pool: tuple[WeightMatrix, ...]
    seed: int
    horizon: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "pool", tuple(self.pool))
        _check_same_shape(self.pool)

    @property
    def n(self) -> int:
        return self.pool[0].n

    def matrix_at(self, t: int) -> WeightMatrix:
        _check_step(t, self.horizon)
        return self.pool[indexed_choice(self.seed, t, len(self.pool))]


GraphSchedule = Union[StaticSchedule, PeriodicSchedule, RandomSchedule]


def _window_union(schedule: GraphSchedule, start: int, length: int) -> DirectedGraph:
    return union_graph(
        [schedule.matrix_at(t).graph for t in range(start, start + length)])


def verify_repeated_joint_connectivity(
    schedule: GraphSchedule, p: int, q: int, horizon: int,
) -> bool:
    """Check the window-connectivity hypothesis for declared (p, q).

    Windows of length ``p`` start at steps ``q, q+p, q+2p, ...``; the check
    passes when every window's arc-set union is strongly connected. Step
    indices are the 0-based simulation steps (``horizon`` is the last index
    examined, inclusive); ``q >= 1`` mirrors the usual 1-based statement of
    the condition, and the property is about the tail of the sequence, so
    skipping step 0 loses nothing.

    For unbounded static and periodic schedules the window unions repeat
    with the schedule period, so only the distinct residue classes are
    examined and the answer is exact for all time; for seeded-random and
    horizon-bounded schedules every window up to ``horizon`` (clipped to
    the schedule's own horizon) is examined and the answer certifies that
    range only.
    """
    if p < 1 or q < 1:
        raise PreconditionError(f"window parameters must satisfy p,q >= 1, got p={p} q={q}")
    last = horizon
    if schedule.horizon is not None:
        last = min(last, schedule.horizon - 1)
    if last < q + p - 1:
        raise PreconditionError(
            f"horizon {last} shorter than the first window ending at {q + p - 1}")

    if isinstance(schedule, (StaticSchedule, PeriodicSchedule)) and schedule.horizon is None:
        distinct = schedule.period // math.gcd(p, schedule.period)
        starts: Iterable[int] = (q + k * p for k in range(distinct))
    else:
        count = (last - (q + p - 1)) // p + 1
        starts = (q + k * p for k in range(count))

    return all(
        is_strongly_connected(_window_union(schedule, s, p)) for s in starts)


def find_window_parameters(
    schedule: GraphSchedule, horizon: int, max_p: Optional[int] = None,
) -> Optional[tuple[int, int]]:
    """Exhaustive convenience search for a verifying (p, q), smallest p
    first. Returns None when no pair up to ``max_p`` (default: horizon)
    verifies. Quadratic in ``max_p``; intended for desk-scale schedules."""
    cap = min(max_p or horizon, horizon)
    for p in range(1, cap + 1):
        for q in range(1, p + 1):
            try:
                if verify_repeated_joint_connectivity(schedule, p, q, horizon):
                    return p, q
            except PreconditionError:
                continue  # window does not fit inside the horizon
    return None


# ---------------------------------------------------------------------------
# Random strongly connected matrices (for reproducible experiments)
# ---------------------------------------------------------------------------

def random_strongly_connected_matrix(
    n: int, rng: SplitMix64, edge_probability: float = 0.3,
) -> WeightMatrix:
    """Random row-stochastic matrix whose graph is strongly connected.

    Support = self-loops + a random full cycle (which alone guarantees
    strong connectivity) + independent extra arcs with the given
    probability. Weights are drawn uniformly from [1, 2] on the support
    and rows are normalized; the matrix floor is the smallest realized
    nonzero weight.
    """
    if n < 2:
        raise PreconditionError("need at least 2 agents")
    if not 0.0 <= edge_probability <= 1.0:
        raise PreconditionError("edge_probability must lie in [0, 1]")
    support = np.eye(n, dtype=bool)
    order = list(range(n))
    rng.shuffle(order)
    for k in range(n):
        a, b = order[k], order[(k + 1) % n]
        support[b, a] = True  # arc a -> b: b listens to a
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < edge_probability:
                support[i, j] = True
    entries = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if support[i, j]:
                entries[i, j] = rng.uniform(1.0, 2.0)
    entries /= entries.sum(axis=1, keepdims=True)
    beta = float(entries[entries > 0].min())
    return weight_matrix(entries, beta)
