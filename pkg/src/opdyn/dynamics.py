"""The opinion update and its simulation loop.

Opinions are scalars in [-1, 1]; +1 and -1 are the extreme positions and 0
is neutral. Each step, agent ``i`` moves toward the weighted average of
her neighbors' opinions by a fraction ``f_i(x_i)`` of the gap, where the
susceptibility ``f_i`` maps her own current opinion into [0, 1]:

    x_i(t+1) = x_i(t) + f_i(x_i(t)) * sum_j w_ij(t) * (x_j(t) - x_i(t))

Equivalently ``x(t+1) = S(x(t), t) x(t)`` with the row-stochastic one-step
matrix ``S = I - F + F W`` (``F`` diagonal of susceptibilities). The update
is computed in the gap form above so that exact fixed points stay exact in
floating point: a consensus vector never moves, a fully stubborn agent
(f = 0) never moves.

Susceptibility kinds:
  * ``DeGroot``            f = 1 (classic averaging)
  * ``Constant``           f = per-agent fixed openness in [0, 1]
  * ``StubbornPositive``   f = (1 - x) / 2 (immovable at +1, fully open at -1)
  * ``StubbornNeutral``    f = x**2       (immovable at 0, fully open at +-1)
  * ``StubbornExtremist``  f = 1 - x**2   (immovable at +-1; no limit theory)
  * ``Custom``             any vectorized f, range-checked on a fine grid
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import (
    DomainError,
    PreconditionError,
    ScheduleExhaustedError,
    ShapeError,
    ValidationError,
)
from .graph import GraphSchedule, WeightMatrix

OPINION_MIN = -1.0
OPINION_MAX = 1.0


def opinion_vector(values) -> np.ndarray:
    """Validate opinions into a read-only float array in [-1, 1]."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ShapeError(f"opinion vector must be 1-D and nonempty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("opinion vector contains non-finite entries")
    bad = np.nonzero((arr < OPINION_MIN) | (arr > OPINION_MAX))[0]
    if bad.size:
        k = int(bad[0])
        raise DomainError(f"x0[{k}]: value {arr[k]!r} outside [-1, 1]")
    out = arr.copy()
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# Susceptibility kinds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeGroot:
    name = "degroot"

    def values(self, x: np.ndarray) -> np.ndarray:
        return np.ones_like(x)

    def at(self, i: int, x_i: float) -> float:
        return 1.0


@dataclass(frozen=True)
class Constant:
    """Fixed per-agent openness, the state-independent special case."""

    openness: tuple[float, ...]
    name = "constant"

    def __post_init__(self):
        vals = tuple(float(v) for v in self.openness)
        if not vals:
            raise ValidationError("constant susceptibility needs at least one agent")
        for k, v in enumerate(vals):
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"openness[{k}]: value {v!r} outside [0, 1]")
        object.__setattr__(self, "openness", vals)

    def values(self, x: np.ndarray) -> np.ndarray:
        if len(self.openness) != x.shape[0]:
            raise ShapeError(
                f"openness has {len(self.openness)} agents, opinions have {x.shape[0]}")
        return np.array(self.openness)

    def at(self, i: int, x_i: float) -> float:
        return self.openness[i]


@dataclass(frozen=True)
class StubbornPositive:
    name = "stubborn_positive"

    def values(self, x: np.ndarray) -> np.ndarray:
        return 0.5 * (1.0 - x)

    def at(self, i: int, x_i: float) -> float:
        return 0.5 * (1.0 - x_i)


@dataclass(frozen=True)
class StubbornNeutral:
    name = "stubborn_neutral"

    def values(self, x: np.ndarray) -> np.ndarray:
        return x * x

    def at(self, i: int, x_i: float) -> float:
        return x_i * x_i


@dataclass(frozen=True)
class StubbornExtremist:
    name = "stubborn_extremist"

    def values(self, x: np.ndarray) -> np.ndarray:
        return 1.0 - x * x

    def at(self, i: int, x_i: float) -> float:
        return 1.0 - x_i * x_i


_PROBE_GRID = np.linspace(OPINION_MIN, OPINION_MAX, 2001)  # 1e-3 spacing


@dataclass(frozen=True, eq=False)
class Custom:
    """Extension point for user susceptibility functions.

    ``fn`` must be vectorized over a float array. Construction probes the
    function on a 1e-3 grid over [-1, 1] and rejects it unless every value
    lands in [0, 1]; there is no way to run an unchecked function.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    label: str = "custom"

    def __post_init__(self):
        probe = np.asarray(self.fn(_PROBE_GRID), dtype=float)
        if probe.shape != _PROBE_GRID.shape:
            raise ValidationError("custom susceptibility must map arrays elementwise")
        if not np.all(np.isfinite(probe)):
            raise ValidationError("custom susceptibility produced non-finite values")
        if probe.min() < 0.0 or probe.max() > 1.0:
            raise ValidationError(
                f"custom susceptibility leaves [0, 1] on the probe grid "
                f"(min {probe.min()!r}, max {probe.max()!r})")

    @property
    def name(self) -> str:
        return self.label

    def values(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(x), dtype=float)

    def at(self, i: int, x_i: float) -> float:
        return float(np.asarray(self.fn(np.array([x_i])), dtype=float)[0])


SusceptibilityKind = Union[
    DeGroot, Constant, StubbornPositive, StubbornNeutral, StubbornExtremist, Custom,
]


def susceptibility(kind: SusceptibilityKind, i: int, x_i: float) -> float:
    """Openness of agent ``i`` at her current opinion."""
    if not OPINION_MIN <= x_i <= OPINION_MAX:
        raise DomainError(f"opinion {x_i!r} outside [-1, 1]")
    return float(min(1.0, max(0.0, kind.at(i, float(x_i)))))


def susceptibility_profile(kind: SusceptibilityKind, x: np.ndarray) -> np.ndarray:
    """Vectorized susceptibilities, clamped to [0, 1].

    The clamp only matters for opinions that drifted past the interval by
    float rounding; on exact inputs the kinds already map into [0, 1].
    """
    return np.clip(kind.values(x), 0.0, 1.0)


# ---------------------------------------------------------------------------
# One-step operators
# ---------------------------------------------------------------------------

def _check_dims(x: np.ndarray, matrix: WeightMatrix) -> None:
    if x.shape[0] != matrix.n:
        raise ShapeError(f"{x.shape[0]} opinions against a {matrix.n}-agent matrix")


def system_matrix(x, matrix: WeightMatrix, kind: SusceptibilityKind) -> np.ndarray:
    """One-step transition matrix ``S = I - F + F W`` at state ``x``.

    Built by scaling rows of ``W`` rather than materializing diagonal
    matrices. Row-stochastic and nonnegative whenever ``W`` is valid and
    ``x`` is in range.
    """
    xa = np.asarray(x, dtype=float)
    _check_dims(xa, matrix)
    f = susceptibility_profile(kind, xa)
    s = f[:, None] * matrix.entries
    idx = np.arange(matrix.n)
    s[idx, idx] += 1.0 - f
    return s


def step(x, matrix: WeightMatrix, kind: SusceptibilityKind) -> np.ndarray:
    """Advance opinions one step.

    Uses the gap form ``x + f * sum_j w_ij (x_j - x_i)``, which keeps
    consensus states and zero-susceptibility agents exactly fixed in
    floating point, and agrees with ``system_matrix(x) @ x`` to within
    rounding.
    """
    xa = np.asarray(x, dtype=float)
    _check_dims(xa, matrix)
    f = susceptibility_profile(kind, xa)
    gaps = np.einsum("ij,ij->i", matrix.entries, xa[None, :] - xa[:, None])
    return xa + f * gaps


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StopRule:
    """When to stop a simulation.

    ``consensus_epsilon`` stops on spread (max - min) falling below it.
    ``target``/``target_epsilon`` stop once every opinion is within
    ``target_epsilon`` of a predicted limit; useful near the extremes,
    where convergence has no geometric rate and spread alone is a poor
    stopping signal.
    """

    max_steps: int = 10**6
    consensus_epsilon: float = 1e-9
    target: Optional[float] = None
    target_epsilon: Optional[float] = None

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValidationError(f"max_steps must be >= 1, got {self.max_steps}")
        if not self.consensus_epsilon > 0.0:
            raise ValidationError("consensus_epsilon must be positive")
        if (self.target is None) != (self.target_epsilon is None):
            raise ValidationError("target and target_epsilon come together")
        if self.target is not None:
            if not OPINION_MIN <= self.target <= OPINION_MAX:
                raise ValidationError(f"target {self.target!r} outside [-1, 1]")
            if not self.target_epsilon > 0.0:
                raise ValidationError("target_epsilon must be positive")


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """States over time plus per-step diagnostics.

    ``states`` holds one row per recorded step (row 0 is the initial
    state); it is None when the simulation ran with ``keep_states=False``,
    in which case only the diagnostics and the final state remain.
    """

    mins: np.ndarray
    maxs: np.ndarray
    spreads: np.ndarray
    final_state: np.ndarray
    stop_reason: str
    states: Optional[np.ndarray] = None

    @property
    def steps(self) -> int:
        """Number of transitions taken."""
        return len(self.mins) - 1

    @property
    def n(self) -> int:
        return self.final_state.shape[0]

    @classmethod
    def from_states(cls, states, stop_reason: str = "unspecified") -> "TrajectoryRecord":
        """Build a record (diagnostics included) from raw state rows.

        Accepts arbitrary rows, including ones no simulation would
        produce; the lemma checks are meant to judge such forgeries.
        """
        arr = np.asarray(states, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ShapeError(f"states must be (steps+1, n), got shape {arr.shape}")
        return cls(
            mins=arr.min(axis=1),
            maxs=arr.max(axis=1),
            spreads=arr.max(axis=1) - arr.min(axis=1),
            final_state=arr[-1].copy(),
            stop_reason=stop_reason,
            states=arr.copy(),
        )


def simulate(
    x0,
    schedule: GraphSchedule,
    kind: SusceptibilityKind,
    stop: Optional[StopRule] = None,
    keep_states: bool = True,
) -> TrajectoryRecord:
    """Iterate the opinion update until a stop condition fires.

    Stop reasons, in the order they are checked at each recorded state:
    ``"consensus"`` (spread below epsilon), ``"target"`` (all opinions
    within target_epsilon of the predicted limit), ``"max_steps"``, and
    ``"schedule_exhausted"`` for finite schedules that run out of matrices
    before any other condition fires (reported, never silent).

    The initial state is recorded as step 0, so an already-converged input
    yields a 0-transition record.
    """
    stop = stop or StopRule()
    x = opinion_vector(x0).copy()
    if x.shape[0] != schedule.n:
        raise ShapeError(f"{x.shape[0]} opinions against a {schedule.n}-agent schedule")
    # Fail fast on per-agent kinds of the wrong size.
    susceptibility_profile(kind, x)

    values = kind.values
    target = stop.target
    mins: list[float] = []
    maxs: list[float] = []
    states: list[np.ndarray] = []
    reason = "max_steps"
    t = 0
    while True:
        mn = float(x.min())
        mx = float(x.max())
        mins.append(mn)
        maxs.append(mx)
        if keep_states:
            states.append(x.copy())
        if mx - mn < stop.consensus_epsilon:
            reason = "consensus"
            break
        if target is not None and float(np.abs(x - target).max()) < stop.target_epsilon:
            reason = "target"
            break
        if t == stop.max_steps:
            reason = "max_steps"
            break
        try:
            w = schedule.matrix_at(t).entries
        except ScheduleExhaustedError:
            reason = "schedule_exhausted"
            break
        # In-place spelling of step(); same gap form, fewer temporaries.
        f = np.clip(values(x), 0.0, 1.0)
        gaps = x - x[:, None]
        gaps *= w
        u = gaps.sum(axis=1)
        u *= f
        x = x + u
        t += 1

    mins_a = np.array(mins)
    maxs_a = np.array(maxs)
    return TrajectoryRecord(
        mins=mins_a,
        maxs=maxs_a,
        spreads=maxs_a - mins_a,
        final_state=x,
        stop_reason=reason,
        states=np.array(states) if keep_states else None,
    )


def write_trajectory_csv(record: TrajectoryRecord, path) -> None:
    """Write ``t,x_1,...,x_n,spread`` rows at full double precision.

    Uses 17 significant digits, so every value round-trips bit-exactly,
    and a fixed newline so files hash identically across platforms.
    """
    if record.states is None:
        raise PreconditionError("trajectory was recorded without states; cannot write CSV")
    n = record.n
    header = "t," + ",".join(f"x_{i + 1}" for i in range(n)) + ",spread"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header + "\n")
        for t in range(record.states.shape[0]):
            row = ",".join(f"{v:.17g}" for v in record.states[t])
            fh.write(f"{t},{row},{record.spreads[t]:.17g}\n")
