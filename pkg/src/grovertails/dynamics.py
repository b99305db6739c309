"""Driven evolution on internal arcs plus an exact finite-tail reference.

The internal recursion is psi_0 = 0, psi_{n+1} = internal_step @ psi_n +
z^{-n} * source.  `evolve_truncated` runs the full unitary walk on the graph
with tails cut to finite paths, which reproduces the infinite-tail dynamics
exactly while the step count stays below the truncation length.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotConverged, TruncationTooShort
from .graphs import ArcSpace, TailedGraph, TruncatedTails, truncate_tails
from .operators import WalkOperators, grover_unitary

_UNIT_CIRCLE_TOL = 1e-12
_STEP_CAP = 100_000


@dataclass(frozen=True)
class DriveConfig:
    """Per-tail inflow amplitudes and the unit-modulus drive frequency z."""

    inflow: tuple[complex, ...]
    z: complex = 1.0 + 0.0j

    def __post_init__(self):
        if abs(abs(self.z) - 1.0) > _UNIT_CIRCLE_TOL:
            raise ValueError(f"|z| must be 1 within {_UNIT_CIRCLE_TOL:g}, got |z| = {abs(self.z)!r}")

    @property
    def inflow_vector(self) -> np.ndarray:
        return np.array(self.inflow, dtype=complex)

    @staticmethod
    def unit(tail_count: int, which: int = 0, z: complex = 1.0 + 0.0j) -> "DriveConfig":
        """Amplitude 1 on one tail, 0 elsewhere."""
        inflow = [0j] * tail_count
        inflow[which] = 1.0 + 0j
        return DriveConfig(inflow=tuple(inflow), z=z)


def _check_drive(tg: TailedGraph, drive: DriveConfig) -> None:
    if len(drive.inflow) != tg.tail_count:
        raise ValueError(
            f"drive has {len(drive.inflow)} amplitudes for {tg.tail_count} tails"
        )


def inflow_source(tg: TailedGraph, arcs: ArcSpace, drive: DriveConfig) -> np.ndarray:
    """One-step image of the incoming plane state, restricted to internal arcs.

    Applying the local Grover rule to the initial tail state puts
    2/tilde_d(u) times the summed inflow at u onto every internal arc
    leaving a boundary vertex u, and nothing anywhere else.
    """
    _check_drive(tg, drive)
    inflow_at = tg.vertex_inflow(drive.inflow_vector)
    tilde = np.array(tg.tilde_degree, dtype=float)
    source = np.zeros(arcs.arc_count, dtype=complex)
    for a in range(arcs.arc_count):
        u = arcs.origin[a]
        if inflow_at[u] != 0:
            source[a] = 2.0 / tilde[u] * inflow_at[u]
    return source


def step(psi: np.ndarray, n: int, ops: WalkOperators, source: np.ndarray,
         z: complex = 1.0 + 0.0j) -> np.ndarray:
    """One driven update: internal_step @ psi + z^{-n} * source."""
    if n < 0:
        raise ValueError("step index must be nonnegative")
    return ops.internal_step @ psi + z ** (-n) * source


@dataclass
class Trajectory:
    """Record of a driven run.

    `residuals[k]` is the sup norm of z * psi_{k+1} - psi_k, which equals
    the successive difference of the phase-corrected iterates z^n psi_n.
    `states` holds psi_0..psi_N when state recording was requested.
    """

    final_state: np.ndarray
    residuals: np.ndarray
    converged: bool
    steps_taken: int
    z: complex
    states: list[np.ndarray] = field(default_factory=list)

    @property
    def stationary_estimate(self) -> np.ndarray:
        """Phase-corrected limit candidate z^N psi_N."""
        return self.z ** self.steps_taken * self.final_state

    def to_csv(self) -> str:
        """Rows "step,arc,re,im,residual"; requires recorded states."""
        if not self.states:
            raise ValueError("trajectory was run without state recording")
        lines = ["step,arc,re,im,residual"]
        for k, psi in enumerate(self.states):
            res = float(self.residuals[k - 1]) if k >= 1 else float("nan")
            for a, value in enumerate(psi):
                lines.append(f"{k},{a},{float(value.real)!r},{float(value.imag)!r},{res!r}")
        return "\n".join(lines) + "\n"


def default_step_budget(ops: WalkOperators) -> int:
    """Step cap of 10 |A| / spectral gap, clamped to [100, 100000].

    The gap is one minus the largest eigenvalue modulus strictly inside the
    unit circle; center eigenvalues never carry weight in a valid run.
    """
    m = ops.arcs.arc_count
    if m == 0:
        return 100
    moduli = np.abs(np.linalg.eigvals(ops.internal_step))
    inside = moduli[moduli < 1.0 - 1e-8]
    gap = 1.0 - (float(inside.max()) if inside.size else 0.0)
    return int(min(max(10.0 * m / gap, 100), _STEP_CAP))


def evolve(ops: WalkOperators, drive: DriveConfig, *, tol: float = 1e-10,
           max_steps: int | None = None, keep_states: bool = True,
           require_convergence: bool = True) -> Trajectory:
    """Iterate the driven recursion until the phase-corrected iterates settle.

    Raises NotConverged (carrying the last residual) if the budget runs out
    and `require_convergence` is set; a failure here indicates the source
    leaked into the center subspace, which valid inputs never do.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    _check_drive(ops.tg, drive)
    budget = default_step_budget(ops) if max_steps is None else max_steps
    source = inflow_source(ops.tg, ops.arcs, drive)
    z = complex(drive.z)

    psi = np.zeros(ops.arcs.arc_count, dtype=complex)
    states = [psi.copy()] if keep_states else []
    residuals: list[float] = []
    converged = False
    steps = 0
    for n in range(budget):
        nxt = step(psi, n, ops, source, z)
        residual = float(np.max(np.abs(z * nxt - psi))) if nxt.size else 0.0
        residuals.append(residual)
        psi = nxt
        steps = n + 1
        if keep_states:
            states.append(psi.copy())
        if residual < tol:
            converged = True
            break
    if not converged and require_convergence:
        last = residuals[-1] if residuals else 0.0
        raise NotConverged(f"no convergence after {steps} steps", residual=last)
    return Trajectory(
        final_state=psi,
        residuals=np.array(residuals),
        converged=converged,
        steps_taken=steps,
        z=z,
        states=states,
    )


@dataclass(frozen=True, eq=False)
class TruncatedEvolution:
    """Full-graph state history of the unitary walk on truncated tails."""

    trunc: TruncatedTails
    states: list[np.ndarray]
    norms: np.ndarray
    drive: DriveConfig

    def internal_state(self, n: int) -> np.ndarray:
        """State at step n restricted to internal arcs, in internal order."""
        return self.states[n][self.trunc.internal_arcs]

    def outflow(self, tail: int, n: int) -> complex:
        """Amplitude leaving the graph onto a tail's first outbound arc."""
        return complex(self.states[n][self.trunc.outbound[tail][0]])

    def inflow(self, tail: int, n: int) -> complex:
        """Amplitude arriving on a tail's last inbound arc."""
        return complex(self.states[n][self.trunc.inbound[tail][0]])


def initial_plane_state(trunc: TruncatedTails, drive: DriveConfig) -> np.ndarray:
    """Incoming plane state: amplitude alpha_j z^{-m} on the inbound arc
    whose terminus sits at distance m from the attachment vertex."""
    state = np.zeros(trunc.arcs.arc_count, dtype=complex)
    z = complex(drive.z)
    for j, amp in enumerate(drive.inflow):
        for m in range(trunc.length):
            state[trunc.inbound[j][m]] = amp * z ** (-m)
    return state


def evolve_truncated(tg: TailedGraph, arcs: ArcSpace, drive: DriveConfig,
                     tail_length: int, steps: int) -> TruncatedEvolution:
    """Run the exact unitary walk with tails cut to `tail_length`.

    While steps < tail_length, reflections off the cut ends cannot reach the
    internal graph, so the restriction of each state to internal arcs equals
    the driven internal recursion exactly.
    """
    if steps >= tail_length:
        raise TruncationTooShort(
            f"steps ({steps}) must stay below the tail length ({tail_length})"
        )
    _check_drive(tg, drive)
    trunc = truncate_tails(tg, tail_length)
    u = grover_unitary(trunc.graph, trunc.arcs)
    state = initial_plane_state(trunc, drive)
    states = [state.copy()]
    norms = [float(np.linalg.norm(state))]
    for _ in range(steps):
        state = u @ state
        states.append(state.copy())
        norms.append(float(np.linalg.norm(state)))
    return TruncatedEvolution(trunc=trunc, states=states, norms=np.array(norms), drive=drive)
