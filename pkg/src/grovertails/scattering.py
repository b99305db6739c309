"""Stationary states, transmission/reflection, scattering matrix, flow laws.

Everything here assumes the drive frequency z = 1: the stationary state is
the fixed point psi = internal_step @ psi + source.  The linear system is
singular whenever the graph has cycles (the circulation vectors span the
kernel), so the solver takes the minimal-norm least-squares solution and
then projects out every constructed center-basis component explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import DriveConfig, inflow_source
from .errors import CenterLeak, LawViolated, MatrixMismatch, NotConverged, ResidualTooLarge
from .graphs import OrientedCycle, TruncatedTails, truncate_tails
from .operators import WalkOperators, grover_matrix, grover_unitary
from .spectral import CenterBasis

_RESIDUAL_TOL = 1e-10
_LEAK_TOL = 1e-10
_CROSS_CHECK_TOL = 1e-8
_STATIONARITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class StationaryState:
    """Fixed point of the driven recursion on internal arcs.

    `residual` is the sup norm of (I - internal_step) psi - source;
    `center_leak` the largest overlap with any center basis direction;
    `iterate_deviation` the sup distance to the long-run iterate when the
    cross-check ran (None otherwise).
    """

    psi: np.ndarray
    residual: float
    center_leak: float
    iterate_deviation: float | None = None


def solve_stationary(ops: WalkOperators, source: np.ndarray, basis: CenterBasis,
                     *, cross_check: bool = True) -> StationaryState:
    """Solve (I - internal_step) psi = source and remove center components.

    Raises ResidualTooLarge or CenterLeak when the solution violates its
    invariants, and NotConverged if the iterative cross-check stalls.
    """
    m = ops.arcs.arc_count
    eye_minus_step = np.eye(m) - ops.internal_step
    psi, *_ = np.linalg.lstsq(eye_minus_step, source, rcond=None)

    vectors = basis.vectors()
    ortho = None
    if vectors.size:
        ortho, _ = np.linalg.qr(vectors)
        psi = psi - ortho @ (ortho.conj().T @ psi)

    residual = float(np.max(np.abs(eye_minus_step @ psi - source))) if m else 0.0
    if residual > _RESIDUAL_TOL:
        raise ResidualTooLarge(f"stationary residual {residual!r} > {_RESIDUAL_TOL:g}")
    leak = float(np.max(np.abs(ortho.conj().T @ psi))) if ortho is not None else 0.0
    if leak > _LEAK_TOL:
        raise CenterLeak(f"center component {leak!r} > {_LEAK_TOL:g}")

    deviation = None
    if cross_check:
        deviation = _iterate_deviation(ops, source, psi)
        if deviation is not None and deviation > _CROSS_CHECK_TOL:
            raise ResidualTooLarge(
                f"solve and iteration disagree by {deviation!r} > {_CROSS_CHECK_TOL:g}"
            )
    return StationaryState(psi=psi, residual=residual, center_leak=leak,
                           iterate_deviation=deviation)


def _iterate_deviation(ops: WalkOperators, source: np.ndarray, psi: np.ndarray,
                       tol: float = 1e-11, max_steps: int = 100_000) -> float | None:
    """Drive the recursion to its limit and compare against psi.

    Returns None (check skipped) when the stable contraction rate is so
    close to 1 that the required steps would blow the budget; stable
    eigenvalues within a few 1e-5 of the circle occur for tails sharing a
    vertex, and no step cap reaches tolerance there.
    """
    if ops.arcs.arc_count == 0:
        return 0.0
    moduli = np.abs(np.linalg.eigvals(ops.internal_step))
    inside = moduli[moduli < 1.0 - 1e-8]
    rate = float(inside.max()) if inside.size else 0.0
    if rate > 0 and 35.0 / (1.0 - rate) > 60_000:
        return None
    current = np.zeros_like(source)
    residual = float("inf")
    for _ in range(max_steps):
        nxt = ops.internal_step @ current + source
        residual = float(np.max(np.abs(nxt - current)))
        current = nxt
        if residual < tol:
            return float(np.max(np.abs(current - psi)))
    raise NotConverged("stationary cross-check iteration stalled", residual=residual)


def stationary_vertex_flux(psi: np.ndarray, ops: WalkOperators, u: int) -> complex:
    """Twice the tilde-degree-averaged sum of amplitudes entering vertex u."""
    total = sum(psi[a] for a in ops.arcs.arcs_into[u])
    return 2.0 / ops.tg.tilde_degree[u] * complex(total)


@dataclass(frozen=True)
class Outflows:
    """Per-tail outflow amplitudes extracted from a stationary state.

    `c` is the flux constant read back from the vertex fluxes (it must equal
    the inflow average; `c_deviation` records how far any vertex strays).
    `t_star`/`r_star` are set only for the two-tail unit-inflow read-out.
    """

    beta: np.ndarray
    c: complex
    c_deviation: float
    t_star: complex | None
    r_star: complex | None


def transmission_reflection(ops: WalkOperators, psi: np.ndarray,
                            alpha: np.ndarray) -> Outflows:
    """Read every tail's outflow off the stationary state.

    The outflow on tail j attached at u is
    -alpha_j + flux(u) + (2/tilde_d(u)) * total inflow at u.
    """
    tg = ops.tg
    alpha = np.asarray(alpha, dtype=complex)
    inflow_at = tg.vertex_inflow(alpha)
    tilde = np.array(tg.tilde_degree, dtype=float)

    flux = np.array([stationary_vertex_flux(psi, ops, u) for u in range(tg.internal.vertex_count)])
    beta = np.array(
        [
            -alpha[j] + flux[u] + 2.0 / tilde[u] * inflow_at[u]
            for j, u in enumerate(tg.tail_attachments)
        ]
    )
    per_vertex_c = flux / 2.0 + inflow_at / tilde
    average = complex(np.mean(alpha))
    c_deviation = float(np.max(np.abs(per_vertex_c - average))) if per_vertex_c.size else 0.0

    t_star = r_star = None
    if tg.tail_count == 2 and abs(alpha[0] - 1.0) < 1e-12 and abs(alpha[1]) < 1e-12:
        u_in, u_out = tg.tail_attachments
        if u_in == u_out:
            t_star = flux[u_out] + 2.0 / tilde[u_out]
        else:
            t_star = flux[u_out]
        r_star = flux[u_in] + 2.0 / tilde[u_in] - 1.0
    return Outflows(beta=beta, c=average, c_deviation=c_deviation,
                    t_star=t_star, r_star=r_star)


def scattering_matrix(ops: WalkOperators, basis: CenterBasis,
                      *, tol: float = 1e-8, cross_check: bool = True) -> np.ndarray:
    """Outflow response to unit inflow on each tail, column by column.

    The result must equal the Grover matrix of the tail count; raises
    MatrixMismatch otherwise.
    """
    r = ops.tg.tail_count
    if r < 2:
        raise ValueError("scattering matrix needs at least two tails")
    matrix = np.zeros((r, r), dtype=complex)
    for j in range(r):
        drive = DriveConfig.unit(r, which=j)
        source = inflow_source(ops.tg, ops.arcs, drive)
        state = solve_stationary(ops, source, basis, cross_check=cross_check)
        outflows = transmission_reflection(ops, state.psi, drive.inflow_vector)
        matrix[:, j] = outflows.beta
    deviation = float(np.max(np.abs(matrix - grover_matrix(r))))
    if deviation > tol:
        raise MatrixMismatch(
            f"scattering matrix deviates from Grover by {deviation!r} > {tol:g}",
            deviation=deviation,
            matrix=matrix,
        )
    return matrix


@dataclass(frozen=True, eq=False)
class ExtendedState:
    """Stationary state extended onto explicitly truncated tails.

    Inbound tail arcs carry alpha_j, outbound carry beta_j, internal arcs
    the solved state.  `stationarity_residual` is the worst violation of
    the one-step fixed-point equation over arcs whose origin neighborhood
    is complete inside the truncation.
    """

    trunc: TruncatedTails
    state: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    stationarity_residual: float

    @property
    def average_inflow(self) -> complex:
        return complex(np.mean(self.alpha))


def extend_to_tails(ops: WalkOperators, psi: np.ndarray, alpha: np.ndarray,
                    beta: np.ndarray, length: int = 8) -> ExtendedState:
    """Assemble the whole-graph stationary state on truncated tails."""
    trunc = truncate_tails(ops.tg, length)
    state = np.zeros(trunc.arcs.arc_count, dtype=complex)
    state[trunc.internal_arcs] = psi
    for j in range(ops.tg.tail_count):
        state[trunc.inbound[j]] = alpha[j]
        state[trunc.outbound[j]] = beta[j]

    one_step = grover_unitary(trunc.graph, trunc.arcs) @ state
    checkable = trunc.distance[trunc.arcs.origin] < length
    gap = np.abs(one_step - state)[checkable]
    residual = float(gap.max()) if gap.size else 0.0
    return ExtendedState(trunc=trunc, state=state, alpha=np.asarray(alpha, dtype=complex),
                         beta=np.asarray(beta, dtype=complex), stationarity_residual=residual)


@dataclass(frozen=True)
class LawCheck:
    magnitude: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.magnitude <= self.tolerance)


@dataclass
class FlowLawReport:
    """Named conservation-law checks over an extended stationary state."""

    checks: dict[str, LawCheck] = field(default_factory=dict)
    internal_mass: float = 0.0
    mass_bound: float = 0.0
    mass_bound_applies: bool = False

    @property
    def all_passed(self) -> bool:
        return all(check.passed for check in self.checks.values())

    def raise_if_violated(self) -> None:
        for name, check in self.checks.items():
            if not check.passed:
                raise LawViolated(name, check.magnitude, check.tolerance)


def verify_laws(ops: WalkOperators, extended: ExtendedState,
                cycles: tuple[OrientedCycle, ...], *, seed: int = 0,
                cuts: int = 20, tol: float = 1e-10, strict: bool = False) -> FlowLawReport:
    """Run every stationary-state law at the given tolerance.

    Checks vertex in/out sums against ave(alpha) * degree, edge-pair sums
    against 2 ave(alpha), the shifted current's antisymmetry, vertex law and
    cycle sums, squared-flux balance across random vertex cuts, per-tail
    energy balance split into real and imaginary parts, the pointwise
    fixed-point equation, and (for the two-tail unit drive) the internal
    mass bound of half the edge count.
    """
    trunc = extended.trunc
    state = extended.state
    arcs = trunc.arcs
    average = extended.average_inflow
    report = FlowLawReport()

    complete = trunc.distance < trunc.length  # vertices with full neighborhoods
    in_sums = np.zeros(trunc.graph.vertex_count, dtype=complex)
    out_sums = np.zeros(trunc.graph.vertex_count, dtype=complex)
    np.add.at(in_sums, arcs.terminus, state)
    np.add.at(out_sums, arcs.origin, state)
    degrees = np.array(trunc.graph.degrees, dtype=float)
    expected = average * degrees
    report.checks["vertex_inflow_sum"] = LawCheck(
        float(np.max(np.abs((in_sums - expected)[complete]))), tol)
    report.checks["vertex_outflow_sum"] = LawCheck(
        float(np.max(np.abs((out_sums - expected)[complete]))), tol)

    pair_sum = state + state[arcs.reversal]
    report.checks["edge_pair_sum"] = LawCheck(
        float(np.max(np.abs(pair_sum - 2.0 * average))), tol)

    current = state - average
    report.checks["current_antisymmetry"] = LawCheck(
        float(np.max(np.abs(current + current[arcs.reversal]))), tol)
    current_in = np.zeros(trunc.graph.vertex_count, dtype=complex)
    np.add.at(current_in, arcs.terminus, current)
    report.checks["current_vertex_law"] = LawCheck(
        float(np.max(np.abs(current_in[complete]))), tol)

    cycle_worst = 0.0
    for cycle in cycles:
        total = sum(current[trunc.internal_arcs[a]] for a in cycle.arcs)
        cycle_worst = max(cycle_worst, abs(complex(total)))
    report.checks["cycle_voltage_law"] = LawCheck(cycle_worst, tol)

    n0 = ops.tg.internal.vertex_count
    rng = np.random.default_rng(seed)
    cut_worst = 0.0
    for _ in range(cuts):
        mask = rng.integers(0, 2, size=n0).astype(bool)
        if not mask.any():
            mask[int(rng.integers(0, n0))] = True
        inside = np.zeros(trunc.graph.vertex_count, dtype=bool)
        inside[:n0] = mask
        crossing_in = inside[arcs.terminus] & ~inside[arcs.origin]
        flux_in = float(np.sum(np.abs(state[crossing_in]) ** 2))
        flux_out = float(np.sum(np.abs(state[arcs.reversal[crossing_in]]) ** 2))
        cut_worst = max(cut_worst, abs(flux_in - flux_out))
    report.checks["cut_flux_balance"] = LawCheck(cut_worst, tol)

    alpha, beta = extended.alpha, extended.beta
    report.checks["tail_energy_real"] = LawCheck(
        abs(float(np.sum(alpha.real**2) - np.sum(beta.real**2))), tol)
    report.checks["tail_energy_imag"] = LawCheck(
        abs(float(np.sum(alpha.imag**2) - np.sum(beta.imag**2))), tol)
    report.checks["tail_energy_total"] = LawCheck(
        abs(float(np.sum(np.abs(alpha) ** 2) - np.sum(np.abs(beta) ** 2))), tol)

    report.checks["stationarity"] = LawCheck(extended.stationarity_residual, _STATIONARITY_TOL)

    report.internal_mass = float(np.sum(np.abs(state[trunc.internal_arcs]) ** 2))
    report.mass_bound = ops.tg.internal.edge_count / 2.0
    report.mass_bound_applies = bool(
        ops.tg.tail_count == 2
        and abs(alpha[0] - 1.0) < 1e-12
        and abs(alpha[1]) < 1e-12
    )
    if report.mass_bound_applies:
        shortfall = max(0.0, report.mass_bound - report.internal_mass)
        report.checks["internal_mass_bound"] = LawCheck(shortfall, tol)

    if strict:
        report.raise_if_violated()
    return report


def dirichlet_kernel_alignment(ops: WalkOperators) -> tuple[float, float, float]:
    """Singular-value picture of (dirichlet - degree_ratio).

    Returns (smallest singular value, second smallest, misalignment of the
    kernel direction with the square-rooted tilde degrees).  The kernel is
    one-dimensional and spanned by sqrt(tilde_d).
    """
    gap = ops.dirichlet - ops.degree_ratio
    _, singulars, vt = np.linalg.svd(gap)
    direction = vt[-1].conj()
    reference = np.sqrt(ops.tilde_degrees)
    reference = reference / np.linalg.norm(reference)
    overlap = abs(np.vdot(reference, direction / np.linalg.norm(direction)))
    second = float(singulars[-2]) if len(singulars) >= 2 else float("inf")
    return float(singulars[-1]), second, float(1.0 - overlap)


def master_equation_residual(ops: WalkOperators, psi: np.ndarray,
                             alpha: np.ndarray) -> float:
    """Residual of the vertex-space balance equation
    (dirichlet - degree_ratio)((1/2) M^{1/2} flux + M^{-1/2} inflow) = 0."""
    tg = ops.tg
    tilde = ops.tilde_degrees
    flux = np.array([stationary_vertex_flux(psi, ops, u) for u in range(tg.internal.vertex_count)])
    inflow_at = tg.vertex_inflow(np.asarray(alpha, dtype=complex))
    combined = 0.5 * np.sqrt(tilde) * flux + inflow_at / np.sqrt(tilde)
    residual = (ops.dirichlet - ops.degree_ratio) @ combined
    return float(np.max(np.abs(residual))) if residual.size else 0.0


def _pair(z: complex | None) -> list[float] | None:
    return None if z is None else [float(z.real), float(z.imag)]


def _pairs(values) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in values]


@dataclass(frozen=True, eq=False)
class ScatteringReport:
    """Complete stationary-scattering analysis of one driven tailed graph."""

    graph_summary: dict
    tails: tuple[int, ...]
    alpha: np.ndarray
    beta: np.ndarray
    c: complex
    t_star: complex | None
    r_star: complex | None
    matrix: np.ndarray | None
    kappa: np.ndarray
    checks: dict[str, LawCheck]
    internal_mass: float
    mass_bound: float
    mass_bound_applies: bool
    psi: np.ndarray

    @property
    def all_passed(self) -> bool:
        return all(check.passed for check in self.checks.values())

    def to_json_dict(self) -> dict:
        """JSON document; complex numbers become [re, im] pairs and the
        scattering matrix is flattened row-major."""
        matrix_doc = None
        if self.matrix is not None:
            order = self.matrix.shape[0]
            matrix_doc = {
                "order": order,
                "entries_row_major": _pairs(self.matrix.reshape(-1)),
            }
        return {
            "graph": self.graph_summary,
            "tails": list(self.tails),
            "alpha": _pairs(self.alpha),
            "beta": _pairs(self.beta),
            "c": _pair(self.c),
            "t_star": _pair(self.t_star),
            "r_star": _pair(self.r_star),
            "t_star_squared": None if self.t_star is None else float(abs(self.t_star) ** 2),
            "r_star_squared": None if self.r_star is None else float(abs(self.r_star) ** 2),
            "scattering_matrix": matrix_doc,
            "kappa": _pairs(self.kappa),
            "checks": {
                name: {
                    "passed": check.passed,
                    "magnitude": check.magnitude,
                    "tolerance": check.tolerance,
                }
                for name, check in sorted(self.checks.items())
            },
            "internal_mass": self.internal_mass,
            "internal_mass_bound": self.mass_bound,
            "internal_mass_bound_applies": self.mass_bound_applies,
            "psi": _pairs(self.psi),
        }


def build_scattering_report(ops: WalkOperators, basis: CenterBasis,
                            cycles: tuple[OrientedCycle, ...], drive: DriveConfig,
                            *, extension_length: int = 8, seed: int = 0,
                            include_matrix: bool = True, include_laws: bool = True,
                            cross_check: bool = True) -> ScatteringReport:
    """Solve the stationary problem and bundle every read-out and check."""
    tg = ops.tg
    alpha = drive.inflow_vector
    source = inflow_source(tg, ops.arcs, drive)
    state = solve_stationary(ops, source, basis, cross_check=cross_check)
    outflows = transmission_reflection(ops, state.psi, alpha)

    checks: dict[str, LawCheck] = {
        "stationary_residual": LawCheck(state.residual, _RESIDUAL_TOL),
        "center_leak": LawCheck(state.center_leak, _LEAK_TOL),
        "flux_constant_emergence": LawCheck(outflows.c_deviation, 1e-10),
        "master_equation": LawCheck(master_equation_residual(ops, state.psi, alpha), 1e-10),
        "outflow_energy_balance": LawCheck(
            abs(float(np.sum(np.abs(alpha) ** 2) - np.sum(np.abs(outflows.beta) ** 2))), 1e-10
        ),
    }
    if state.iterate_deviation is not None:
        checks["solve_iterate_agreement"] = LawCheck(state.iterate_deviation, _CROSS_CHECK_TOL)

    matrix = None
    if include_matrix and tg.tail_count >= 2:
        try:
            matrix = scattering_matrix(ops, basis, cross_check=cross_check)
            deviation = float(np.max(np.abs(matrix - grover_matrix(tg.tail_count))))
        except MatrixMismatch as exc:
            matrix = exc.matrix
            deviation = exc.deviation
        checks["scattering_matrix_match"] = LawCheck(deviation, 1e-8)

    internal_mass = float(np.sum(np.abs(state.psi) ** 2))
    mass_bound = tg.internal.edge_count / 2.0
    applies = bool(
        tg.tail_count == 2 and abs(alpha[0] - 1.0) < 1e-12 and abs(alpha[1]) < 1e-12
    )
    if include_laws:
        extended = extend_to_tails(ops, state.psi, alpha, outflows.beta, length=extension_length)
        laws = verify_laws(ops, extended, cycles, seed=seed)
        checks.update(laws.checks)

    flux = np.array(
        [stationary_vertex_flux(state.psi, ops, u) for u in range(tg.internal.vertex_count)]
    )
    summary = {
        "vertex_count": tg.internal.vertex_count,
        "edge_count": tg.internal.edge_count,
        "cycle_count": tg.internal.cycle_count,
        "tilde_degrees": list(tg.tilde_degree),
    }
    return ScatteringReport(
        graph_summary=summary,
        tails=tg.tail_attachments,
        alpha=alpha,
        beta=outflows.beta,
        c=outflows.c,
        t_star=outflows.t_star,
        r_star=outflows.r_star,
        matrix=matrix,
        kappa=flux,
        checks=checks,
        internal_mass=internal_mass,
        mass_bound=mass_bound,
        mass_bound_applies=applies,
        psi=state.psi,
    )
