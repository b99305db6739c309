"""Run configuration and the analysis pipeline shared by CLI and service.

A run loads one graph, attaches tails, dispatches to the requested analysis
mode, and emits one JSON-serializable report.  Exit status convention:
0 all checks passed, 2 some check failed or a solver assertion tripped,
1 usage or I/O problems (raised to the caller as exceptions).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dynamics, scattering, spectral
from .errors import AnalysisError, ConfigError, IoError
from .graphs import arc_space, attach_tails, fundamental_cycles, parse_edge_list
from .operators import build_operators

MODES = ("evolve", "stationary", "spectrum", "scatter", "verify", "all")
FORMATS = ("json", "csv")
_CSV_MODES = ("evolve", "spectrum")

TOLERANCES = {
    "stationary_residual": 1e-10,
    "center_leak": 1e-10,
    "law": 1e-10,
    "stationarity": 1e-12,
    "scattering_match": 1e-8,
    "solve_iterate_agreement": 1e-8,
    "truncated_agreement": 1e-12,
    "span_angle": 1e-8,
    "eigen_eps": 1e-8,
}


@dataclass(frozen=True)
class RunConfig:
    """One analysis request.

    Exactly one of graph_path/graph_text must be provided.  The default
    inflow is amplitude 1 on the first tail and 0 elsewhere.
    """

    tails: tuple[int, ...]
    graph_path: str | None = None
    graph_text: str | None = None
    inflow: tuple[complex, ...] | None = None
    z: complex = 1.0 + 0.0j
    mode: str = "all"
    steps: int | None = None
    tol: float = 1e-10
    truncation: int | None = None
    fmt: str = "json"
    seed: int = 0
    out: str | None = None

    def validate(self) -> None:
        if (self.graph_path is None) == (self.graph_text is None):
            raise ConfigError("provide exactly one of graph_path or graph_text")
        if not self.tails:
            raise ConfigError("at least one tail attachment is required")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.fmt not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.fmt!r}")
        if self.fmt == "csv" and self.mode not in _CSV_MODES:
            raise ConfigError(f"csv output is available for modes {_CSV_MODES} only")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if abs(abs(self.z) - 1.0) > 1e-12:
            raise ConfigError(f"|z| must be 1, got {abs(self.z)!r}")
        if self.inflow is not None and len(self.inflow) != len(self.tails):
            raise ConfigError(
                f"inflow has {len(self.inflow)} amplitudes for {len(self.tails)} tails"
            )
        if self.truncation is not None and self.truncation < 2:
            raise ConfigError("truncation must be at least 2")
        if self.steps is not None and self.steps < 1:
            raise ConfigError("steps must be at least 1")
        if self.mode in ("stationary", "scatter", "verify", "all") and abs(self.z - 1.0) > 1e-12:
            raise ConfigError("stationary and scattering analyses require z = 1")

    def drive_amplitudes(self) -> tuple[complex, ...]:
        if self.inflow is not None:
            return tuple(complex(a) for a in self.inflow)
        return tuple(1.0 + 0j if j == 0 else 0j for j in range(len(self.tails)))


@dataclass
class RunResult:
    report: dict
    exit_code: int
    tables: dict[str, str] = field(default_factory=dict)


def _pair(z: complex | None) -> list[float] | None:
    return None if z is None else [float(z.real), float(z.imag)]


def _pairs(values) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in values]


def _check(magnitude: float, tolerance: float, passed: bool | None = None) -> dict:
    ok = magnitude <= tolerance if passed is None else passed
    return {"passed": bool(ok), "magnitude": float(magnitude), "tolerance": float(tolerance)}


def load_graph_text(config: RunConfig) -> str:
    if config.graph_text is not None:
        return config.graph_text
    try:
        return Path(config.graph_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read graph file {config.graph_path!r}: {exc}") from exc


def run(config: RunConfig) -> RunResult:
    """Execute one analysis run.

    Usage and input errors propagate as exceptions (exit code 1 territory);
    analysis failures are folded into the report with exit code 2.
    """
    config.validate()
    graph = parse_edge_list(load_graph_text(config))
    tg = attach_tails(graph, list(config.tails))
    arcs = arc_space(graph)
    ops = build_operators(tg, arcs)
    cycles = fundamental_cycles(graph, arcs)
    drive = dynamics.DriveConfig(inflow=config.drive_amplitudes(), z=config.z)

    report: dict = {
        "config": {
            "mode": config.mode,
            "tails": list(config.tails),
            "inflow": _pairs(drive.inflow),
            "z": _pair(config.z),
            "tol": config.tol,
            "steps": config.steps,
            "truncation": config.truncation,
            "seed": config.seed,
            "format": config.fmt,
            "tolerances": dict(TOLERANCES),
        },
        "graph": {
            "vertex_count": graph.vertex_count,
            "edge_count": graph.edge_count,
            "edges": [list(e) for e in graph.edges],
            "degrees": list(graph.degrees),
            "tilde_degrees": list(tg.tilde_degree),
            "boundary": list(tg.boundary),
            "tail_count": tg.tail_count,
            "cycle_count": graph.cycle_count,
        },
    }
    checks: dict[str, dict] = {}
    tables: dict[str, str] = {}

    try:
        if config.mode in ("evolve", "all"):
            _run_evolve(config, ops, drive, report, checks, tables)
        basis = None
        if config.mode in ("stationary", "spectrum", "scatter", "verify", "all"):
            basis = spectral.center_basis(ops, cycles)
        if config.mode in ("spectrum", "all"):
            _run_spectrum(config, ops, basis, report, checks, tables)
        if config.mode in ("stationary", "all"):
            _run_stationary(ops, basis, drive, report, checks)
        if config.mode in ("scatter", "verify", "all"):
            sr = scattering.build_scattering_report(
                ops, basis, cycles, drive,
                extension_length=config.truncation or 8,
                seed=config.seed,
                include_matrix=config.mode in ("scatter", "all") and tg.tail_count >= 2,
                include_laws=config.mode in ("verify", "all"),
            )
            report["scattering"] = sr.to_json_dict()
            for name, law in sr.checks.items():
                checks[name] = _check(law.magnitude, law.tolerance)
    except AnalysisError as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}

    report["checks"] = {name: checks[name] for name in sorted(checks)}
    ok = "error" not in report and all(c["passed"] for c in checks.values())
    report["ok"] = ok
    report["status"] = 0 if ok else 2
    return RunResult(report=report, exit_code=report["status"], tables=tables)


def _run_evolve(config: RunConfig, ops, drive, report: dict, checks: dict,
                tables: dict) -> None:
    keep = config.fmt == "csv"
    trajectory = dynamics.evolve(
        ops, drive, tol=config.tol, max_steps=config.steps,
        keep_states=keep, require_convergence=False,
    )
    final_residual = float(trajectory.residuals[-1]) if trajectory.residuals.size else 0.0
    section = {
        "converged": trajectory.converged,
        "steps_taken": trajectory.steps_taken,
        "final_residual": final_residual,
        "stationary_estimate": _pairs(trajectory.stationary_estimate),
    }
    checks["evolve_converged"] = _check(final_residual, config.tol, passed=trajectory.converged)

    tail_length = config.truncation or 48
    check_steps = min(40, tail_length - 1)
    reference = dynamics.evolve_truncated(ops.tg, ops.arcs, drive, tail_length, check_steps)
    source = dynamics.inflow_source(ops.tg, ops.arcs, drive)
    psi = np.zeros(ops.arcs.arc_count, dtype=complex)
    deviation = 0.0
    for n in range(check_steps):
        psi = dynamics.step(psi, n, ops, source, drive.z)
        gap = np.abs(reference.internal_state(n + 1) - psi)
        if gap.size:
            deviation = max(deviation, float(gap.max()))
    section["truncated_check"] = {
        "steps": check_steps,
        "tail_length": tail_length,
        "max_deviation": deviation,
    }
    checks["truncated_agreement"] = _check(deviation, TOLERANCES["truncated_agreement"])
    report["evolve"] = section
    if keep:
        tables["trajectory"] = trajectory.to_csv()


def _run_spectrum(config: RunConfig, ops, basis, report: dict, checks: dict,
                  tables: dict) -> None:
    decomp = spectral.eigen_classify(ops, eps=TOLERANCES["eigen_eps"])
    span = spectral.center_span_report(decomp, basis)
    report["spectrum"] = {
        "eigenvalues": _pairs(decomp.eigenvalues),
        "classes": list(decomp.classes),
        "max_modulus": decomp.max_modulus,
        "center_dim": decomp.center_dim,
        "basis_dims": {
            "circulations": len(basis.circulations),
            "alternations": len(basis.alternations),
            "interior_modes": len(basis.interior_modes),
        },
        "sigma_per": [float(x) for x in basis.sigma_per],
        "max_principal_angle": span.max_principal_angle,
        "eigenvalue_match": span.eigenvalue_match,
    }
    checks["spectral_radius_bound"] = _check(max(0.0, decomp.max_modulus - 1.0), 1e-10)
    checks["center_span_angle"] = _check(span.max_principal_angle, TOLERANCES["span_angle"])
    checks["center_dimension_match"] = _check(
        abs(span.center_dim - span.basis_dim), 0.0, passed=span.center_dim == span.basis_dim
    )
    checks["center_eigenvalue_match"] = _check(
        0.0, 0.0, passed=span.eigenvalue_match
    )
    if config.fmt == "csv":
        tables["spectrum"] = spectral.spectrum_csv(decomp)


def _run_stationary(ops, basis, drive, report: dict, checks: dict) -> None:
    source = dynamics.inflow_source(ops.tg, ops.arcs, drive)
    state = scattering.solve_stationary(ops, source, basis)
    report["stationary"] = {
        "psi": _pairs(state.psi),
        "residual": state.residual,
        "center_leak": state.center_leak,
        "iterate_deviation": state.iterate_deviation,
    }
    checks["stationary_residual"] = _check(state.residual, TOLERANCES["stationary_residual"])
    checks["center_leak"] = _check(state.center_leak, TOLERANCES["center_leak"])
    if state.iterate_deviation is not None:
        checks["solve_iterate_agreement"] = _check(
            state.iterate_deviation, TOLERANCES["solve_iterate_agreement"]
        )


def report_json(report: dict) -> str:
    """Canonical JSON rendering: sorted keys, deterministic floats."""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"
