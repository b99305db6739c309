"""Dense operator assembly for the Grover walk cut to internal arcs.

All matrices are complex even where entries are real, so spectral analysis
runs through one code path.  Graphs are desk scale by design; nothing here
is sparse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import ArcSpace, InternalGraph, TailedGraph


def grover_matrix(d: int) -> np.ndarray:
    """The d-dimensional Grover matrix, entries 2/d - delta_ij.

    Symmetric, orthogonal, and self-inverse; every row sums to 1.
    """
    if d < 1:
        raise ValueError(f"Grover matrix dimension must be positive, got {d}")
    return np.full((d, d), 2.0 / d) - np.eye(d)


@dataclass(frozen=True, eq=False)
class WalkOperators:
    """Every operator of the walk calculus for one tailed graph.

    incidence      (|V|, |A|)  row u has 1/sqrt(tilde_d(u)) on arcs ending at u
    shift          (|A|, |A|)  arc-reversal permutation
    coin           (|A|, |A|)  local Grover reflection, block per terminus class
    internal_step  (|A|, |A|)  shift @ coin; one walk step cut to internal arcs
    degree_ratio   (|V|, |V|)  diagonal of internal degree over tilde degree
    dirichlet      (|V|, |V|)  degree-normalized adjacency (tilde degrees)
    vertex_step    (2|V|,2|V|) vertex-space companion intertwined with internal_step
    lift           (|A|, 2|V|) [incidence* , shift @ incidence*]
    """

    tg: TailedGraph
    arcs: ArcSpace
    incidence: np.ndarray
    shift: np.ndarray
    coin: np.ndarray
    internal_step: np.ndarray
    degree_ratio: np.ndarray
    dirichlet: np.ndarray
    vertex_step: np.ndarray
    lift: np.ndarray

    @property
    def tilde_degrees(self) -> np.ndarray:
        return np.array(self.tg.tilde_degree, dtype=float)


def build_operators(tg: TailedGraph, arcs: ArcSpace) -> WalkOperators:
    """Assemble all dense operators for a tailed graph.

    The coin at vertex u mixes arcs by the whole-graph degree tilde_d(u),
    which is how tails enter the internal dynamics.
    """
    n = tg.internal.vertex_count
    m = arcs.arc_count
    tilde = np.array(tg.tilde_degree, dtype=float)

    incidence = np.zeros((n, m), dtype=complex)
    for a in range(m):
        u = arcs.terminus[a]
        incidence[u, a] = 1.0 / np.sqrt(tilde[u])

    shift = np.zeros((m, m), dtype=complex)
    shift[np.arange(m), arcs.reversal] = 1.0

    coin = 2.0 * incidence.conj().T @ incidence - np.eye(m)
    internal_step = shift @ coin
    degree_ratio = incidence @ incidence.conj().T
    dirichlet = incidence @ shift @ incidence.conj().T

    eye = np.eye(n)
    vertex_step = np.block(
        [[np.zeros((n, n)), -eye], [2.0 * degree_ratio - eye, 2.0 * dirichlet]]
    )
    lift = np.hstack([incidence.conj().T, shift @ incidence.conj().T])

    return WalkOperators(
        tg=tg,
        arcs=arcs,
        incidence=incidence,
        shift=shift,
        coin=coin,
        internal_step=internal_step,
        degree_ratio=degree_ratio,
        dirichlet=dirichlet,
        vertex_step=vertex_step,
        lift=lift,
    )


def grover_unitary(g: InternalGraph, arcs: ArcSpace) -> np.ndarray:
    """One-step Grover evolution of a finite graph using its own degrees.

    Row a reads -1 from the reversed arc plus 2/deg(o(a)) from every arc
    ending at o(a).  Unitary for any finite simple graph.
    """
    m = arcs.arc_count
    deg = g.degrees
    u = np.zeros((m, m), dtype=complex)
    for a in range(m):
        o = arcs.origin[a]
        for b in arcs.arcs_into[o]:
            u[a, b] += 2.0 / deg[o]
        u[a, arcs.reversal[a]] -= 1.0
    return u


def intertwine_residual(ops: WalkOperators) -> float:
    """Max-abs entry of internal_step @ lift - lift @ vertex_step."""
    lhs = ops.internal_step @ ops.lift
    rhs = ops.lift @ ops.vertex_step
    return float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0


def vertex_moments(ops: WalkOperators, n_max: int) -> list[np.ndarray]:
    """Vertex-space walk moments for powers 0..n_max.

    Moment n equals incidence @ internal_step**n @ shift @ incidence*, but
    is computed through the three-term recursion: the zeroth moment is the
    Dirichlet operator T, the first is 2T^2 - D, and thereafter
    X_n = 2 T X_{n-1} - (2D - I) X_{n-2}.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    t = ops.dirichlet
    d = ops.degree_ratio
    moments = [t.copy()]
    if n_max >= 1:
        moments.append(2.0 * t @ t - d)
    two_d_minus_i = 2.0 * d - np.eye(d.shape[0])
    for _ in range(2, n_max + 1):
        moments.append(2.0 * t @ moments[-1] - two_d_minus_i @ moments[-2])
    return moments


def dump_matrix(mat: np.ndarray) -> str:
    """Serialize a matrix row-major as space-separated "re,im" pairs."""
    lines = []
    for row in np.atleast_2d(mat):
        lines.append(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    """Inverse of dump_matrix."""
    rows = []
    for line in text.splitlines():
        if not line.strip():
            continue
        rows.append([complex(*map(float, pair.split(","))) for pair in line.split()])
    return np.array(rows, dtype=complex)
