"""Eigen-classification of the internal step and explicit center bases.

The internal step operator is not normal, so the analysis works with a
general dense eigensolver plus explicit residual checks.  Its unit-modulus
eigenspace decomposes into three explicitly constructible families:

* circulations: antisymmetric +/-1 flows around fundamental cycles
  (eigenvalue +1);
* alternations: reversal-symmetric alternating-sign edge weights from even
  cycles, and from pairs of odd cycles joined through the spanning tree
  (eigenvalue -1);
* interior modes: lifted eigenvectors of the Dirichlet vertex operator that
  vanish on every tail attachment vertex (conjugate eigenvalue pairs
  exp(+-i arccos x)).

Membership is always confirmed against the eigen-equation itself; the sign
patterns above are construction recipes, not the ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    AmbiguousClassification,
    ConstructionFailed,
    JordanBlockOnCircle,
    SpanMismatch,
    UnstableEigenvalueFound,
)
from .graphs import ArcSpace, InternalGraph, OrientedCycle, bfs_parents
from .operators import WalkOperators

_GUARD_ANNULUS = 1e-6
_EIGEN_CHECK_TOL = 1e-10
_RANK_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues and right eigenvectors with a modulus classification.

    `classes[i]` is "stable" (|lambda| < 1 - eps), "center"
    (within eps of the unit circle), or "unstable" (|lambda| > 1 + eps);
    `residuals[i]` is the max-abs eigen-equation residual of column i.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    classes: tuple[str, ...]
    residuals: np.ndarray
    eps: float

    @property
    def center_mask(self) -> np.ndarray:
        return np.array([c == "center" for c in self.classes], dtype=bool)

    @property
    def center_values(self) -> np.ndarray:
        return self.eigenvalues[self.center_mask]

    @property
    def center_vectors(self) -> np.ndarray:
        return self.eigenvectors[:, self.center_mask]

    @property
    def center_dim(self) -> int:
        return int(self.center_mask.sum())

    @property
    def stable_values(self) -> np.ndarray:
        mask = np.array([c == "stable" for c in self.classes], dtype=bool)
        return self.eigenvalues[mask]

    @property
    def max_modulus(self) -> float:
        return float(np.max(np.abs(self.eigenvalues))) if self.eigenvalues.size else 0.0

    def to_csv(self) -> str:
        lines = ["re,im,modulus,class"]
        for lam, cls in zip(self.eigenvalues, self.classes):
            lines.append(f"{float(lam.real)!r},{float(lam.imag)!r},{float(abs(lam))!r},{cls}")
        return "\n".join(lines) + "\n"


def eigen_classify(ops: WalkOperators, eps: float = 1e-8,
                   guard: float = _GUARD_ANNULUS) -> SpectralDecomposition:
    """Full eigen-decomposition of the internal step, classified by modulus.

    The guard annulus [1 - guard, 1 - eps) must stay empty: an eigenvalue
    there is stable by classification but too close to the circle to trust.
    Tails sharing a vertex routinely produce gaps of a few 1e-5, so the
    default guard is 1e-6; widen it for graphs known to be well separated.

    Raises:
        UnstableEigenvalueFound: some |lambda| > 1 + eps, which the
            contraction structure of the operator forbids.
        AmbiguousClassification: an eigenvalue modulus falls in the guard
            annulus, too close to call reliably.
        JordanBlockOnCircle: a unit-modulus eigenvalue cluster has fewer
            independent eigenvectors than its algebraic multiplicity.
    """
    if not 0 < eps <= 1e-4:
        raise ValueError("eps must lie in (0, 1e-4]")
    if guard < eps:
        raise ValueError("guard must be at least eps")
    e = ops.internal_step
    m = e.shape[0]
    if m == 0:
        return SpectralDecomposition(
            eigenvalues=np.zeros(0, dtype=complex),
            eigenvectors=np.zeros((0, 0), dtype=complex),
            classes=(),
            residuals=np.zeros(0),
            eps=eps,
        )
    values, vectors = np.linalg.eig(e)
    moduli = np.abs(values)

    worst = float(moduli.max())
    if worst > 1.0 + eps:
        raise UnstableEigenvalueFound(f"eigenvalue modulus {worst!r} exceeds 1 + {eps:g}")
    in_annulus = (moduli >= 1.0 - guard) & (moduli < 1.0 - eps)
    if in_annulus.any():
        worst_gap = float(moduli[in_annulus].max())
        raise AmbiguousClassification(
            f"eigenvalue modulus {worst_gap!r} sits in the guard annulus "
            f"[{1 - guard}, {1 - eps}); classification unreliable"
        )

    classes = tuple(
        "center" if abs(mod - 1.0) <= eps else ("stable" if mod < 1.0 - eps else "unstable")
        for mod in moduli
    )
    residuals = np.array(
        [float(np.max(np.abs(e @ vectors[:, i] - values[i] * vectors[:, i]))) for i in range(m)]
    )
    decomp = SpectralDecomposition(
        eigenvalues=values, eigenvectors=vectors, classes=classes,
        residuals=residuals, eps=eps,
    )
    _check_semisimple_center(e, decomp)
    return decomp


def _check_semisimple_center(e: np.ndarray, decomp: SpectralDecomposition) -> None:
    """Every center eigenvalue must have eigenvector count equal to its
    algebraic multiplicity (rank test at 1e-8)."""
    center = decomp.eigenvalues[decomp.center_mask]
    for lam, count in _cluster(center):
        gap = e - lam * np.eye(e.shape[0])
        singulars = np.linalg.svd(gap, compute_uv=False)
        geometric = int(np.sum(singulars < _RANK_TOL))
        if geometric < count:
            raise JordanBlockOnCircle(
                f"eigenvalue {lam!r}: algebraic multiplicity {count}, "
                f"eigenvector count {geometric}"
            )


def _cluster(values: np.ndarray, tol: float = 1e-7) -> list[tuple[complex, int]]:
    """Group nearly equal complex values into (representative, count) pairs."""
    groups: list[tuple[complex, int]] = []
    used = np.zeros(len(values), dtype=bool)
    for i, lam in enumerate(values):
        if used[i]:
            continue
        close = np.abs(values - lam) < tol
        close &= ~used
        used |= close
        members = values[close]
        groups.append((complex(members.mean()), int(close.sum())))
    return groups


# ---------------------------------------------------------------------------
# explicit center bases


def circulation_basis(cycles: tuple[OrientedCycle, ...], arcs: ArcSpace) -> list[np.ndarray]:
    """+1 on each cycle's arcs and -1 on their reversals, one vector per
    fundamental cycle.  Fixed vectors of the internal step."""
    vectors = []
    for cycle in cycles:
        w = np.zeros(arcs.arc_count, dtype=complex)
        for a in cycle.arcs:
            w[a] = 1.0
            w[arcs.reversal[a]] = -1.0
        vectors.append(w)
    return vectors


def alternating_basis(cycles: tuple[OrientedCycle, ...], arcs: ArcSpace,
                      g: InternalGraph, internal_step: np.ndarray) -> list[np.ndarray]:
    """Reversal-symmetric vectors negated by the internal step.

    Even cycles contribute alternating +-1 edge weights directly.  With two
    or more odd cycles, the first is paired with each of the others through
    an even closed walk (out along the spanning tree, around the second
    cycle, and back); alternating signs accumulated along the walk give the
    edge weights, doubling on the connecting path.  Every vector is checked
    against the eigen-equation before it is returned.
    """
    evens = [c for c in cycles if not c.odd]
    odds = [c for c in cycles if c.odd]
    vectors: list[np.ndarray] = []

    for cycle in evens:
        vectors.append(_accumulate_walk(list(cycle.arcs), arcs))

    if len(odds) >= 2:
        anchor = odds[0]
        parent = bfs_parents(g)
        tree_adj: list[list[int]] = [[] for _ in range(g.vertex_count)]
        for u in range(g.vertex_count):
            if parent[u] >= 0:
                tree_adj[u].append(parent[u])
                tree_adj[parent[u]].append(u)
        for other in odds[1:]:
            path = _tree_path(tree_adj, _cycle_vertices(anchor, arcs), _cycle_vertices(other, arcs))
            walk = _paired_walk(anchor, other, path, arcs)
            vectors.append(_accumulate_walk(walk, arcs))

    for w in vectors:
        scale = max(1.0, float(np.max(np.abs(w))))
        residual = float(np.max(np.abs(internal_step @ w + w))) if w.size else 0.0
        if residual > _EIGEN_CHECK_TOL * scale or not np.any(w):
            raise ConstructionFailed(
                f"alternating vector fails (-1) eigen-equation, residual {residual!r}"
            )
    return vectors


def _cycle_vertices(cycle: OrientedCycle, arcs: ArcSpace) -> set[int]:
    return {int(arcs.origin[a]) for a in cycle.arcs}


def _tree_path(tree_adj: list[list[int]], sources: set[int], targets: set[int]) -> list[int]:
    """Vertex path through the spanning tree from one set to the other.

    Empty when the sets intersect; otherwise the interior touches neither
    set, so the path edges are disjoint from both cycles.
    """
    common = sources & targets
    if common:
        return [min(common)]
    prev: dict[int, int | None] = {u: None for u in sources}
    queue = list(sorted(sources))
    hit = None
    while queue:
        u = queue.pop(0)
        if u in targets:
            hit = u
            break
        for v in sorted(tree_adj[u]):
            if v not in prev:
                prev[v] = u
                queue.append(v)
    if hit is None:
        raise ConstructionFailed("spanning tree does not connect the two cycles")
    path = [hit]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    path.reverse()
    return path


def _rotate_to(cycle: OrientedCycle, start: int, arcs: ArcSpace) -> list[int]:
    seq = list(cycle.arcs)
    for k, a in enumerate(seq):
        if arcs.origin[a] == start:
            return seq[k:] + seq[:k]
    raise ConstructionFailed(f"vertex {start} not on cycle")


def _paired_walk(anchor: OrientedCycle, other: OrientedCycle,
                 path: list[int], arcs: ArcSpace) -> list[int]:
    """Even closed walk: anchor cycle, connector, other cycle, connector back."""
    start, end = path[0], path[-1]
    forward = [arcs.index(path[i], path[i + 1]) for i in range(len(path) - 1)]
    backward = [arcs.reversal[a] for a in reversed(forward)]
    return _rotate_to(anchor, start, arcs) + forward + _rotate_to(other, end, arcs) + backward


def _accumulate_walk(walk: list[int], arcs: ArcSpace) -> np.ndarray:
    """Alternating signs along an even closed walk, accumulated per edge and
    symmetrized over arc reversal."""
    w = np.zeros(arcs.arc_count, dtype=complex)
    for position, a in enumerate(walk):
        sign = -1.0 if position % 2 else 1.0
        w[a] += sign
        w[arcs.reversal[a]] += sign
    return w


def interior_mode_basis(ops: WalkOperators) -> list[tuple[complex, np.ndarray]]:
    """Center eigenpairs lifted from Dirichlet eigenvectors that vanish on
    every tail attachment vertex.

    For each Dirichlet eigenvalue x, boundary vanishing is tested on the
    whole eigenspace at once (null space of the boundary-row block), not
    vector by vector.  Each surviving g yields the conjugate pair
    exp(+-i arccos x) with vectors incidence* g - lambda shift incidence* g.
    Eigenvalues x = +-1 never qualify and are skipped.
    """
    n = ops.tg.internal.vertex_count
    if ops.arcs.arc_count == 0:
        return []
    x_values, g_matrix = np.linalg.eigh(ops.dirichlet.real)
    boundary = list(ops.tg.boundary)
    modes: list[tuple[complex, np.ndarray]] = []

    i = 0
    while i < n:
        j = i
        while j + 1 < n and abs(x_values[j + 1] - x_values[i]) < 1e-8:
            j += 1
        x = float(np.mean(x_values[i : j + 1]))
        block = g_matrix[:, i : j + 1]
        if min(abs(x - 1.0), abs(x + 1.0)) > 1e-10:
            for g in _boundary_vanishing(block, boundary):
                lam = np.exp(1j * np.arccos(np.clip(x, -1.0, 1.0)))
                lifted = ops.incidence.conj().T @ g
                shifted = ops.shift @ lifted
                for eigenvalue in (lam, np.conj(lam)):
                    v = lifted - eigenvalue * shifted
                    residual = float(np.max(np.abs(ops.internal_step @ v - eigenvalue * v)))
                    if residual > _EIGEN_CHECK_TOL * max(1.0, float(np.max(np.abs(v)))):
                        raise ConstructionFailed(
                            f"interior mode for x = {x!r} fails eigen-equation, residual {residual!r}"
                        )
                    modes.append((complex(eigenvalue), v))
        i = j + 1
    return modes


def _boundary_vanishing(block: np.ndarray, boundary: list[int]) -> list[np.ndarray]:
    """Orthonormal combinations of the eigenspace columns vanishing on the
    boundary rows, found through a small least-squares null problem."""
    k = block.shape[1]
    rows = block[boundary, :]
    if rows.size == 0:
        null = np.eye(k)
    else:
        _, singulars, vt = np.linalg.svd(rows)
        tiny = int(np.sum(singulars < 1e-10)) + max(0, k - len(singulars))
        if tiny == 0:
            return []
        null = vt[k - tiny :, :].conj().T
    combos = block @ null
    out = []
    for col in range(combos.shape[1]):
        g = combos[:, col]
        out.append(g / np.linalg.norm(g))
    return out


@dataclass(frozen=True, eq=False)
class CenterBasis:
    """Constructed basis of the unit-circle eigenspace.

    `sigma_per` lists the Dirichlet eigenvalues x whose eigenvectors vanish
    on the boundary; each contributes the conjugate pair with cosine x.
    """

    circulations: tuple[np.ndarray, ...]
    alternations: tuple[np.ndarray, ...]
    interior_modes: tuple[tuple[complex, np.ndarray], ...]
    sigma_per: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.circulations) + len(self.alternations) + len(self.interior_modes)

    def vectors(self) -> np.ndarray:
        """All basis vectors as matrix columns (size |A| x dim)."""
        cols = list(self.circulations) + list(self.alternations) + [v for _, v in self.interior_modes]
        if not cols:
            return np.zeros((0, 0), dtype=complex)
        return np.column_stack(cols)

    def eigenvalues(self) -> np.ndarray:
        values = [1.0 + 0j] * len(self.circulations) + [-1.0 + 0j] * len(self.alternations)
        values += [lam for lam, _ in self.interior_modes]
        return np.array(values, dtype=complex)

    @staticmethod
    def cosine_of(eigenvalue: complex) -> complex:
        """Map a unit eigenvalue back to its Dirichlet cosine (lam + 1/lam)/2."""
        return (eigenvalue + 1.0 / eigenvalue) / 2.0


def center_basis(ops: WalkOperators, cycles: tuple[OrientedCycle, ...]) -> CenterBasis:
    """Assemble circulations, alternations, and interior modes for one graph."""
    circulations = circulation_basis(cycles, ops.arcs)
    alternations = alternating_basis(cycles, ops.arcs, ops.tg.internal, ops.internal_step)
    modes = interior_mode_basis(ops)
    sigma = sorted({round(float(CenterBasis.cosine_of(lam).real), 12) for lam, _ in modes})
    return CenterBasis(
        circulations=tuple(circulations),
        alternations=tuple(alternations),
        interior_modes=tuple(modes),
        sigma_per=tuple(sigma),
    )


@dataclass(frozen=True)
class CenterSpanReport:
    """Outcome of comparing solver center space against the constructed basis."""

    center_dim: int
    basis_dim: int
    max_principal_angle: float
    eigenvalue_match: bool

    @property
    def ok(self) -> bool:
        return (
            self.center_dim == self.basis_dim
            and self.max_principal_angle < 1e-8
            and self.eigenvalue_match
        )


def center_span_report(decomp: SpectralDecomposition, basis: CenterBasis) -> CenterSpanReport:
    """Compare the solver's center eigenspace against the constructed basis
    without raising; see `check_center_span` for the asserting variant."""
    center_dim = decomp.center_dim
    basis_dim = basis.dim
    if center_dim == 0 and basis_dim == 0:
        return CenterSpanReport(0, 0, 0.0, True)
    if center_dim == 0 or basis_dim == 0:
        return CenterSpanReport(center_dim, basis_dim, float(np.pi / 2), False)
    angles = scipy.linalg.subspace_angles(decomp.center_vectors, basis.vectors())
    max_angle = float(np.max(angles)) if angles.size else 0.0
    if center_dim != basis_dim:
        max_angle = max(max_angle, float(np.pi / 2))
    matched = _multisets_match(decomp.center_values, basis.eigenvalues())
    return CenterSpanReport(center_dim, basis_dim, max_angle, matched)


def check_center_span(decomp: SpectralDecomposition, basis: CenterBasis,
                      angle_tol: float = 1e-8) -> CenterSpanReport:
    """Verify dimension, mutual span, and eigenvalue multiset agreement.

    Raises SpanMismatch when the solver's center eigenspace and the
    constructed basis disagree.
    """
    report = center_span_report(decomp, basis)
    if report.center_dim != report.basis_dim:
        raise SpanMismatch(
            f"center dimension {report.center_dim} != constructed dimension {report.basis_dim}"
        )
    if report.max_principal_angle >= angle_tol:
        raise SpanMismatch(f"max principal angle {report.max_principal_angle!r} >= {angle_tol:g}")
    if not report.eigenvalue_match:
        raise SpanMismatch("center eigenvalue multisets differ")
    return report


def _multisets_match(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> bool:
    if len(a) != len(b):
        return False
    order = lambda arr: sorted(arr, key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    return all(abs(x - y) < tol for x, y in zip(order(a), order(b)))


def stable_pencil_residual(ops: WalkOperators, decomp: SpectralDecomposition) -> float:
    """Check stable eigenpairs against the quadratic vertex-space pencil.

    Every clean stable eigenpair (lambda, psi) with lambda away from +-1
    decomposes as psi = incidence* f + shift incidence* g, and g must lie in
    the kernel of lambda^2 - 2 lambda T + (2D - I).  Returns the worst
    relative residual over the qualifying pairs.
    """
    n = ops.tg.internal.vertex_count
    eye = np.eye(n)
    worst = 0.0
    for i, lam in enumerate(decomp.eigenvalues):
        if decomp.classes[i] != "stable" or decomp.residuals[i] > 1e-10:
            continue
        if min(abs(lam - 1.0), abs(lam + 1.0)) < 1e-6:
            continue
        psi = decomp.eigenvectors[:, i]
        fg, *_ = np.linalg.lstsq(ops.lift, psi, rcond=None)
        if float(np.max(np.abs(ops.lift @ fg - psi))) > 1e-8:
            continue  # eigenvector not in the lifted subspace; not this pencil's business
        g = fg[n:]
        scale = float(np.max(np.abs(g)))
        if scale < 1e-12:
            continue
        pencil = lam**2 * eye - 2.0 * lam * ops.dirichlet + (2.0 * ops.degree_ratio - eye)
        worst = max(worst, float(np.max(np.abs(pencil @ g))) / scale)
    return worst


def spectrum_csv(decomp: SpectralDecomposition) -> str:
    """CSV table of the spectrum: re, im, modulus, class."""
    return decomp.to_csv()
