import numpy as np
import pytest

import grovertails as gt
from grovertails.dynamics import (
    DriveConfig,
    default_step_budget,
    evolve,
    evolve_truncated,
    inflow_source,
    initial_plane_state,
    step,
)
from grovertails.errors import NotConverged, TruncationTooShort
from grovertails.graphs import truncate_tails
from grovertails.spectral import center_basis

from conftest import C3_STATIONARY_MULTISET, make_walk

UNIT = DriveConfig(inflow=(1.0 + 0j, 0j))

# hand-stepped values for the triangle drive, two applications of the update
C3_PSI2 = np.array([2 / 3, -2 / 9, 2 / 3, 0.0, 4 / 9, 2 / 3])


def test_drive_config_validates_modulus():
    with pytest.raises(ValueError):
        DriveConfig(inflow=(1 + 0j,), z=0.5 + 0j)
    DriveConfig(inflow=(1 + 0j,), z=np.exp(0.3j))  # anywhere on the circle


def test_source_triangle(c3):
    source = inflow_source(c3.tg, c3.arcs, UNIT)
    leaving_zero = [a for a in range(6) if c3.arcs.origin[a] == 0]
    assert np.allclose(source[leaving_zero], 2 / 3)
    others = [a for a in range(6) if c3.arcs.origin[a] != 0]
    assert np.allclose(source[others], 0.0)


def test_source_single_edge(p2):
    source = inflow_source(p2.tg, p2.arcs, UNIT)
    assert np.allclose(source, [1.0, 0.0])


def test_source_zero_inflow(c3):
    source = inflow_source(c3.tg, c3.arcs, DriveConfig(inflow=(0j, 0j)))
    assert np.allclose(source, 0.0)


def test_source_sums_tails_on_shared_vertex():
    walk = make_walk(gt.parse_edge_list("0 1"), [0, 0])
    source = inflow_source(walk.tg, walk.arcs, DriveConfig(inflow=(1 + 0j, 1 + 0j)))
    # tilde degree 3 at vertex 0, combined inflow 2
    assert abs(source[walk.arcs.index(0, 1)] - 4 / 3) < 1e-15
    assert source[walk.arcs.index(1, 0)] == 0


def test_first_step_is_source(c3):
    source = inflow_source(c3.tg, c3.arcs, UNIT)
    psi1 = step(np.zeros(6, dtype=complex), 0, c3.ops, source)
    assert np.allclose(psi1, source)


def test_second_step_matches_hand_computation(c3):
    source = inflow_source(c3.tg, c3.arcs, UNIT)
    psi1 = step(np.zeros(6, dtype=complex), 0, c3.ops, source)
    psi2 = step(psi1, 1, c3.ops, source)
    assert np.max(np.abs(psi2 - C3_PSI2)) < 1e-15


def test_single_edge_reaches_fixed_point_in_one_step(p2):
    source = inflow_source(p2.tg, p2.arcs, UNIT)
    psi1 = step(np.zeros(2, dtype=complex), 0, p2.ops, source)
    psi2 = step(psi1, 1, p2.ops, source)
    assert np.allclose(psi1, source)
    assert np.allclose(psi2, psi1)


def test_evolve_triangle_limit(c3):
    trajectory = evolve(c3.ops, UNIT, tol=1e-12)
    assert trajectory.converged
    assert np.allclose(
        sorted(trajectory.final_state.real), C3_STATIONARY_MULTISET, atol=1e-10
    )
    assert np.max(np.abs(trajectory.final_state.imag)) < 1e-12


def test_evolve_single_edge(p2):
    trajectory = evolve(p2.ops, UNIT)
    assert trajectory.converged and trajectory.steps_taken <= 2
    assert np.allclose(trajectory.final_state, [1.0, 0.0])


def test_evolve_zero_drive(c3):
    trajectory = evolve(c3.ops, DriveConfig(inflow=(0j, 0j)))
    assert trajectory.converged and trajectory.steps_taken == 1
    assert np.allclose(trajectory.final_state, 0.0)


def test_evolve_not_converged_raises(c3):
    with pytest.raises(NotConverged) as err:
        evolve(c3.ops, UNIT, max_steps=3)
    assert err.value.residual > 0


def test_evolve_off_unit_drive_satisfies_twisted_fixed_point(c3):
    z = np.exp(1j * 0.7)
    drive = DriveConfig(inflow=(1.0 + 0j, 0j), z=z)
    trajectory = evolve(c3.ops, drive, tol=1e-12)
    assert trajectory.converged
    phi = trajectory.stationary_estimate
    source = inflow_source(c3.tg, c3.arcs, drive)
    residual = np.max(np.abs(phi / z - (c3.ops.internal_step @ phi + source)))
    assert residual < 1e-10


def test_residuals_decay_geometrically(c3):
    trajectory = evolve(c3.ops, UNIT, tol=1e-12)
    moduli = np.abs(np.linalg.eigvals(c3.ops.internal_step))
    rate = moduli[moduli < 1 - 1e-8].max() + 0.05
    res = trajectory.residuals
    usable = res > 1e-13  # above the noise floor
    ratios = res[1:][usable[1:]] / res[:-1][usable[1:]]
    assert np.max(ratios[5:]) <= rate


def test_states_stay_in_lifted_subspace_and_off_center(c3):
    basis = center_basis(c3.ops, c3.cycles)
    center = basis.vectors()
    center /= np.linalg.norm(center, axis=0)
    q, _ = np.linalg.qr(c3.ops.lift)
    trajectory = evolve(c3.ops, UNIT, tol=1e-12)
    for psi in trajectory.states:
        assert np.max(np.abs(center.conj().T @ psi)) < 1e-10
        off = psi - q @ (q.conj().T @ psi)
        assert np.max(np.abs(off)) < 1e-10


def test_default_budget_positive(c3, p2):
    assert default_step_budget(c3.ops) >= 100
    assert default_step_budget(p2.ops) >= 100


# ---------------------------------------------------------------------------
# truncated-tail reference evolution


def test_truncated_matches_internal_recursion(c3):
    reference = evolve_truncated(c3.tg, c3.arcs, UNIT, tail_length=64, steps=40)
    source = inflow_source(c3.tg, c3.arcs, UNIT)
    psi = np.zeros(6, dtype=complex)
    for n in range(40):
        psi = step(psi, n, c3.ops, source)
        assert np.max(np.abs(reference.internal_state(n + 1) - psi)) < 1e-12


def test_truncated_norm_is_conserved(c3):
    reference = evolve_truncated(c3.tg, c3.arcs, UNIT, tail_length=32, steps=20)
    assert np.max(np.abs(np.diff(reference.norms))) < 1e-10


def test_truncated_initial_state_is_plane_wave(c3):
    z = np.exp(0.31j)
    drive = DriveConfig(inflow=(1.0 + 0j, 0j), z=z)
    reference = evolve_truncated(c3.tg, c3.arcs, drive, tail_length=8, steps=0)
    state = reference.states[0]
    trunc = reference.trunc
    for m in range(8):
        assert abs(state[trunc.inbound[0][m]] - z ** (-m)) < 1e-15
        assert state[trunc.inbound[1][m]] == 0
    assert np.allclose(state[trunc.internal_arcs], 0.0)
    assert np.allclose(state[np.concatenate(trunc.outbound)], 0.0)


def test_truncation_too_short(c3):
    with pytest.raises(TruncationTooShort):
        evolve_truncated(c3.tg, c3.arcs, UNIT, tail_length=10, steps=10)


def test_outflow_readouts_follow_local_rule(c3):
    # outflow onto tail j at step n+1 equals
    # (2/td) * (internal inflow sum at u_j + alpha_j) - alpha_j
    reference = evolve_truncated(c3.tg, c3.arcs, UNIT, tail_length=48, steps=30)
    source = inflow_source(c3.tg, c3.arcs, UNIT)
    psi = np.zeros(6, dtype=complex)
    into = [list(c3.arcs.arcs_into[u]) for u in c3.tg.tail_attachments]
    alpha = [1.0, 0.0]
    for n in range(29):
        if n > 0:
            psi = step(psi, n - 1, c3.ops, source)
        for j, u in enumerate(c3.tg.tail_attachments):
            td = c3.tg.tilde_degree[u]
            predicted = 2 / td * (sum(psi[a] for a in into[j]) + alpha[j]) - alpha[j]
            assert abs(reference.outflow(j, n + 1) - predicted) < 1e-12


def test_outflow_converges_to_transmission(c3):
    reference = evolve_truncated(c3.tg, c3.arcs, UNIT, tail_length=130, steps=128)
    assert abs(reference.outflow(1, 128) - 1.0) < 1e-6
    assert abs(reference.outflow(0, 128)) < 1e-6


def test_trajectory_csv(c3):
    trajectory = evolve(c3.ops, UNIT, tol=1e-6)
    text = trajectory.to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "step,arc,re,im,residual"
    assert len(lines) == 1 + 6 * len(trajectory.states)


def test_trajectory_csv_requires_states(c3):
    trajectory = evolve(c3.ops, UNIT, tol=1e-6, keep_states=False)
    with pytest.raises(ValueError):
        trajectory.to_csv()


def test_initial_plane_state_respects_distance_powers(c3):
    trunc = truncate_tails(c3.tg, 4)
    z = np.exp(-0.2j)
    state = initial_plane_state(trunc, DriveConfig(inflow=(2.0 + 0j, 0j), z=z))
    for m in range(4):
        assert abs(state[trunc.inbound[0][m]] - 2.0 * z ** (-m)) < 1e-15
