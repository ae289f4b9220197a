import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from holodot.errors import ConfigurationError, CyclicityError, DecompositionError
from holodot.holonomy import (
    compose_loops,
    default_envelope,
    evolve_subspace,
    extract_holonomy,
    gauge_transform_check,
    lambda_hamiltonian,
    phase_distance,
    polar_unitary,
    qubit_block,
    qubit_frame,
    single_qubit_gate,
    synthesize_single_qubit,
)
from holodot.model import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    LambdaParams,
    PulseEnvelope,
    TwoQubitParams,
    lambda_coupling_matrix,
)
from holodot.propagate import IntegratorConfig
from holodot.twoqubit import protocol_segments, rotation, solve_schedule

HADAMARD = (SIGMA_X + SIGMA_Z) / math.sqrt(2)
CFG = IntegratorConfig(tolerance=1e-11)


def lambda_oracle(p: LambdaParams) -> np.ndarray:
    """Qubit block of exp(-i pi H_Lambda) by dense exponentiation."""
    return qubit_block(expm(-1j * math.pi * lambda_coupling_matrix(p)))


def test_hadamard_loop_frozen():
    _, rep = single_qubit_gate(LambdaParams(math.pi / 4, 0.0), cfg=CFG)
    np.testing.assert_allclose(rep.holonomy, HADAMARD, atol=1e-9)
    np.testing.assert_allclose(lambda_oracle(LambdaParams(math.pi / 4, 0.0)), HADAMARD,
                               atol=1e-14)


@given(st.floats(0, math.pi), st.floats(0, 2 * math.pi))
@settings(max_examples=12, deadline=None)
def test_holonomy_matches_dense_exponential(theta, phi):
    p = LambdaParams(theta, phi)
    ev, rep = single_qubit_gate(p, cfg=CFG, n_grid=8)
    np.testing.assert_allclose(rep.holonomy, lambda_oracle(p), atol=1e-8)
    assert rep.target_distance < 1e-7
    assert rep.cyclicity_defect < 1e-8
    assert np.max(np.abs(ev.D_accum)) < 1e-12
    assert rep.dyn_phase_norm == 0.0
    u = rep.holonomy
    assert np.max(np.abs(u - u.conj().T)) < 1e-8
    assert np.max(np.abs(u @ u - np.eye(2))) < 1e-8


def test_trivial_hamiltonian():
    ev = evolve_subspace(lambda t: np.zeros((3, 3)), qubit_frame(), 1.0, n_grid=4)
    for j in range(len(ev.times)):
        np.testing.assert_array_equal(ev.frame(j), qubit_frame())
    assert np.max(np.abs(ev.A_accum)) == 0 and np.max(np.abs(ev.D_accum)) == 0
    np.testing.assert_allclose(extract_holonomy(ev).holonomy, np.eye(2))


def test_frames_stay_orthonormal_and_rank_two():
    ev, _ = single_qubit_gate(LambdaParams(1.1, 2.0), PulseEnvelope.with_area(
        "sine-squared", math.pi, 2.0), CFG, n_grid=16)
    for j in range(len(ev.times)):
        f = ev.frame(j)
        assert np.max(np.abs(f.conj().T @ f - np.eye(2))) < 1e-10
        assert np.trace(ev.projector(j)).real == pytest.approx(2.0, abs=1e-10)


@pytest.mark.parametrize("shape,n_grid", [("square", 64), ("sine-squared", 128),
                                          ("gaussian-truncated", 128)])
def test_geometric_route_matches_holonomy(shape, n_grid):
    p = LambdaParams(0.9, 0.4)
    env = PulseEnvelope.with_area(shape, math.pi, math.pi)
    ev, rep = single_qubit_gate(p, env, CFG, n_grid=n_grid)
    assert np.max(np.abs(ev.geometric_unitary() - rep.holonomy)) < 1e-6


def test_richardson_improves_geometric_route():
    ev, rep = single_qubit_gate(LambdaParams(0.9, 0.4), cfg=CFG, n_grid=32)
    plain = np.max(np.abs(ev.geometric_unitary(extrapolate=False) - rep.holonomy))
    better = np.max(np.abs(ev.geometric_unitary() - rep.holonomy))
    assert better < plain / 10


def test_envelope_independence():
    p = LambdaParams(2.2, 5.1)
    gates = [single_qubit_gate(p, PulseEnvelope.with_area(s, math.pi, 1.7), CFG, n_grid=8)[1]
             .holonomy for s in ("square", "sine-squared", "gaussian-truncated")]
    for g in gates[1:]:
        assert np.max(np.abs(g - gates[0])) < 1e-7


def test_wrong_area_is_not_cyclic():
    env = PulseEnvelope.with_area("square", 0.8 * math.pi, math.pi)
    with pytest.raises(CyclicityError) as info:
        single_qubit_gate(LambdaParams(1.0, 0.0), env, CFG, n_grid=4)
    assert info.value.defect > 0.1


def test_cyclicity_defect_linear_in_area_detuning():
    def defect(eps):
        env = PulseEnvelope.with_area("square", math.pi * (1 + eps), math.pi)
        ev = evolve_subspace(lambda_hamiltonian(LambdaParams(1.0, 0.3), env), qubit_frame(),
                             math.pi, CFG, n_grid=4)
        return ev.cyclicity_defect

    # leakage of the bright state is sin(pi eps) ~ pi eps
    assert defect(0.05) / defect(0.025) == pytest.approx(2.0, rel=0.05)
    assert defect(-0.05) / defect(-0.025) == pytest.approx(2.0, rel=0.05)


def test_non_orthonormal_frame_rejected():
    with pytest.raises(ConfigurationError):
        evolve_subspace(lambda t: np.zeros((3, 3)), np.ones((3, 2)), 1.0)


def test_two_qubit_plus_block_is_rotation():
    # equal pulse lengths (amp2 = -amp1) put the switching time on a grid node
    q = TwoQubitParams(alpha=1.0, delta=1.0, amp1=2.0, amp2=-2.0)
    s = solve_schedule(q)
    (h1, _, t1), (h2, t2a, _) = protocol_segments(s)
    h = lambda t: h1(t) if t < t1 else h2(t)
    frame = np.eye(4, dtype=complex)[:, :2]
    ev = evolve_subspace(h, frame, s.tau2_end, CFG, n_grid=8)
    rep = extract_holonomy(ev, -rotation(s.varphi_rot))
    assert rep.target_distance < 1e-9
    np.testing.assert_allclose(rep.holonomy, -rotation(math.atan2(4.0, -3.0)), atol=1e-9)
    assert rep.dyn_phase_norm == 0.0


def test_synthesis_examples():
    assert synthesize_single_qubit(SIGMA_Z) == LambdaParams(0.0, 0.0)
    # -sigma_z is sigma_z up to a global phase
    assert synthesize_single_qubit(-SIGMA_Z) == LambdaParams(0.0, 0.0)
    p = synthesize_single_qubit(SIGMA_X)
    assert (p.theta, p.phi_az) == pytest.approx((math.pi / 2, 0.0))
    p = synthesize_single_qubit(1j * HADAMARD)
    assert (p.theta, p.phi_az) == pytest.approx((math.pi / 4, 0.0))
    _, rep = single_qubit_gate(p, cfg=CFG)
    assert phase_distance(rep.holonomy, HADAMARD) < 1e-7
    p = synthesize_single_qubit(SIGMA_Y)
    assert (p.theta, p.phi_az) == pytest.approx((math.pi / 2, math.pi / 2))
    assert synthesize_single_qubit(theta=0.0, phi=2.0).phi_az == 0.0


@given(st.floats(0.01, math.pi - 0.01), st.floats(0, 2 * math.pi - 0.01), st.floats(-4, 4))
@settings(max_examples=60, deadline=None)
def test_synthesis_round_trip(theta, phi, chi):
    p = LambdaParams(theta, phi)
    target = np.exp(1j * chi) * (p.axis()[0] * SIGMA_X + p.axis()[1] * SIGMA_Y
                                 + p.axis()[2] * SIGMA_Z)
    q = synthesize_single_qubit(target)
    # the axis is fixed only up to sign, since -n.sigma = e^{i pi} n.sigma
    assert min(np.max(np.abs(q.axis() - p.axis())), np.max(np.abs(q.axis() + p.axis()))) < 1e-9
    assert phase_distance(compose_loops([q]), target) < 1e-9


def test_synthesis_rejects_non_pauli_vector():
    rz = np.diag(np.exp([-1j * math.pi / 8, 1j * math.pi / 8]))
    with pytest.raises(DecompositionError, match="compose_loops"):
        synthesize_single_qubit(rz)
    with pytest.raises(DecompositionError):
        synthesize_single_qubit(np.ones((2, 2)))


def test_compose_examples():
    p = LambdaParams(1.2, 0.7)
    np.testing.assert_allclose(compose_loops([p, p]), np.eye(2), atol=1e-15)
    # n = z applied first, then m = x: sigma_x sigma_z = -i sigma_y
    np.testing.assert_allclose(compose_loops([LambdaParams(0.0), LambdaParams(math.pi / 2)]),
                               -1j * SIGMA_Y, atol=1e-15)
    with pytest.raises(ConfigurationError):
        compose_loops([])


def test_pi8_gate_from_two_loops():
    loops = [LambdaParams(math.pi / 2, 0.0), LambdaParams(math.pi / 2, math.pi / 8)]
    rz = np.diag(np.exp([-1j * math.pi / 8, 1j * math.pi / 8]))
    assert phase_distance(compose_loops(loops), rz) < 1e-12
    u = np.eye(2)
    for p in loops:
        u = single_qubit_gate(p, cfg=CFG, n_grid=8)[1].holonomy @ u
    assert phase_distance(u, rz) < 1e-7


def test_gauge_covariance_examples():
    net = LambdaParams(math.pi / 4, 0.0).network()
    env = default_envelope()
    assert gauge_transform_check([0.0, 0.0, 0.0], net, env, CFG) < 1e-12
    assert gauge_transform_check([0.3, -0.1, 0.7], net, env, CFG) < 1e-7
    assert gauge_transform_check([0.4, 0.4, 0.4], net, env, CFG) < 1e-10


def test_phase_distance():
    rng = np.random.default_rng(1)
    u = polar_unitary(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    assert phase_distance(np.exp(2.5j) * u, u) < 1e-12
    assert phase_distance(u, -u) < 1e-12
    assert phase_distance(SIGMA_X, SIGMA_Z) == pytest.approx(1.0, abs=1e-9)
