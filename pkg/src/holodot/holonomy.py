"""Subspace evolution, holonomy extraction and single-qubit gate synthesis.

A marked ``m``-dimensional subspace (given by an orthonormal ``n x m`` frame)
is carried along by the Schroedinger propagator. Besides the evolved frame
the module records the connection matrix ``A`` and the dynamical-phase
matrix ``D`` along a reference frame family ``zeta(t)`` that spans the
evolved subspace and closes on the initial frame. Their time-ordered
exponential gives a second, purely path-based route to the holonomy.

The reference family is built from projectors alone: discrete parallel
transport (successive polar alignment) followed by a uniform gauge rotation
that closes the loop, ``zeta(t) = zeta_pt(t) exp(t L / tau)`` with
``exp(L) = G^dagger`` and ``G`` the parallel-transport mismatch at ``tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import logm
from scipy.optimize import minimize_scalar

from .errors import ConfigurationError, CyclicityError, DecompositionError
from .model import (
    AUX_SITE,
    QUBIT_SITES,
    DotNetwork,
    LambdaParams,
    PulseEnvelope,
    build_ring_hamiltonian,
    lambda_coupling_matrix,
    pauli_vector_matrix,
)
from .propagate import Hamiltonian, IntegratorConfig, evolve, expm_hermitian, sample

CYCLICITY_THRESHOLD = 1e-6


def polar_unitary(m: np.ndarray) -> np.ndarray:
    """Closest matrix with orthonormal columns (polar factor via SVD)."""
    u, _, vh = np.linalg.svd(m, full_matrices=False)
    return u @ vh


@dataclass(frozen=True)
class SubspaceEvolution:
    """Evolved frame of a marked subspace on a uniform time grid.

    The grid holds ``2 n + 1`` points: even indices are the integration nodes
    and odd indices the step midpoints where ``A`` and ``D`` are sampled.
    ``frames[j]`` is ``U(t_j, 0) frame0`` and ``reference[j]`` the closed
    reference family ``zeta(t_j)``.
    """

    times: np.ndarray
    frames: np.ndarray
    reference: np.ndarray
    hamiltonians: np.ndarray
    dyn_phase_norm: float

    @property
    def dim_total(self) -> int:
        return self.frames.shape[1]

    @property
    def dim_sub(self) -> int:
        return self.frames.shape[2]

    @property
    def n_steps(self) -> int:
        return (len(self.times) - 1) // 2

    @property
    def tau(self) -> float:
        return float(self.times[-1])

    def frame(self, j: int) -> np.ndarray:
        return self.frames[j]

    def projector(self, j: int) -> np.ndarray:
        f = self.frames[j]
        return f @ f.conj().T

    def connection(self, stride: int = 1):
        """Midpoint samples ``(A, D, h)`` using every ``stride``-th step."""
        z, hs = self.reference, self.hamiltonians
        n = self.n_steps // stride
        idx = 2 * stride * np.arange(n)
        h = 2 * stride * (self.times[1] - self.times[0])
        z0, zm, z1 = z[idx], z[idx + stride], z[idx + 2 * stride]
        zm_dag = np.swapaxes(zm.conj(), -1, -2)
        a = 1j * zm_dag @ (z1 - z0) / h
        d = zm_dag @ hs[idx + stride] @ zm
        herm = lambda x: 0.5 * (x + np.swapaxes(x.conj(), -1, -2))
        return herm(a), herm(d), h

    @property
    def A_accum(self) -> np.ndarray:
        a, _, h = self.connection()
        return a.sum(axis=0) * h

    @property
    def D_accum(self) -> np.ndarray:
        _, d, h = self.connection()
        return d.sum(axis=0) * h

    @property
    def cyclicity_defect(self) -> float:
        return float(np.max(np.abs(self.projector(-1) - self.projector(0))))

    def _texp(self, stride: int) -> np.ndarray:
        a, d, h = self.connection(stride)
        x = np.eye(self.dim_sub, dtype=complex)
        for s in expm_hermitian(d - a, h):
            x = s @ x
        return x

    def geometric_unitary(self, extrapolate: bool = True) -> np.ndarray:
        """``T exp(i int (A - D) dt)`` along the reference family.

        The midpoint product is second order; with ``extrapolate`` (and an
        even step count) the result at twice the step is folded in by
        Richardson extrapolation and re-unitarized.
        """
        fine = self._texp(1)
        if not extrapolate or self.n_steps % 2:
            return fine
        return polar_unitary((4.0 * fine - self._texp(2)) / 3.0)


@dataclass(frozen=True)
class GateReport:
    holonomy: np.ndarray
    cyclicity_defect: float
    dyn_phase_norm: float
    target_distance: float | None = None


def _reference_family(frames: np.ndarray) -> np.ndarray:
    frame0 = frames[0]
    zeta = np.empty_like(frames)
    zeta[0] = frame0
    for j in range(1, len(frames)):
        p = frames[j] @ frames[j].conj().T
        zeta[j] = polar_unitary(p @ zeta[j - 1])
    mismatch = polar_unitary(frame0.conj().T @ zeta[-1])
    gen = logm(mismatch.conj().T)
    gen = 0.5 * (gen - gen.conj().T)
    s = np.linspace(0.0, 1.0, len(frames))
    # exp(s * gen) for anti-Hermitian gen, through the Hermitian i * gen
    closing = expm_hermitian(np.broadcast_to(1j * gen, (len(s),) + gen.shape) * s[:, None, None])
    return zeta @ closing


def evolve_subspace(h: Hamiltonian, frame0: np.ndarray, tau: float,
                    cfg: IntegratorConfig | None = None, n_grid: int = 64) -> SubspaceEvolution:
    """Carry ``frame0`` through ``[0, tau]`` in ``n_grid`` steps and build ``zeta``."""
    frame0 = np.asarray(frame0, dtype=complex)
    m = frame0.shape[1]
    if np.max(np.abs(frame0.conj().T @ frame0 - np.eye(m))) > 1e-10:
        raise ConfigurationError("frame0 must have orthonormal columns")
    if n_grid < 1:
        raise ConfigurationError("n_grid must be >= 1")
    cfg = cfg or IntegratorConfig()
    times = np.linspace(0.0, tau, 2 * n_grid + 1)
    frames = np.empty((len(times),) + frame0.shape, dtype=complex)
    frames[0] = frame0
    for j in range(len(times) - 1):
        step = evolve(h, times[j], times[j + 1], cfg).unitary
        frames[j + 1] = step @ frames[j]
    hs = sample(h, times)
    p0 = frame0 @ frame0.conj().T
    dyn = float(np.max(np.abs(p0 @ hs @ p0)))
    return SubspaceEvolution(times, frames, _reference_family(frames), hs, dyn)


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """``min_chi max|u - e^{i chi} v|``."""
    chi0 = float(np.angle(np.trace(v.conj().T @ u)))

    def cost(chi):
        return float(np.max(np.abs(u - np.exp(1j * chi) * v)))

    res = minimize_scalar(cost, bounds=(chi0 - 0.5, chi0 + 0.5), method="bounded",
                          options={"xatol": 1e-13})
    return min(cost(chi0), float(res.fun))


def extract_holonomy(ev: SubspaceEvolution, target: np.ndarray | None = None,
                     threshold: float = CYCLICITY_THRESHOLD) -> GateReport:
    """Holonomy ``frame(0)^dagger frame(tau)`` of a cyclic subspace evolution."""
    defect = ev.cyclicity_defect
    if defect > threshold:
        raise CyclicityError(
            f"subspace evolution is not cyclic: defect {defect:.3e} > {threshold:.1e}",
            defect)
    hol = polar_unitary(ev.frame(0).conj().T @ ev.frame(-1))
    dist = None if target is None else phase_distance(hol, np.asarray(target))
    return GateReport(hol, defect, ev.dyn_phase_norm, dist)


# --- single-qubit gates -------------------------------------------------------

def qubit_frame() -> np.ndarray:
    frame = np.zeros((3, 2), dtype=complex)
    frame[QUBIT_SITES[0], 0] = 1.0
    frame[QUBIT_SITES[1], 1] = 1.0
    return frame


def default_envelope() -> PulseEnvelope:
    """Unit-amplitude square pulse of area pi."""
    return PulseEnvelope("square", 1.0, math.pi)


def lambda_hamiltonian(p: LambdaParams, env: PulseEnvelope) -> Hamiltonian:
    coupling = lambda_coupling_matrix(p)
    return lambda t: env.value(t) * coupling


def network_hamiltonian(net: DotNetwork, env: PulseEnvelope) -> Hamiltonian:
    """Ring Hamiltonian with every hopping scaled by the common envelope."""
    base = build_ring_hamiltonian(net)
    onsite = np.diag(np.diag(base))
    hop = base - onsite
    return lambda t: onsite + env.value(t) * hop


def single_qubit_gate(p: LambdaParams, env: PulseEnvelope | None = None,
                      cfg: IntegratorConfig | None = None, n_grid: int = 32,
                      threshold: float = CYCLICITY_THRESHOLD):
    """Propagate the Lambda loop and report its holonomy against ``n . sigma``."""
    env = env or default_envelope()
    ev = evolve_subspace(lambda_hamiltonian(p, env), qubit_frame(), env.duration, cfg, n_grid)
    return ev, extract_holonomy(ev, pauli_vector_matrix(p.axis()), threshold)


def qubit_block(u: np.ndarray) -> np.ndarray:
    return u[np.ix_(QUBIT_SITES, QUBIT_SITES)]


def network_holonomy(net: DotNetwork, env: PulseEnvelope,
                     cfg: IntegratorConfig | None = None) -> np.ndarray:
    """Qubit-block holonomy of a ring driven by a common envelope."""
    u = evolve(network_hamiltonian(net, env), 0.0, env.duration, cfg).unitary
    leak = float(np.max(np.abs(u[AUX_SITE, list(QUBIT_SITES)])))
    if leak > CYCLICITY_THRESHOLD:
        raise CyclicityError(f"qubit subspace leaks into the auxiliary dot ({leak:.3e})", leak)
    return polar_unitary(qubit_block(u))


def synthesize_single_qubit(target=None, *, theta=None, phi=None, atol: float = 1e-8) -> LambdaParams:
    """Loop angles whose holonomy equals ``target`` up to a global phase.

    Either pass a 2x2 unitary of the form ``e^{i chi} n . sigma`` or explicit
    ``theta``/``phi``. At the poles the azimuth is set to 0.
    """
    if target is None:
        if theta is None:
            raise ConfigurationError("give a target matrix or theta (and phi)")
        return _canonical_params(float(theta), float(phi or 0.0))
    u = np.asarray(target, dtype=complex)
    if u.shape != (2, 2):
        raise DecompositionError(f"target must be 2x2, got {u.shape}")
    if np.max(np.abs(u.conj().T @ u - np.eye(2))) > atol:
        raise DecompositionError("target is not unitary")
    coeffs = np.array([np.trace(s @ u) / 2 for s in (
        np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.array([[1, 0], [0, -1]]))])
    phase = coeffs[np.argmax(np.abs(coeffs))]
    phase /= abs(phase)
    n = coeffs / phase
    if abs(np.trace(u)) > atol or np.max(np.abs(n.imag)) > atol:
        raise DecompositionError(
            "target is not of the form n.sigma up to a global phase; "
            "build it from several loops with compose_loops")
    n = n.real / np.linalg.norm(n.real)
    theta = math.acos(max(-1.0, min(1.0, n[2])))
    phi = math.atan2(n[1], n[0])
    return _canonical_params(theta, phi)


def _canonical_params(theta: float, phi: float) -> LambdaParams:
    if theta < 1e-12 or math.pi - theta < 1e-12:
        phi = 0.0
    return LambdaParams(theta, phi % (2 * math.pi))


def compose_loops(params: Sequence[LambdaParams]) -> np.ndarray:
    """Gate of several loops run one after another (``params[0]`` first)."""
    if not params:
        raise ConfigurationError("compose_loops needs at least one loop")
    u = np.eye(2, dtype=complex)
    for p in params:
        u = pauli_vector_matrix(p.axis()) @ u
    return u


def gauge_transform_check(site_phases, net: DotNetwork, env: PulseEnvelope,
                          cfg: IntegratorConfig | None = None) -> float:
    """``max|U' - G^dagger U G|`` after the gauge change ``Pi`` (one value per dot).

    ``U`` and ``U'`` are propagated independently from ``net`` and from the
    re-gauged network; ``G = diag(e^{-i Pi(0)}, e^{-i Pi(2)})``.
    """
    pi = np.asarray(site_phases, dtype=float)
    gauged = net.with_gauge(pi)
    if abs(math.remainder(gauged.flux() - net.flux(), 2 * math.pi)) > 1e-12:
        raise ConfigurationError("gauge change altered the total flux")
    u = network_holonomy(net, env, cfg)
    u_prime = network_holonomy(gauged, env, cfg)
    gamma = np.diag(np.exp(-1j * pi[list(QUBIT_SITES)]))
    return float(np.max(np.abs(u_prime - gamma.conj().T @ u @ gamma)))
