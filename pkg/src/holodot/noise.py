"""Open-system gate simulation under site-resolved noise.

The master equation is

    d rho/dt = -i [H, rho] + sum_k g_k (L_k rho L_k^+ - 1/2 {L_k^+ L_k, rho})

acting on row-major vectorised density matrices, ``vec(A X B) =
(A kron B^T) vec(X)``. Two channels are available:

``site-dephasing``
    ``L_k = |k><k|`` with rate ``gamma`` on every masked dot; models
    fluctuations of the on-site energies.
``site-depolarizing-diagonal``
    incoherent hops ``|j><k|`` out of every masked dot ``k`` to each other
    dot ``j`` of the same device, total rate ``gamma``.

Single-qubit gates act on the 3-dot Lambda space. Two-qubit gates act on the
4-dimensional effective space, whose "dots" are the two qubit dots (first and
third) of each device; a 6-entry mask is reduced to those four.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import ConfigurationError, IntegrationError
from .holonomy import compose_loops, lambda_hamiltonian
from .model import QUBIT_SITES, LambdaParams, PulseEnvelope, TwoQubitParams
from .propagate import Hamiltonian, IntegratorConfig, converge, ordered_product, sample
from .twoqubit import PulseSchedule, analytic_gate, protocol_segments, solve_schedule

CHANNELS = ("site-dephasing", "site-depolarizing-diagonal")

TRACE_TOLERANCE = 1e-6
POSITIVITY_TOLERANCE = -1e-8

_GAUSS_OFFSET = math.sqrt(3.0) / 6.0


@dataclass(frozen=True)
class NoiseSpec:
    gamma: float
    site_mask: tuple[int, ...] = (1, 1, 1)
    channel: str = "site-dephasing"

    def __post_init__(self):
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise ConfigurationError(f"gamma must be finite and >= 0, got {self.gamma}")
        mask = tuple(int(b) for b in self.site_mask)
        if any(b not in (0, 1) for b in mask):
            raise ConfigurationError(f"site_mask entries must be 0/1, got {self.site_mask}")
        object.__setattr__(self, "site_mask", mask)
        if self.gamma > 0 and not any(mask):
            raise ConfigurationError("site_mask selects no dot although gamma > 0")
        if self.channel not in CHANNELS:
            raise ConfigurationError(f"unknown channel {self.channel!r}; choose from {CHANNELS}")

    @classmethod
    def from_mask(cls, gamma: float, mask: str, channel: str = "site-dephasing") -> "NoiseSpec":
        """Build from a string such as ``"101"``."""
        return cls(gamma, tuple(int(c) for c in mask), channel)

    @property
    def mask_label(self) -> str:
        return "".join(str(b) for b in self.site_mask)


@dataclass(frozen=True)
class FidelityCurve:
    points: list[tuple[float, float]]
    gate_label: str
    metadata: dict = field(default_factory=dict)

    def is_monotone(self, slack: float = 1e-12) -> bool:
        """Fidelity never rises as gamma grows (i.e. as the ratio falls)."""
        pts = sorted(self.points)
        return all(b[1] >= a[1] - slack for a, b in zip(pts, pts[1:]))


def _devices(dim: int, mask: Sequence[int]):
    """Per device: a factory for ``|i><j|`` between its dots, and its mask bits."""
    if dim == 3:
        if len(mask) != 3:
            raise ConfigurationError(f"a single device needs a 3-entry mask, got {len(mask)}")
        e = np.eye(3)
        return [(lambda i, j: np.outer(e[i], e[j]), list(mask))]
    if dim == 4:
        if len(mask) == 6:
            mask = [mask[0], mask[2], mask[3], mask[5]]
        if len(mask) != 4:
            raise ConfigurationError("two-qubit masks need 4 or 6 entries")
        e, eye = np.eye(2), np.eye(2)
        control = lambda i, j: np.kron(np.outer(e[i], e[j]), eye)
        target = lambda i, j: np.kron(eye, np.outer(e[i], e[j]))
        return [(control, list(mask[:2])), (target, list(mask[2:]))]
    raise ConfigurationError(f"no dot layout for dimension {dim}")


def jump_operators(spec: NoiseSpec, dim: int) -> list[tuple[float, np.ndarray]]:
    """``(rate, L)`` pairs of ``spec`` on a ``dim``-dimensional space."""
    ops = []
    if spec.gamma == 0:
        return ops
    for op, mask in _devices(dim, spec.site_mask):
        n_dots = len(mask)
        for k in (k for k in range(n_dots) if mask[k]):
            if spec.channel == "site-dephasing":
                ops.append((spec.gamma, op(k, k).astype(complex)))
            else:
                ops.extend((spec.gamma / (n_dots - 1), op(j, k).astype(complex))
                           for j in range(n_dots) if j != k)
    return ops


def dissipator(spec: NoiseSpec, dim: int) -> np.ndarray:
    eye = np.eye(dim)
    out = np.zeros((dim * dim, dim * dim), dtype=complex)
    for rate, l in jump_operators(spec, dim):
        ldl = l.conj().T @ l
        out += rate * (np.kron(l, l.conj()) - 0.5 * np.kron(ldl, eye) - 0.5 * np.kron(eye, ldl.T))
    return out


def liouvillian(h: np.ndarray, diss: np.ndarray) -> np.ndarray:
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T)) + diss


def _superop_steps(h: Hamiltonian, diss: np.ndarray, t0: float, t1: float, n: int) -> np.ndarray:
    dt = (t1 - t0) / n
    mids = t0 + dt * (np.arange(n) + 0.5)
    h1 = sample(h, mids - _GAUSS_OFFSET * dt)
    h2 = sample(h, mids + _GAUSS_OFFSET * dt)
    steps = np.empty((n, diss.shape[0], diss.shape[0]), dtype=complex)
    cache = {}
    for j in range(n):
        key = (h1[j].tobytes(), h2[j].tobytes())
        if key not in cache:
            a1, a2 = liouvillian(h1[j], diss), liouvillian(h2[j], diss)
            omega = 0.5 * dt * (a1 + a2) + (math.sqrt(3.0) / 12.0) * dt * dt * (a2 @ a1 - a1 @ a2)
            cache[key] = expm(omega)
        steps[j] = cache[key]
    return steps


def propagate_superoperator(h: Hamiltonian, spec: NoiseSpec, t0: float, t1: float,
                            cfg: IntegratorConfig | None = None):
    """Converged channel ``S`` with ``vec(rho(t1)) = S vec(rho(t0))``, plus its steps."""
    cfg = cfg or IntegratorConfig(tolerance=1e-10)
    dim = np.asarray(h(t0)).shape[0]
    diss = dissipator(spec, dim)
    if t1 == t0:
        return np.eye(dim * dim, dtype=complex), np.eye(dim * dim, dtype=complex)[None]
    last = {}

    def run(n):
        last["steps"] = _superop_steps(h, diss, t0, t1, n)
        return ordered_product(last["steps"])

    s, _, _ = converge(run, cfg)
    return s, last["steps"]


def _monitor(rho: np.ndarray, where: str) -> None:
    drift = abs(np.trace(rho).real - 1.0)
    if drift > TRACE_TOLERANCE:
        raise IntegrationError(f"trace drift {drift:.3e} {where}", drift)
    low = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    if low < POSITIVITY_TOLERANCE:
        raise IntegrationError(f"negative eigenvalue {low:.3e} {where}", low)


def evolve_density(h: Hamiltonian, spec: NoiseSpec, rho0: np.ndarray, tau: float,
                   cfg: IntegratorConfig | None = None, t0: float = 0.0) -> np.ndarray:
    """Integrate the master equation from ``t0`` to ``t0 + tau``."""
    rho = np.asarray(rho0, dtype=complex)
    d = rho.shape[0]
    if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
        raise ValueError("rho0 is not Hermitian")
    _monitor(rho, "in the initial state")
    _, steps = propagate_superoperator(h, spec, t0, t0 + tau, cfg)
    vec = rho.reshape(-1)
    for j, s in enumerate(steps):
        vec = s @ vec
        _monitor(vec.reshape(d, d), f"after step {j + 1}/{len(steps)}")
    return vec.reshape(d, d)


# --- gate protocols and fidelity ---------------------------------------------

@dataclass(frozen=True)
class GateProtocol:
    """Piecewise Hamiltonian ``segments`` realising ``ideal`` on the qubits.

    ``comp_index`` lists the basis states of the full space that carry the
    computational basis (in order); ``ideal`` acts on that subspace.
    """

    label: str
    dim: int
    segments: tuple
    ideal: np.ndarray
    comp_index: tuple[int, ...]

    @property
    def duration(self) -> float:
        return float(self.segments[-1][2] - self.segments[0][1])

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(len(self.comp_index))))


def single_qubit_protocol(loops: Sequence[LambdaParams], env: PulseEnvelope | None = None,
                          label: str = "single-qubit") -> GateProtocol:
    """Loops applied back to back, each driven by ``env`` (square, area pi by default)."""
    env = env or PulseEnvelope("square", 1.0, math.pi)
    segments = []
    t = 0.0
    for p in loops:
        local = lambda_hamiltonian(p, env)
        segments.append((lambda s, t0=t, f=local: f(s - t0), t, t + env.duration))
        t += env.duration
    return GateProtocol(label, 3, tuple(segments), compose_loops(list(loops)), QUBIT_SITES)


def hadamard_protocol(env: PulseEnvelope | None = None) -> GateProtocol:
    return single_qubit_protocol([LambdaParams(math.pi / 4, 0.0)], env, "hadamard")


def pi8_protocol(env: PulseEnvelope | None = None) -> GateProtocol:
    """Two in-plane loops whose azimuths differ by pi/8: ``R_z(pi/4)`` up to phase."""
    loops = [LambdaParams(math.pi / 2, 0.0), LambdaParams(math.pi / 2, math.pi / 8)]
    return single_qubit_protocol(loops, env, "pi/8")


def entangler_protocol(s: PulseSchedule, label: str = "entangler") -> GateProtocol:
    return GateProtocol(label, 4, tuple(protocol_segments(s)), analytic_gate(s), (0, 1, 2, 3))


def entangler_schedule(pulse_ratio: float, varphi: float = math.pi / 4):
    """Schedule with rotation ``varphi`` whose second/first pulse length is ``pulse_ratio``.

    Uses ``alpha = delta = 1`` and ``n1 = n2 = 0``, for which the two pulse
    lengths are ``pi / (2 w)`` and ``pi / (2 w~)`` and the ratio is ``w / w~``.
    """
    if pulse_ratio <= 0:
        raise ConfigurationError("pulse ratio must be positive")
    if not 0 < varphi < math.pi / 2:
        raise ConfigurationError("varphi must lie in (0, pi/2)")
    t = math.tan(varphi)
    amp2 = (1.0 - math.sqrt(1.0 + t * t) / pulse_ratio) / t
    amp1 = (amp2 + t) / (1.0 - t * amp2)
    return solve_schedule(TwoQubitParams(alpha=1.0, delta=1.0, amp1=amp1, amp2=amp2))


def axial_states(n_qubits: int) -> list[np.ndarray]:
    """Six Pauli eigenstates per qubit; tensor products for several qubits."""
    s = 1 / math.sqrt(2)
    single = [np.array(v, dtype=complex) for v in (
        [1, 0], [0, 1], [s, s], [s, -s], [s, 1j * s], [s, -1j * s])]
    out = []
    for combo in itertools.product(single, repeat=n_qubits):
        v = combo[0]
        for w in combo[1:]:
            v = np.kron(v, w)
        out.append(v)
    return out


def protocol_channel(protocol: GateProtocol, spec: NoiseSpec,
                     cfg: IntegratorConfig | None = None) -> np.ndarray:
    d = protocol.dim
    total = np.eye(d * d, dtype=complex)
    for h, a, b in protocol.segments:
        s, _ = propagate_superoperator(h, spec, a, b, cfg)
        total = s @ total
    return total


def gate_fidelity(protocol: GateProtocol, spec: NoiseSpec,
                  cfg: IntegratorConfig | None = None) -> float:
    """Mean of ``<psi_ideal| rho_out |psi_ideal>`` over the axial input ensemble."""
    channel = protocol_channel(protocol, spec, cfg)
    d = protocol.dim
    idx = list(protocol.comp_index)
    total = 0.0
    states = axial_states(protocol.n_qubits)
    for psi in states:
        full = np.zeros(d, dtype=complex)
        full[idx] = psi
        ideal = np.zeros(d, dtype=complex)
        ideal[idx] = protocol.ideal @ psi
        rho = (channel @ np.outer(full, full.conj()).reshape(-1)).reshape(d, d)
        total += float(np.real(ideal.conj() @ rho @ ideal))
    return total / len(states)


def fidelity_curve(protocol: GateProtocol, template: NoiseSpec, ratios: Sequence[float],
                   cfg: IntegratorConfig | None = None) -> FidelityCurve:
    """Fidelity against ``1/(gamma tau_gate)``; ``template.gamma`` is ignored."""
    tau = protocol.duration
    points = []
    for r in sorted(float(x) for x in ratios):
        if r <= 0:
            raise ConfigurationError("ratios must be positive")
        spec = NoiseSpec(1.0 / (r * tau), template.site_mask, template.channel)
        points.append((r, gate_fidelity(protocol, spec, cfg)))
    meta = {"gate": protocol.label, "mask": template.mask_label, "channel": template.channel,
            "ensemble": f"axial-{6 ** protocol.n_qubits}", "gate_time": tau}
    return FidelityCurve(points, protocol.label, meta)


def fidelity_surface(tau_ratios: Sequence[float], inv_gamma_tau: Sequence[float],
                     template: NoiseSpec, varphi: float = math.pi / 4,
                     cfg: IntegratorConfig | None = None) -> np.ndarray:
    """Rows ``(second/first pulse length, 1/(gamma tau''), F)`` for the entangler."""
    rows = []
    for r in tau_ratios:
        protocol = entangler_protocol(entangler_schedule(r, varphi))
        tau = protocol.duration
        for inv in inv_gamma_tau:
            spec = NoiseSpec(1.0 / (inv * tau), template.site_mask, template.channel)
            rows.append((float(r), float(inv), gate_fidelity(protocol, spec, cfg)))
    return np.array(rows)
