"""Time-evolution operators for time-dependent Hamiltonians.

Three independent routes are provided:

``evolve``
    Step-doubling integrator. Each pass splits ``[t0, t1]`` into a uniform
    grid, builds one propagator per step and multiplies them; the step count
    doubles until two successive passes agree in max norm. The default scheme
    is fourth-order Magnus with two Gauss-Legendre nodes.
``evolve_bruteforce``
    Plain product of midpoint exponentials, kept deliberately simple so it
    can serve as an oracle for ``evolve``.
``square_pulse_propagator``
    Closed form for the two-qubit square pulse, exact because ``H^2 = w^2 I``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateParameterError, IntegrationError
from .model import TwoQubitParams, build_twoqubit_hamiltonian

Hamiltonian = Callable[[float], np.ndarray]

SCHEMES = ("magnus4", "midpoint-exponential", "rk4")

_GAUSS_OFFSET = math.sqrt(3.0) / 6.0


@dataclass(frozen=True)
class IntegratorConfig:
    tolerance: float = 1e-10
    max_steps: int = 2**20
    scheme: str = "magnus4"
    min_steps: int = 4

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.min_steps < 1 or self.max_steps < self.min_steps:
            raise ValueError("need 1 <= min_steps <= max_steps")


@dataclass(frozen=True)
class PropagatorResult:
    unitary: np.ndarray
    steps: int
    est_error: float
    delta: float


def unitarity_defect(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[-1]))))


def expm_hermitian(h: np.ndarray, dt: float = 1.0) -> np.ndarray:
    """``exp(-i h dt)`` via eigendecomposition; ``h`` may be a stack."""
    w, v = np.linalg.eigh(h)
    phase = np.exp(-1j * dt * w)
    return (v * phase[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)


def ordered_product(steps: np.ndarray) -> np.ndarray:
    """``steps[-1] @ ... @ steps[0]`` by pairwise reduction."""
    steps = np.asarray(steps)
    while steps.shape[0] > 1:
        if steps.shape[0] % 2:
            eye = np.broadcast_to(np.eye(steps.shape[-1], dtype=steps.dtype),
                                  (1,) + steps.shape[1:])
            steps = np.concatenate([steps, eye])
        steps = steps[1::2] @ steps[0::2]
    return steps[0]


def sample(h: Hamiltonian, times) -> np.ndarray:
    return np.asarray([h(float(t)) for t in times], dtype=complex)


def _check_hermitian(stack: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(stack))))
    if np.max(np.abs(stack - np.swapaxes(stack.conj(), -1, -2))) > 1e-12 * scale:
        raise ValueError("Hamiltonian is not Hermitian at a sampled time")


def hermitian_steps(h: Hamiltonian, t0: float, t1: float, n: int,
                    scheme: str = "magnus4") -> np.ndarray:
    """Per-step propagators of one uniform pass, earliest first."""
    dt = (t1 - t0) / n
    mids = t0 + dt * (np.arange(n) + 0.5)
    if scheme == "midpoint-exponential":
        hm = sample(h, mids)
        _check_hermitian(hm)
        return expm_hermitian(hm, dt)
    if scheme == "magnus4":
        h1 = sample(h, mids - _GAUSS_OFFSET * dt)
        h2 = sample(h, mids + _GAUSS_OFFSET * dt)
        _check_hermitian(h1)
        _check_hermitian(h2)
        comm = h2 @ h1 - h1 @ h2
        k = 0.5 * dt * (h1 + h2) - 1j * (math.sqrt(3.0) / 12.0) * dt * dt * comm
        k = 0.5 * (k + np.swapaxes(k.conj(), -1, -2))
        return expm_hermitian(k)
    # classical RK4 on dU/dt = -i H U, written as a step matrix
    starts = t0 + dt * np.arange(n)
    a0 = -1j * sample(h, starts)
    am = -1j * sample(h, starts + 0.5 * dt)
    a1 = -1j * sample(h, starts + dt)
    eye = np.eye(a0.shape[-1])
    k1 = a0
    k2 = am @ (eye + 0.5 * dt * k1)
    k3 = am @ (eye + 0.5 * dt * k2)
    k4 = a1 @ (eye + dt * k3)
    return eye + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def converge(pass_fn: Callable[[int], np.ndarray], cfg: IntegratorConfig):
    """Double the step count until successive passes agree; return (result, n, delta)."""
    n = cfg.min_steps
    prev = pass_fn(n)
    delta = float("inf")
    while True:
        n *= 2
        if n > cfg.max_steps:
            raise IntegrationError(
                f"no convergence within {cfg.max_steps} steps (last change {delta:.3e})",
                defect=delta,
            )
        cur = pass_fn(n)
        delta = float(np.max(np.abs(cur - prev)))
        if delta < cfg.tolerance:
            return cur, n, delta
        prev = cur


def evolve(h: Hamiltonian, t0: float, t1: float,
           cfg: IntegratorConfig | None = None) -> PropagatorResult:
    """Time-ordered exponential ``U(t1, t0)`` of ``-i H(t)``."""
    cfg = cfg or IntegratorConfig()
    if t1 < t0:
        raise ValueError("evolve requires t1 >= t0")
    dim = np.asarray(h(t0)).shape[0]
    if t1 == t0:
        return PropagatorResult(np.eye(dim, dtype=complex), 0, 0.0, 0.0)
    u, n, delta = converge(
        lambda k: ordered_product(hermitian_steps(h, t0, t1, k, cfg.scheme)), cfg)
    return PropagatorResult(u, n, unitarity_defect(u), delta)


def evolve_bruteforce(h: Hamiltonian, t0: float, t1: float, n_steps: int) -> np.ndarray:
    """Product of midpoint-sampled exact step exponentials."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    dt = (t1 - t0) / n_steps
    u = None
    for j in range(n_steps):
        w, v = np.linalg.eigh(h(t0 + (j + 0.5) * dt))
        step = (v * np.exp(-1j * dt * w)) @ v.conj().T
        u = step if u is None else step @ u
    return u


def square_pulse_hamiltonian(q: TwoQubitParams, which: str = "first") -> np.ndarray:
    amp = _amplitude(q, which)
    return build_twoqubit_hamiltonian(q, amp * q.delta, 0.0)


def _amplitude(q: TwoQubitParams, which: str) -> float:
    if which == "first":
        return q.amp1
    if which == "second":
        return q.amp2
    raise ValueError(f"which must be 'first' or 'second', got {which!r}")


def square_pulse_propagator(q: TwoQubitParams, which: str, t: float) -> np.ndarray:
    """``cos(w t) I - (i/w) sin(w t) H`` for a square pulse switched on for ``t``."""
    omega = math.hypot(_amplitude(q, which) * q.delta, q.alpha)
    if omega == 0.0:
        raise DegenerateParameterError(
            f"{which} pulse has omega = 0 (zero amplitude and alpha)")
    h = square_pulse_hamiltonian(q, which)
    return math.cos(omega * t) * np.eye(4) - 1j * math.sin(omega * t) / omega * h
