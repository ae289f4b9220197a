"""Two-pulse holonomic entangling gate between two charge qubits.

The control device's ``t_13`` hopping is switched on by two square pulses
of amplitudes ``amp1`` and ``amp2`` while the target's is held at zero, so
the Hamiltonian is block off-diagonal between ``H+ = span{|00>, |01>}`` and
``H- = span{|10>, |11>}``. Choosing ``sin(w tau) = (-1)^n`` for both pulses
returns each block to itself and the gate is ``U(C+) (+) U(C-)`` with
``U(C+-) = (-1)^(n1+n2+1) R(+-phi)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateParameterError, InfeasibleError, ProtocolError
from .model import TwoQubitParams
from .propagate import (
    IntegratorConfig,
    evolve,
    square_pulse_hamiltonian,
    square_pulse_propagator,
)

BLOCK_TOLERANCE = 1e-8

# columns are the magic (Bell) basis
MAGIC_BASIS = np.array([[1, 1j, 0, 0],
                        [0, 0, 1j, 1],
                        [0, 0, 1j, -1],
                        [1, -1j, 0, 0]], dtype=complex) / math.sqrt(2)



@dataclass(frozen=True)
class PulseSchedule:
    q: TwoQubitParams
    tau1: float
    tau2_start: float
    tau2_end: float
    omega: float
    omega_t: float
    varphi_rot: float

    @property
    def duration(self) -> float:
        return self.tau2_end


@dataclass(frozen=True)
class EntanglingGateReport:
    unitary: np.ndarray
    block_plus: np.ndarray
    block_minus: np.ndarray
    concurrence: float
    varphi_rot: float
    off_block: float


def rotation(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s], [s, c]], dtype=complex)


def direct_sum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = a
    out[2:, 2:] = b
    return out


def rotation_angle(q: TwoQubitParams) -> float:
    """Block rotation angle from the pulse parameters, quadrant resolved."""
    d = q.delta
    return math.atan2(q.alpha * d * (q.amp1 - q.amp2), q.amp1 * q.amp2 * d * d + q.alpha**2)


def _quarter_period_multiple(n: int) -> float:
    # smallest positive x with sin(x) = (-1)^n
    return 0.5 * math.pi if n == 0 else 1.5 * math.pi


def solve_schedule(q: TwoQubitParams) -> PulseSchedule:
    omega, omega_t = q.omega, q.omega_t
    if omega == 0.0 or omega_t == 0.0:
        raise DegenerateParameterError(
            "a pulse has omega = 0; need alpha != 0 or a non-zero amplitude")
    tau1 = _quarter_period_multiple(q.n1) / omega
    start = tau1 + q.gap
    end = start + _quarter_period_multiple(q.n2) / omega_t
    return PulseSchedule(q, tau1, start, end, omega, omega_t, rotation_angle(q))


def off_block_mass(u: np.ndarray) -> float:
    return float(max(np.max(np.abs(u[:2, 2:])), np.max(np.abs(u[2:, :2]))))


def assemble_gate(s: PulseSchedule) -> EntanglingGateReport:
    """Compose the two closed-form pulse propagators into the gate."""
    u1 = square_pulse_propagator(s.q, "first", s.tau1)
    u2 = square_pulse_propagator(s.q, "second", s.tau2_end - s.tau2_start)
    u = u2 @ u1
    off = off_block_mass(u)
    if off > BLOCK_TOLERANCE:
        raise ProtocolError(f"gate is not block diagonal (off-block {off:.3e}); "
                            "check the pulse timing")
    plus, minus = u[:2, :2].copy(), u[2:, 2:].copy()
    sign = (-1) ** (s.q.n1 + s.q.n2 + 1)
    r = sign * plus
    phi = math.atan2(r[1, 0].real, r[0, 0].real)
    return EntanglingGateReport(u, plus, minus, concurrence_of(u), phi, off)


def analytic_gate(s: PulseSchedule) -> np.ndarray:
    sign = (-1) ** (s.q.n1 + s.q.n2 + 1)
    return sign * direct_sum(rotation(s.varphi_rot), rotation(-s.varphi_rot))


def protocol_segments(s: PulseSchedule):
    """``(H, t_start, t_end)`` pieces of the pulse sequence including the gap."""
    h1 = square_pulse_hamiltonian(s.q, "first")
    h2 = square_pulse_hamiltonian(s.q, "second")
    zero = np.zeros((4, 4), dtype=complex)
    segments = [(lambda t, h=h1: h, 0.0, s.tau1)]
    if s.tau2_start > s.tau1:
        segments.append((lambda t: zero, s.tau1, s.tau2_start))
    segments.append((lambda t, h=h2: h, s.tau2_start, s.tau2_end))
    return segments


def integrate_protocol(s: PulseSchedule, cfg: IntegratorConfig | None = None) -> np.ndarray:
    """Numerically integrate the piecewise-constant protocol segment by segment."""
    u = np.eye(4, dtype=complex)
    for h, a, b in protocol_segments(s):
        u = evolve(h, a, b, cfg).unitary @ u
    return u


def _minimal_enclosing_radius(points: np.ndarray) -> float:
    pts = [complex(p) for p in points]
    best = math.inf

    def covers(c, r):
        return all(abs(p - c) <= r * (1 + 1e-12) + 1e-15 for p in pts)

    for a, b in itertools.combinations(pts, 2):
        c, r = 0.5 * (a + b), 0.5 * abs(a - b)
        if r < best and covers(c, r):
            best = r
    for a, b, c3 in itertools.combinations(pts, 3):
        d = 2 * ((a.real - c3.real) * (b.imag - c3.imag) - (b.real - c3.real) * (a.imag - c3.imag))
        if abs(d) < 1e-14:
            continue
        aa, bb = abs(a - c3) ** 2, abs(b - c3) ** 2
        ux = ((b.imag - c3.imag) * aa - (a.imag - c3.imag) * bb) / d
        uy = ((a.real - c3.real) * bb - (b.real - c3.real) * aa) / d
        centre = c3 + complex(ux, uy)
        r = abs(a - centre)
        if r < best and covers(centre, r):
            best = r
    return 0.0 if best is math.inf else float(best)


def concurrence_of(gate: np.ndarray, atol: float = 1e-8) -> float:
    """Largest concurrence the gate can create from a product input.

    In the magic basis local gates are real orthogonal, so the spectrum of
    ``m = U_B^T U_B`` is a local invariant. A product input has magic-basis
    amplitudes with ``sum a_k^2 = 0``; the output concurrence is then
    ``|sum a_k^2 w_k|`` over the eigenvalues ``w_k`` of ``m``, whose maximum
    is the radius of the smallest circle enclosing the ``w_k``.
    """
    u = np.asarray(gate, dtype=complex)
    if u.shape != (4, 4):
        raise ValueError(f"gate must be 4x4, got {u.shape}")
    if np.max(np.abs(u.conj().T @ u - np.eye(4))) > atol:
        raise ValueError("gate is not unitary")
    ub = MAGIC_BASIS.conj().T @ u @ MAGIC_BASIS
    w = np.linalg.eigvals(ub.T @ ub)
    w = w / np.abs(w)
    return min(1.0, _minimal_enclosing_radius(w))


def gate_concurrence(q: TwoQubitParams) -> float:
    """``|sin 2 phi|`` straight from the parameters."""
    return abs(math.sin(2 * rotation_angle(q)))


def _free_amplitude(fixed: TwoQubitParams, free: str):
    if free not in ("amp1", "amp2"):
        raise ValueError("free must be 'amp1' or 'amp2'")
    return lambda x: replace(fixed, **{free: float(x)})


def solve_for_entangling_power(target_c: float, fixed: TwoQubitParams, free: str = "amp1",
                               bounds: tuple[float, float] = (0.0, 1e3),
                               tol: float = 1e-6) -> TwoQubitParams:
    """Tune one pulse amplitude so the gate reaches concurrence ``target_c``.

    The rotation angle is strictly monotone in either amplitude (for
    ``alpha delta != 0``), so the search is a bracketed root find on the
    angle for the candidate with the smallest rotation.
    """
    if not 0.0 <= target_c <= 1.0:
        raise ValueError(f"target concurrence must lie in [0, 1], got {target_c}")
    make = _free_amplitude(fixed, free)
    lo, hi = bounds
    if fixed.alpha * fixed.delta == 0.0:
        if target_c == 0.0:
            return make(min(max(getattr(fixed, "amp2" if free == "amp1" else "amp1"), lo), hi))
        raise InfeasibleError("alpha * delta = 0 gives a product gate", 0.0)
    phi_lo, phi_hi = sorted((rotation_angle(make(lo)), rotation_angle(make(hi))))

    half = 0.5 * math.asin(target_c)
    candidates = []
    for k in range(-4, 5):
        for base in (half, 0.5 * math.pi - half):
            phi = base + k * 0.5 * math.pi
            if phi_lo <= phi <= phi_hi:
                candidates.append(phi)
    if not candidates:
        achievable = _max_concurrence(phi_lo, phi_hi)
        raise InfeasibleError(
            f"concurrence {target_c} not reachable; maximum over {free} in {bounds} "
            f"is {achievable:.6g}", achievable)
    phi_star = min(candidates, key=abs)
    f = lambda x: rotation_angle(make(x)) - phi_star
    if f(lo) == 0.0:
        x = lo
    elif f(hi) == 0.0:
        x = hi
    else:
        x = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    q = make(x)
    got = assemble_gate(solve_schedule(q)).concurrence
    if abs(got - target_c) > tol:
        raise ProtocolError(f"solved parameters give concurrence {got}, wanted {target_c}")
    return q


def _max_concurrence(phi_lo: float, phi_hi: float) -> float:
    k = math.ceil((phi_lo - math.pi / 4) / (math.pi / 2))
    if math.pi / 4 + k * math.pi / 2 <= phi_hi:
        return 1.0
    return max(abs(math.sin(2 * phi_lo)), abs(math.sin(2 * phi_hi)))


def sweep_concurrence(phi_ratio=(0.0, 4.0), alpha_ratio=(0.0, 4.0), points=(201, 201),
                      crosscheck: int = 100, rng: np.random.Generator | None = None):
    """Concurrence over ``(amp1/amp2, alpha/(amp2 delta))`` with ``amp2 = delta = 1``.

    Returns ``(rows, checks)``: ``rows`` is an ``(N, 3)`` array of
    ``(phi_ratio, alpha_ratio, C)`` and ``checks`` lists
    ``(x, y, formula, decomposition)`` for a random subsample evaluated
    through the full gate assembly.
    """
    xs = np.linspace(*phi_ratio, points[0])
    ys = np.linspace(*alpha_ratio, points[1])
    xg, yg = np.meshgrid(xs, ys, indexing="ij")
    phi = np.arctan2(yg * (xg - 1.0), xg + yg**2)
    c = np.abs(np.sin(2 * phi))
    rows = np.column_stack([xg.ravel(), yg.ravel(), c.ravel()])

    checks = []
    if crosscheck:
        rng = rng or np.random.default_rng(0)
        usable = np.flatnonzero(rows[:, 1] > 0)
        for i in rng.choice(usable, size=min(crosscheck, usable.size), replace=False):
            x, y, formula = rows[i]
            q = TwoQubitParams(alpha=y, delta=1.0, amp1=x, amp2=1.0)
            decomposed = assemble_gate(solve_schedule(q)).concurrence
            checks.append((x, y, formula, decomposed))
    return rows, checks
