"""Hamiltonians for triple-dot charge qubits.

Conventions (hbar = 1, energies in units of a reference tunnelling amplitude):

* Dots are indexed from 0. For one device the site basis is
  ``(|100>, |010>, |001>)``, which doubles as the Lambda-system basis
  ``(|0>, |a>, |1>)``: the qubit lives on dots 0 and 2 and dot 1 is auxiliary.
* Two-qubit matrices use ``(|00>, |01>, |10>, |11>)`` with the first factor
  being the control device.
* All matrices are dense ``complex128`` arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.special import erf

from .errors import ConfigurationError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

QUBIT_SITES = (0, 2)
AUX_SITE = 1

ENVELOPE_SHAPES = ("square", "sine-squared", "gaussian-truncated")


Bond = tuple[int, int]


@dataclass(frozen=True)
class DotNetwork:
    """Tight-binding description of a ring (or chain) of single-orbital dots.

    ``hop_mag`` maps forward-oriented nearest-neighbour bonds ``(k, k+1)``
    (and ``(n-1, 0)`` when periodic) to non-negative magnitudes. ``peierls``
    maps the same kind of bond to the dimensionless phase ``(e/hbar) alpha``
    picked up when hopping from ``k`` to ``k+1``. Bonds missing from
    ``peierls`` carry zero phase.
    """

    n_sites: int
    onsite: tuple[float, ...]
    hop_mag: Mapping[Bond, float]
    peierls: Mapping[Bond, float] = field(default_factory=dict)
    periodic: bool = True

    def __post_init__(self):
        if self.n_sites < 2:
            raise ConfigurationError(f"n_sites must be >= 2, got {self.n_sites}")
        object.__setattr__(self, "onsite", tuple(float(e) for e in self.onsite))
        if len(self.onsite) != self.n_sites:
            raise ConfigurationError(
                f"onsite has {len(self.onsite)} entries for {self.n_sites} sites"
            )
        allowed = set(self.bonds())
        for name in ("hop_mag", "peierls"):
            mapping = {tuple(k): float(v) for k, v in getattr(self, name).items()}
            for key, value in mapping.items():
                if key not in allowed:
                    raise ConfigurationError(
                        f"{name} key {key} is not a forward nearest-neighbour bond"
                    )
                if not math.isfinite(value):
                    raise ConfigurationError(f"{name}[{key}] is not finite")
            object.__setattr__(self, name, mapping)
        for key, value in self.hop_mag.items():
            if value < 0:
                raise ConfigurationError(f"hop_mag[{key}] = {value} is negative")

    def bonds(self) -> list[Bond]:
        """Forward-oriented nearest-neighbour bonds, wrap bond last."""
        bonds = [(k, k + 1) for k in range(self.n_sites - 1)]
        if self.periodic and self.n_sites > 2:
            bonds.append((self.n_sites - 1, 0))
        return bonds

    def flux(self) -> float:
        """Total dimensionless flux: the sum of Peierls phases around the ring."""
        return float(sum(self.peierls.get(b, 0.0) for b in self.bonds()))

    def with_gauge(self, site_phases) -> "DotNetwork":
        """Apply the gauge change ``A -> A + grad(Pi)`` given ``Pi`` per site.

        Each bond phase shifts by ``Pi(l) - Pi(k)``; the total flux is
        untouched because the shifts telescope around the ring.
        """
        pi = np.asarray(site_phases, dtype=float)
        if pi.shape != (self.n_sites,):
            raise ConfigurationError(
                f"expected {self.n_sites} site phases, got shape {pi.shape}"
            )
        peierls = {
            (k, l): self.peierls.get((k, l), 0.0) + pi[l] - pi[k] for k, l in self.bonds()
        }
        return DotNetwork(self.n_sites, self.onsite, self.hop_mag, peierls, self.periodic)

    @classmethod
    def ring(cls, onsite, hoppings, flux: float = 0.0) -> "DotNetwork":
        """Periodic ring with the flux phase split equally over active bonds."""
        n = len(onsite)
        bonds = [(k, (k + 1) % n) for k in range(n)]
        hop = dict(zip(bonds, hoppings))
        active = [b for b in bonds if hop[b] != 0.0] or bonds
        peierls = {b: flux / len(active) if b in active else 0.0 for b in bonds}
        return cls(n, tuple(onsite), hop, peierls, periodic=True)


def site_phases_from_redistribution(net: DotNetwork, new_peierls: Mapping[Bond, float],
                                    atol: float = 1e-12) -> np.ndarray:
    """Recover the site gauge function relating ``net`` to re-assigned phases.

    Raises ConfigurationError if the redistribution changes the total flux
    (mod 2 pi), since then no gauge function connects the two.
    """
    bonds = net.bonds()
    new = {b: float(new_peierls.get(b, 0.0)) for b in bonds}
    new_flux = sum(new.values())
    mismatch = math.remainder(new_flux - net.flux(), 2 * math.pi)
    if abs(mismatch) > atol:
        raise ConfigurationError(
            f"redistribution changes the total flux by {mismatch:.3e} rad"
        )
    pi = np.zeros(net.n_sites)
    for k in range(net.n_sites - 1):
        pi[k + 1] = pi[k] + new[(k, k + 1)] - net.peierls.get((k, k + 1), 0.0)
    return pi


def build_ring_hamiltonian(net: DotNetwork) -> np.ndarray:
    """Single-electron tight-binding Hamiltonian with Peierls-phased hoppings."""
    hop = np.zeros((net.n_sites, net.n_sites), dtype=complex)
    for (k, l), mag in net.hop_mag.items():
        hop[k, l] = mag * np.exp(-1j * net.peierls.get((k, l), 0.0))
    return np.diag(np.asarray(net.onsite, dtype=complex)) + hop + hop.conj().T


@dataclass(frozen=True)
class PulseEnvelope:
    """Scalar control profile Omega(t), zero outside ``[0, duration]``.

    ``sigma_frac`` sets the Gaussian width as a fraction of the duration and
    is ignored by the other shapes.
    """

    shape: str
    amplitude: float
    duration: float
    sigma_frac: float = 1.0 / 6.0

    def __post_init__(self):
        if self.shape not in ENVELOPE_SHAPES:
            raise ConfigurationError(
                f"unknown envelope shape {self.shape!r}; choose from {ENVELOPE_SHAPES}"
            )
        if not (self.duration > 0 and math.isfinite(self.duration)):
            raise ConfigurationError(f"duration must be positive, got {self.duration}")
        if not math.isfinite(self.amplitude):
            raise ConfigurationError("amplitude must be finite")
        if not self.sigma_frac > 0:
            raise ConfigurationError("sigma_frac must be positive")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= 0.0) & (t <= self.duration)
        if self.shape == "square":
            v = np.full_like(t, self.amplitude)
        elif self.shape == "sine-squared":
            v = self.amplitude * np.sin(np.pi * t / self.duration) ** 2
        else:
            sigma = self.sigma_frac * self.duration
            v = self.amplitude * np.exp(-0.5 * ((t - 0.5 * self.duration) / sigma) ** 2)
        v = np.where(inside, v, 0.0)
        return float(v) if v.ndim == 0 else v

    def __call__(self, t):
        return self.value(t)

    def area(self) -> float:
        return self.amplitude * self._unit_area()

    def _unit_area(self) -> float:
        tau = self.duration
        if self.shape == "square":
            return tau
        if self.shape == "sine-squared":
            return 0.5 * tau
        sigma = self.sigma_frac * tau
        return sigma * math.sqrt(2 * math.pi) * float(erf(tau / (2 * math.sqrt(2) * sigma)))

    @classmethod
    def with_area(cls, shape: str, area: float, duration: float, **kw) -> "PulseEnvelope":
        """Envelope of the given shape scaled so that its area is ``area``."""
        unit = cls(shape, 1.0, duration, **kw)
        return cls(shape, area / unit._unit_area(), duration, **kw)


@dataclass(frozen=True)
class LambdaParams:
    """Loop angles of a single-qubit holonomic gate.

    ``theta`` is the polar angle of the gate axis and ``phi_az`` its azimuth;
    the resulting holonomy is ``n . sigma`` with
    ``n = (sin t cos p, sin t sin p, cos t)``.
    """

    theta: float
    phi_az: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi_az)):
            raise ConfigurationError("LambdaParams angles must be finite")
        if not -1e-12 <= self.theta <= math.pi + 1e-12:
            raise ConfigurationError(f"theta must lie in [0, pi], got {self.theta}")

    def couplings(self) -> tuple[complex, complex]:
        """Time-independent couplings ``(J_12, J_23)``; ``J_12* = sin(t/2) e^{ip}``."""
        j12 = math.sin(self.theta / 2) * np.exp(-1j * self.phi_az)
        j23 = -math.cos(self.theta / 2) + 0j
        return complex(j12), complex(j23)

    def axis(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi_az), st * math.sin(self.phi_az),
                         math.cos(self.theta)])

    def network(self) -> DotNetwork:
        """The ring whose Peierls-phased hoppings realise these couplings.

        Dots 0 and 2 are decoupled (``t_13 = 0``); the minus sign of ``J_23``
        is carried as a phase of pi on bond (1, 2).
        """
        hop = {(0, 1): math.sin(self.theta / 2), (1, 2): math.cos(self.theta / 2),
               (2, 0): 0.0}
        peierls = {(0, 1): self.phi_az, (1, 2): math.pi, (2, 0): 0.0}
        return DotNetwork(3, (0.0, 0.0, 0.0), hop, peierls, periodic=True)


def lambda_coupling_matrix(p: LambdaParams) -> np.ndarray:
    """Time-independent part of the Lambda Hamiltonian (Omega = 1)."""
    j12, j23 = p.couplings()
    h = np.zeros((3, 3), dtype=complex)
    h[1, 0] = np.conj(j12)
    h[1, 2] = j23
    return h + h.conj().T


def build_lambda_hamiltonian(p: LambdaParams, env: PulseEnvelope, t: float) -> np.ndarray:
    return env.value(t) * lambda_coupling_matrix(p)


@dataclass(frozen=True)
class TwoQubitParams:
    """Parameters of the two-pulse entangling protocol.

    ``amp1`` and ``amp2`` are the dimensionless square-pulse amplitudes of
    the first and second pulse, ``delta`` converts them into the hopping
    ``t_13`` of the control device, and ``alpha`` is the sigma_y x sigma_y
    coupling. ``n1``/``n2`` select ``sin(omega tau) = (-1)^n``.
    """

    alpha: float
    delta: float
    amp1: float
    amp2: float
    n1: int = 0
    n2: int = 0
    gap: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "delta", "amp1", "amp2", "gap"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite")
        if self.n1 not in (0, 1) or self.n2 not in (0, 1):
            raise ConfigurationError("n1 and n2 must be 0 or 1")
        if self.gap < 0:
            raise ConfigurationError(f"gap must be non-negative, got {self.gap}")

    @property
    def omega(self) -> float:
        return math.hypot(self.amp1 * self.delta, self.alpha)

    @property
    def omega_t(self) -> float:
        return math.hypot(self.amp2 * self.delta, self.alpha)

    @property
    def phi_ratio(self) -> float:
        return self.amp1 / self.amp2

    @property
    def alpha_ratio(self) -> float:
        return self.alpha / (self.amp2 * self.delta)


def build_twoqubit_hamiltonian(q: TwoQubitParams, t13_1: float, t13_2: float) -> np.ndarray:
    return (t13_1 * np.kron(SIGMA_X, IDENTITY_2) + t13_2 * np.kron(IDENTITY_2, SIGMA_X)
            + q.alpha * np.kron(SIGMA_Y, SIGMA_Y))


def pauli_vector_matrix(n) -> np.ndarray:
    """``n . sigma`` for a real 3-vector ``n``."""
    return sum(c * s for c, s in zip(n, PAULIS))
