"""
Parameter and state types shared by the semiclassical and quantum layers.

Units: the photon hopping J is the energy unit and hbar = k_B = 1, so times
are in units of 1/J.  Couplings are stored in their excitation-scaled form,

    g_scaled = g / sqrt(M),     u_scaled = U * M,

with M the conserved number of excitations.  The semiclassical variables per
cavity are the photon quadratures (x, p) with alpha / sqrt(M) = (x + i p)/sqrt(2),
the atomic inversion z = cos(theta) and the spin azimuth phi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "ModelParams",
    "SemiclassicalState",
    "BranchLabel",
    "FixedPoint",
    "TimeSeries",
    "BRANCH_SIGNS",
    "constraint_residual",
    "classical_energy",
]

CAVITIES = ("L", "R")


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the Josephson-coupled Jaynes-Cummings dimer.

    Parameters
    ----------
    omega, omega0 : float
        Cavity frequency and atomic gap, in units of J.
    g_scaled : float
        Atom-photon coupling g/sqrt(M).  Must be positive.
    u_scaled : float
        Kerr strength U*M.  Must be non-negative.
    excitations : int
        Conserved total excitation number M.
    mu : float
        Chemical potential (gauge choice; rotates the global phase only).
    """

    omega: float = 2.0
    omega0: float = 2.0
    g_scaled: float = 1.0
    u_scaled: float = 0.0
    excitations: int = 30
    mu: float = 0.0

    def __post_init__(self):
        if int(self.excitations) != self.excitations or self.excitations < 1:
            raise DomainError(f"excitations must be a positive integer, got {self.excitations}")
        object.__setattr__(self, "excitations", int(self.excitations))
        if not self.g_scaled > 0:
            raise DomainError("g_scaled must be > 0; the g -> 0 limit is outside the model")
        if not self.u_scaled >= 0:
            raise DomainError("u_scaled must be >= 0")
        for name in ("omega", "omega0", "mu"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    @property
    def eta(self) -> float:
        """2S/M with S = 1/2."""
        return 1.0 / self.excitations

    @property
    def hopping(self) -> float:
        return 1.0

    @property
    def g_physical(self) -> float:
        return self.g_scaled * math.sqrt(self.excitations)

    @property
    def u_physical(self) -> float:
        return self.u_scaled / self.excitations

    def with_(self, **changes) -> "ModelParams":
        """Copy with some fields replaced."""
        data = {k: getattr(self, k) for k in
                ("omega", "omega0", "g_scaled", "u_scaled", "excitations", "mu")}
        data.update(changes)
        return ModelParams(**data)


@dataclass(frozen=True)
class SemiclassicalState:
    """The eight real phase-space variables of the product coherent state.

    Stored per cavity as photon quadratures ``x, p``, spin inversion ``z`` and
    spin azimuth ``phi``.
    """

    x_L: float
    p_L: float
    z_L: float
    phi_L: float
    x_R: float
    p_R: float
    z_R: float
    phi_R: float

    def __post_init__(self):
        for name in ("z_L", "z_R"):
            if abs(getattr(self, name)) > 1.0 + 1e-12:
                raise DomainError(f"|{name}| must not exceed 1")

    # --- derived accessors -------------------------------------------------
    @property
    def n_L(self) -> float:
        return 0.5 * (self.x_L ** 2 + self.p_L ** 2)

    @property
    def n_R(self) -> float:
        return 0.5 * (self.x_R ** 2 + self.p_R ** 2)

    @property
    def psi_L(self) -> float:
        return math.atan2(self.p_L, self.x_L)

    @property
    def psi_R(self) -> float:
        return math.atan2(self.p_R, self.x_R)

    # --- conversions -------------------------------------------------------
    def to_array(self) -> np.ndarray:
        """Order: (x_L, p_L, z_L, phi_L, x_R, p_R, z_R, phi_R)."""
        return np.array([self.x_L, self.p_L, self.z_L, self.phi_L,
                         self.x_R, self.p_R, self.z_R, self.phi_R], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "SemiclassicalState":
        return cls(*(float(v) for v in values))

    @classmethod
    def from_polar(cls, n, psi, z, phi) -> "SemiclassicalState":
        """Build from per-cavity pairs ``n=(n_L, n_R)``, ``psi``, ``z``, ``phi``."""
        values = []
        for i in range(2):
            r = math.sqrt(2.0 * max(n[i], 0.0))
            values += [r * math.cos(psi[i]), r * math.sin(psi[i]), z[i], phi[i]]
        return cls.from_array(values)

    def to_cartesian(self) -> np.ndarray:
        """Ten-component vector (x, p, s_x, s_y, s_z) per cavity, unit spin vectors."""
        out = np.empty(10)
        for k, (x, p, z, phi) in enumerate(((self.x_L, self.p_L, self.z_L, self.phi_L),
                                            (self.x_R, self.p_R, self.z_R, self.phi_R))):
            z = min(1.0, max(-1.0, z))
            rho = math.sqrt(1.0 - z * z)
            out[5 * k:5 * k + 5] = (x, p, rho * math.cos(phi), rho * math.sin(phi), z)
        return out

    @classmethod
    def from_cartesian(cls, y: Sequence[float]) -> "SemiclassicalState":
        values = []
        for k in range(2):
            x, p, sx, sy, sz = y[5 * k:5 * k + 5]
            norm = math.sqrt(sx * sx + sy * sy + sz * sz)
            values += [x, p, min(1.0, max(-1.0, sz / norm)), math.atan2(sy, sx)]
        return cls.from_array(values)

    def swapped(self) -> "SemiclassicalState":
        """Exchange the two cavities."""
        a = self.to_array()
        return SemiclassicalState.from_array(np.concatenate([a[4:], a[:4]]))

    def gauge_rotated(self, delta: float) -> "SemiclassicalState":
        """Apply phi -> phi + delta, psi -> psi - delta in both cavities."""
        c, s = math.cos(delta), math.sin(delta)
        return SemiclassicalState(
            c * self.x_L + s * self.p_L, -s * self.x_L + c * self.p_L, self.z_L, self.phi_L + delta,
            c * self.x_R + s * self.p_R, -s * self.x_R + c * self.p_R, self.z_R, self.phi_R + delta)


# (xi1, xi2) for every steady-state name
BRANCH_SIGNS = {
    "Gs": (1, -1),
    "FP-F": (1, 1),
    "PST": (1, 1),
    "ST_u": (1, 1),
    "FP-pi": (-1, 1),
    "ST1": (-1, 1),
    "FP-AF": (-1, -1),
    "ST2": (-1, -1),
}

SYMMETRIC_NAMES = {(1, -1): "Gs", (1, 1): "FP-F", (-1, 1): "FP-pi", (-1, -1): "FP-AF"}
_ALIASES = {"FP-π": "FP-pi", "FP-PI": "FP-pi", "FPPI": "FP-pi", "GS": "Gs",
            "FP-f": "FP-F", "FP-af": "FP-AF", "st1": "ST1", "st2": "ST2",
            "pst": "PST", "ST_U": "ST_u", "STU": "ST_u"}
_BY_UPPER = {name.upper(): name for name in BRANCH_SIGNS}


@dataclass(frozen=True)
class BranchLabel:
    """Steady-state family.

    ``xi1 = cos(psi_L - psi_R)`` and ``xi2 = cos(phi_i + psi_i)``; ``name`` must be
    consistent with the signs.
    """

    xi1: int
    xi2: int
    name: str

    def __post_init__(self):
        if self.xi1 not in (1, -1) or self.xi2 not in (1, -1):
            raise DomainError("xi1 and xi2 must be +1 or -1")
        if self.name not in BRANCH_SIGNS:
            raise DomainError(f"unknown branch name {self.name!r}")
        if BRANCH_SIGNS[self.name] != (self.xi1, self.xi2):
            raise DomainError(f"branch {self.name} requires signs {BRANCH_SIGNS[self.name]}")

    @classmethod
    def from_name(cls, name: str) -> "BranchLabel":
        name = _ALIASES.get(name, _ALIASES.get(name.upper(), name))
        if name not in BRANCH_SIGNS:
            name = _BY_UPPER.get(name.upper(), name)
        if name not in BRANCH_SIGNS:
            raise DomainError(f"unknown branch name {name!r}")
        return cls(*BRANCH_SIGNS[name], name)

    @classmethod
    def symmetric(cls, xi1: int, xi2: int) -> "BranchLabel":
        return cls(xi1, xi2, SYMMETRIC_NAMES[(xi1, xi2)])

    @property
    def is_symmetric(self) -> bool:
        return self.name in SYMMETRIC_NAMES.values()

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class FixedPoint:
    """A classified steady state.

    ``state`` holds the full phase-space point in the gauge psi_L = 0, and
    ``mu_star`` is the chemical potential that makes it stationary.
    """

    branch: BranchLabel
    f: float
    n_star: tuple
    z_star: tuple
    mu_star: float
    energy: float = float("nan")
    eigenfrequencies: tuple = ()
    stable: bool = False
    omega0_min: float = float("nan")
    state: SemiclassicalState | None = None
    residual: float = float("nan")

    @property
    def photon_imbalance(self) -> float:
        nL, nR = self.n_star
        return (nL - nR) / (nL + nR)

    @property
    def atomic_imbalance(self) -> float:
        return abs(self.z_star[1] - self.z_star[0]) / 2.0


@dataclass(frozen=True)
class TimeSeries:
    """Sampled trajectory: strictly increasing ``times`` and named channels."""

    times: np.ndarray
    channels: Mapping[str, np.ndarray] = field(default_factory=dict)
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or (t.size > 1 and np.any(np.diff(t) <= 0)):
            raise DomainError("times must be a strictly increasing 1-D sequence")
        chans = {}
        for k, v in self.channels.items():
            v = np.asarray(v, dtype=float)
            if v.shape != t.shape:
                raise DomainError(f"channel {k!r} has {v.shape} samples, expected {t.shape}")
            chans[k] = v
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "channels", chans)

    def __getitem__(self, name) -> np.ndarray:
        return self.channels[name]

    def __len__(self):
        return self.times.size

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def window(self, t_min=-np.inf, t_max=np.inf) -> "TimeSeries":
        mask = (self.times >= t_min) & (self.times <= t_max)
        return TimeSeries(self.times[mask], {k: v[mask] for k, v in self.channels.items()},
                          self.meta)

    def time_average(self, name, t_min=-np.inf, t_max=np.inf) -> float:
        mask = (self.times >= t_min) & (self.times <= t_max)
        return float(np.mean(self.channels[name][mask]))


def constraint_residual(state: SemiclassicalState, params: ModelParams) -> float:
    """Excitation-number constraint n_L + n_R + (eta/2)(z_L + z_R + 2) - 1."""
    return (state.n_L + state.n_R
            + 0.5 * params.eta * (state.z_L + state.z_R + 2.0) - 1.0)


def classical_energy(state: SemiclassicalState, params: ModelParams) -> float:
    """Scaled classical energy (the Hamiltonian per excitation)."""
    eta, mu = params.eta, params.mu
    energy = 0.0
    for n, z, phi, psi in ((state.n_L, state.z_L, state.phi_L, state.psi_L),
                           (state.n_R, state.z_R, state.phi_R, state.psi_R)):
        energy += ((params.omega - mu) * n + 0.5 * eta * (params.omega0 - mu) * z
                   + 0.5 * params.u_scaled * n * n
                   + params.g_scaled * math.sqrt(n) * math.sqrt(max(0.0, 1.0 - z * z))
                   * math.cos(phi + psi))
    # 2 sqrt(nL nR) cos(psi_L - psi_R) written without the angles
    energy -= state.x_L * state.x_R + state.p_L * state.p_R
    return energy
