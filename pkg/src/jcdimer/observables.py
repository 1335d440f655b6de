"""
Derived quantities: imbalances, spin correlator, photon phase statistics,
entropies, thermal reference, spectral peak and decay fits, quadrature energies.
Phase-space functions live in :mod:`jcdimer.phasespace`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateInputError, CutoffError, DomainError, FitDomainError,
                     NoPeakError, NumericError)
from .quantum import DensityMatrix, QuantumState, reduce_density

__all__ = [
    "EIGEN_FLOOR",
    "PhaseDistribution",
    "ThermalReference",
    "photon_imbalance",
    "atomic_imbalance",
    "spin_expectations",
    "spin_orientation_clr",
    "phase_distribution",
    "phase_moments",
    "relative_phase",
    "entanglement_entropy",
    "mutual_information",
    "thermal_reference",
    "thermal_cutoff",
    "dominant_frequency",
    "fit_decay_rate",
    "quadrature_energies",
    "photon_moments",
]

EIGEN_FLOOR = 1e-12
MAX_PHASE_VARIANCE = math.pi ** 2 / 3.0

# spin-1/2 operators in the (ground, excited) = (0, 1) ordering
SX = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
SY = 0.5 * np.array([[0, 1j], [-1j, 0]], dtype=complex)
SZ = 0.5 * np.array([[-1, 0], [0, 1]], dtype=complex)


def photon_imbalance(n_l, n_r):
    """(n_L - n_R)/(n_L + n_R)."""
    n_l = np.asarray(n_l, dtype=float)
    n_r = np.asarray(n_r, dtype=float)
    total = n_l + n_r
    if np.any(total == 0):
        raise DegenerateInputError("photon imbalance undefined for empty cavities")
    out = (n_l - n_r) / total
    return float(out) if out.ndim == 0 else out


def atomic_imbalance(z_l, z_r, quantum: bool = False):
    """Atomic imbalance.

    Classical inversions z in [-1, 1] give |z_R - z_L|/2; with ``quantum=True``
    the inputs are spin expectations <S_z> in [-1/2, 1/2] and the result is
    |<S_Lz> - <S_Rz>|.
    """
    out = np.abs(np.asarray(z_l, dtype=float) - np.asarray(z_r, dtype=float))
    if not quantum:
        out = 0.5 * out
    return float(out) if out.ndim == 0 else out


def spin_expectations(rho_spin: DensityMatrix) -> np.ndarray:
    """(<S_x>, <S_y>, <S_z>) of a single-spin reduction."""
    return np.array([rho_spin.expect(op).real for op in (SX, SY, SZ)])


def spin_orientation_clr(rho_pair: DensityMatrix) -> float:
    """Normalised transverse spin-spin correlator C_LR of a spin-pair reduction."""
    rho = rho_pair.matrix
    corr = np.trace(rho @ (np.kron(SX, SX) + np.kron(SY, SY))).real
    sz_l = np.trace(rho @ np.kron(SZ, np.eye(2))).real
    sz_r = np.trace(rho @ np.kron(np.eye(2), SZ)).real
    den = (0.25 - sz_l ** 2) * (0.25 - sz_r ** 2)
    if den <= 0:
        raise DegenerateInputError("C_LR undefined for fully polarised spins")
    return float(corr / math.sqrt(den))


@dataclass(frozen=True)
class PhaseDistribution:
    """Photon phase distribution on the phase-state grid.

    ``psi_values`` are the window-ordered grid angles (ascending from the
    reference angle); ``probabilities`` sum to one.
    """

    psi_values: np.ndarray
    probabilities: np.ndarray
    psi0: float = -math.pi


def _phase_grid(n_levels: int, psi0: float) -> np.ndarray:
    return psi0 + 2.0 * math.pi * np.arange(n_levels) / n_levels


def phase_distribution(rho_photon: DensityMatrix, psi0: float = -math.pi,
                       recenter: bool = False) -> PhaseDistribution:
    """P(psi_m) = <psi_m|rho|psi_m> over the N_max + 1 phase states.

    ``psi0`` is the window start; the window is [psi0, psi0 + 2 pi).  With
    ``recenter`` the window is shifted so that the distribution's peak lies
    at its centre, which avoids the branch cut for peaks near +-pi.
    """
    rho = rho_photon.matrix
    n_levels = rho.shape[0]
    n = np.arange(n_levels)

    def evaluate(start):
        grid = _phase_grid(n_levels, start)
        kets = np.exp(1j * np.outer(n, grid)) / math.sqrt(n_levels)
        probs = np.einsum("nm,nk,km->m", kets.conj(), rho, kets).real
        return grid, probs

    grid, probs = evaluate(psi0)
    if recenter:
        peak = grid[int(np.argmax(probs))]
        grid, probs = evaluate(peak - math.pi + math.pi / n_levels)
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    return PhaseDistribution(grid, probs, float(grid[0]))


def phase_moments(dist: PhaseDistribution) -> tuple:
    """Linear mean, variance and variance / (pi^2/3) of a phase distribution."""
    mean = float(np.sum(dist.psi_values * dist.probabilities))
    var = float(np.sum((dist.psi_values - mean) ** 2 * dist.probabilities))
    return mean, var, var / MAX_PHASE_VARIANCE


def relative_phase(rho_l: DensityMatrix, rho_r: DensityMatrix, psi0: float = -math.pi,
                   recenter: bool = False) -> float:
    """<psi_L> - <psi_R> wrapped into (-pi, pi]."""
    mean_l = phase_moments(phase_distribution(rho_l, psi0, recenter))[0]
    mean_r = phase_moments(phase_distribution(rho_r, psi0, recenter))[0]
    diff = math.remainder(mean_l - mean_r, 2.0 * math.pi)
    return math.pi if diff == -math.pi else diff


def entanglement_entropy(rho: DensityMatrix | np.ndarray, floor: float = EIGEN_FLOOR) -> float:
    """Von Neumann entropy in nats; eigenvalues below ``floor`` are dropped."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    try:
        lam = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))
    except np.linalg.LinAlgError as exc:
        raise NumericError("eigenvalue solver failed") from exc
    lam = lam[lam > floor]
    return float(-np.sum(lam * np.log(lam)))


def mutual_information(state: QuantumState) -> float:
    """S(spin-L) + S(spin-R) - S(spin-pair)."""
    s_l = entanglement_entropy(reduce_density(state, "spin-L"))
    s_r = entanglement_entropy(reduce_density(state, "spin-R"))
    s_lr = entanglement_entropy(reduce_density(state, "spin-pair"))
    return s_l + s_r - s_lr


@dataclass(frozen=True)
class ThermalReference:
    """Thermal photon state with mean occupation ``nbar`` truncated at n_max."""

    nbar: float
    weights: np.ndarray
    entropy: float

    @property
    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix(np.diag(self.weights).astype(complex), "photon-thermal")

    def husimi(self, x, p, excitations: int) -> np.ndarray:
        """Husimi function on scaled coordinates (Gaussian, closed form)."""
        r2 = excitations * (np.asarray(x) ** 2 + np.asarray(p) ** 2) / 2.0
        return np.exp(-r2 / (1.0 + self.nbar)) / (math.pi * (1.0 + self.nbar))

    def husimi_radial(self, r, excitations: int) -> np.ndarray:
        """Angular integral of the Husimi function at scaled radius ``r``.

        The closed form is written with r^2 = M(x^2 + p^2), i.e.
        exp(-r^2 / (2 (1 + nbar))) / (pi (1 + nbar)), times 2 pi.
        """
        r2 = excitations * np.asarray(r, dtype=float) ** 2
        return 2.0 * math.pi * np.exp(-r2 / (2.0 * (1.0 + self.nbar))) / (math.pi * (1.0 + self.nbar))


def thermal_cutoff(nbar: float, max_loss: float = 1e-6) -> int:
    """Smallest n_max for which a thermal state with ``nbar`` loses at most ``max_loss``."""
    if not math.isfinite(nbar) or nbar < 0:
        raise DomainError("nbar must be finite and non-negative")
    if nbar == 0:
        return 0
    # the tail beyond n_max is (nbar / (1 + nbar))^(n_max + 1)
    return max(0, int(math.ceil(math.log(max_loss) / math.log(nbar / (1.0 + nbar)))) - 1)


def thermal_reference(nbar: float, n_max: int | None = None,
                      max_loss: float = 1e-6) -> ThermalReference:
    """Geometric occupation weights nbar^n / (1 + nbar)^(n+1).

    ``n_max=None`` picks the cutoff from :func:`thermal_cutoff`.
    """
    if not math.isfinite(nbar) or nbar < 0:
        raise DomainError("nbar must be finite and non-negative")
    if n_max is None:
        n_max = thermal_cutoff(nbar, max_loss)
    n = np.arange(n_max + 1)
    if nbar == 0:
        weights = (n == 0).astype(float)
        return ThermalReference(0.0, weights, 0.0)
    log_w = n * math.log(nbar / (1.0 + nbar)) - math.log1p(nbar)
    weights = np.exp(log_w)
    loss = 1.0 - weights.sum()
    if loss > max_loss:
        raise CutoffError(f"thermal state with nbar={nbar} loses {loss:.2e} weight at n_max={n_max}")
    entropy = (nbar + 1.0) * math.log(nbar + 1.0) - nbar * math.log(nbar)
    return ThermalReference(float(nbar), weights, entropy)


def dominant_frequency(values, dt: float) -> float:
    """Angular frequency of the strongest spectral peak of a uniformly sampled signal.

    The mean is removed, a Hann window applied, and the largest non-DC bin of
    the real FFT refined by a parabola through its log-magnitude neighbours.
    """
    x = np.asarray(values, dtype=float)
    if x.size < 256:
        raise DomainError("need at least 256 samples")
    x = x - x.mean()
    spec = np.abs(np.fft.rfft(x * np.hanning(x.size)))
    spec[0] = 0.0
    k = int(np.argmax(spec))
    if spec[k] <= 1e-12 * max(1.0, np.abs(x).max() * x.size):
        raise NoPeakError("signal is flat")
    shift = 0.0
    if 0 < k < spec.size - 1 and spec[k - 1] > 0 and spec[k + 1] > 0:
        a, b, c = np.log(spec[k - 1]), np.log(spec[k]), np.log(spec[k + 1])
        den = a - 2.0 * b + c
        if den < 0:
            shift = 0.5 * (a - c) / den
    return 2.0 * math.pi * (k + shift) / (x.size * dt)


def fit_decay_rate(times, values, drop_fraction: float = 0.1) -> float:
    """Exponential decay rate from a least-squares line through ln(values).

    The first ``drop_fraction`` of the samples is excluded from the fit.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    start = int(math.floor(drop_fraction * t.size))
    t, y = t[start:], y[start:]
    if t.size < 2:
        raise DomainError("fit window needs at least two samples")
    if np.any(y <= 0):
        raise FitDomainError("non-positive values inside the fit window")
    slope = np.polyfit(t, np.log(y), 1)[0]
    return float(-slope)


def photon_moments(rho_photon: DensityMatrix) -> dict:
    """<n>, <n^2>, <a>, <a^2> of a single-mode reduction."""
    rho = rho_photon.matrix
    n = np.arange(rho.shape[0])
    diag = np.real(np.diag(rho))
    sq = np.sqrt(n[1:])
    a = np.sum(np.diagonal(rho, offset=-1) * sq)        # Tr(rho a) = sum rho[n-1... ]
    a2 = np.sum(np.diagonal(rho, offset=-2) * np.sqrt(n[2:] * n[1:-1]))
    return {"n": float(np.sum(n * diag)), "n2": float(np.sum(n * n * diag)),
            "a": complex(a), "a2": complex(a2)}


def quadrature_energies(rho_photon: DensityMatrix, excitations: int,
                        allow_vacuum: bool = False) -> tuple:
    """Scaled potential/kinetic quadrature energies and the number-variance ratio.

    PE = <x^2>/(2M), KE = <p^2>/(2M) with x = (a + a^dag)/sqrt(2),
    p = i(a^dag - a)/sqrt(2); ratio = Var(n)/<n>.

    For <n> = 0 the ratio is undefined: a :class:`DegenerateInputError` is
    raised unless ``allow_vacuum`` is set, in which case it is ``nan``.
    """
    m = photon_moments(rho_photon)
    if m["n"] <= 0 and not allow_vacuum:
        raise DegenerateInputError("number-variance ratio undefined for <n> = 0")
    x2 = m["a2"].real + m["n"] + 0.5
    p2 = -m["a2"].real + m["n"] + 0.5
    pe = x2 / (2.0 * excitations)
    ke = p2 / (2.0 * excitations)
    ratio = (m["n2"] - m["n"] ** 2) / m["n"] if m["n"] > 0 else float("nan")
    return pe, ke, ratio
