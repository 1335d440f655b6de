"""
Quantum dynamics of the dimer in a truncated Fock (x) spin basis.

Basis states are |n_L, s_L, n_R, s_R> with photon numbers n_i in [0, n_max]
and s_i = 1 for the excited atom.  The flat index is

    ((n_L * 2 + s_L) * (n_max + 1) + n_R) * 2 + s_R

so a state vector reshapes to an array of shape (N, 2, N, 2), N = n_max + 1.

Every term of the Hamiltonian conserves the total excitation number, so H is
block diagonal in the excitation sectors.  Time evolution diagonalises each
(small) sector block once and then propagates exactly; a Krylov propagator
(``scipy.sparse.linalg.expm_multiply``) is available as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln
from scipy.stats import poisson
from scipy.sparse.linalg import expm_multiply

from .core import FixedPoint, ModelParams
from .errors import CutoffError, DomainError, PropagationError

__all__ = [
    "QuantumBasis",
    "HamiltonianOp",
    "QuantumState",
    "DensityMatrix",
    "default_cutoff",
    "coherent_cutoff",
    "build_basis",
    "build_hamiltonian",
    "coherent_amplitudes",
    "coherent_product_state",
    "fock_state",
    "evolve",
    "iter_evolve",
    "reduce_density",
    "total_excitation_expectation",
    "SUBSYSTEMS",
]

SUBSYSTEMS = ("spin-L", "spin-R", "spin-pair", "photon-L", "photon-R", "photon-pair")


def default_cutoff(excitations: int) -> int:
    """Per-cavity photon cutoff ceil(M + 6 sqrt(M))."""
    return int(math.ceil(excitations + 6.0 * math.sqrt(excitations)))


def coherent_cutoff(mean_photons: float, max_loss: float = 1e-8) -> int:
    """Smallest cutoff keeping all but ``max_loss`` of a coherent state's Poisson weight."""
    if mean_photons <= 0:
        return 0
    n = int(poisson.isf(max_loss, mean_photons))
    while poisson.sf(n, mean_photons) > max_loss:
        n += 1
    return n


@dataclass(frozen=True)
class QuantumBasis:
    """Product basis |n_L, s_L, n_R, s_R> with a per-cavity photon cutoff."""

    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise DomainError("n_max must be an integer >= 1")

    @property
    def n_levels(self) -> int:
        return self.n_max + 1

    @property
    def dimension(self) -> int:
        return 4 * self.n_levels ** 2

    @property
    def shape(self) -> tuple:
        return (self.n_levels, 2, self.n_levels, 2)

    def index(self, n_l: int, s_l: int, n_r: int, s_r: int) -> int:
        return ((n_l * 2 + s_l) * self.n_levels + n_r) * 2 + s_r

    def labels(self, idx: int) -> tuple:
        return tuple(int(v) for v in np.unravel_index(idx, self.shape))

    @cached_property
    def quantum_numbers(self) -> np.ndarray:
        """Array (dimension, 4) of (n_L, s_L, n_R, s_R) per flat index."""
        grids = np.meshgrid(np.arange(self.n_levels), np.arange(2),
                            np.arange(self.n_levels), np.arange(2), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    @cached_property
    def excitations(self) -> np.ndarray:
        """Eigenvalue of the total-excitation operator for every basis state."""
        return self.quantum_numbers.sum(axis=1)

    @cached_property
    def sectors(self) -> dict:
        """Flat indices grouped by excitation number."""
        exc = self.excitations
        order = np.argsort(exc, kind="stable")
        bounds = np.flatnonzero(np.diff(exc[order])) + 1
        return {int(exc[chunk[0]]): chunk for chunk in np.split(order, bounds)}


def build_basis(n_max: int) -> QuantumBasis:
    return QuantumBasis(n_max)


@dataclass(frozen=True, eq=False)
class HamiltonianOp:
    """Sparse Hermitian Hamiltonian on a :class:`QuantumBasis`."""

    params: ModelParams
    basis: QuantumBasis
    matrix: sp.csr_matrix

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    def expectation(self, vec: np.ndarray) -> float:
        return float(np.real(np.vdot(vec, self.matrix @ vec)))

    @cached_property
    def sector_eigensystems(self) -> dict:
        """Dense eigendecomposition ``(indices, energies, vectors)`` per sector."""
        mat = self.matrix.tocsr()
        out = {}
        for m, idx in self.basis.sectors.items():
            block = mat[idx][:, idx].toarray()
            energies, vectors = np.linalg.eigh(block)
            out[m] = (idx, energies, vectors)
        return out


def build_hamiltonian(params: ModelParams, basis: QuantumBasis) -> HamiltonianOp:
    """Assemble the dimer Hamiltonian with physical couplings g = g~ sqrt(M), U = U~/M."""
    qn = basis.quantum_numbers
    n_l, s_l, n_r, s_r = qn.T
    g, U, J, mu = params.g_physical, params.u_physical, params.hopping, params.mu
    dim = basis.dimension
    diag = (params.omega * (n_l + n_r) + params.omega0 * (s_l + s_r)
            + 0.5 * U * (n_l * (n_l - 1) + n_r * (n_r - 1))
            - mu * (n_l + s_l + n_r + s_r)).astype(float)
    rows, cols, vals = [np.arange(dim)], [np.arange(dim)], [diag]

    # g a sigma+ : |n, down> -> sqrt(n) |n-1, up>, per cavity
    for photon, spin in ((0, 1), (2, 3)):
        src = np.flatnonzero((qn[:, photon] >= 1) & (qn[:, spin] == 0))
        dst_qn = qn[src].copy()
        dst_qn[:, photon] -= 1
        dst_qn[:, spin] = 1
        dst = np.ravel_multi_index(dst_qn.T, basis.shape)
        amp = g * np.sqrt(qn[src, photon])
        rows += [dst, src]
        cols += [src, dst]
        vals += [amp, amp]

    # -J a_L^dag a_R + h.c.
    src = np.flatnonzero((qn[:, 2] >= 1) & (qn[:, 0] < basis.n_max))
    dst_qn = qn[src].copy()
    dst_qn[:, 0] += 1
    dst_qn[:, 2] -= 1
    dst = np.ravel_multi_index(dst_qn.T, basis.shape)
    amp = -J * np.sqrt((qn[src, 0] + 1) * qn[src, 2])
    rows += [dst, src]
    cols += [src, dst]
    vals += [amp, amp]

    mat = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                        shape=(dim, dim)).tocsr()
    mat.sum_duplicates()
    return HamiltonianOp(params, basis, mat)


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Normalised amplitude vector over a :class:`QuantumBasis`."""

    basis: QuantumBasis
    vector: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def tensor(self) -> np.ndarray:
        return self.vector.reshape(self.basis.shape)

    def expect_diag(self, values: np.ndarray) -> float:
        return float(np.sum(np.abs(self.vector) ** 2 * values))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Reduced density matrix of a named subsystem."""

    matrix: np.ndarray
    subsystem: str = "photon-L"

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.matrix @ op))


def coherent_amplitudes(alpha: complex, n_max: int, max_loss: float = 1e-8) -> np.ndarray:
    """Fock amplitudes <n|alpha> for n <= n_max, renormalised after truncation."""
    n = np.arange(n_max + 1)
    r2 = abs(alpha) ** 2
    if r2 == 0.0:
        out = np.zeros(n_max + 1, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = -0.5 * r2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    amps = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    kept = float(np.sum(np.abs(amps) ** 2))
    if 1.0 - kept > max_loss:
        raise CutoffError(f"|alpha|^2={r2:.4g} loses {1 - kept:.2e} weight at n_max={n_max}")
    return amps / math.sqrt(kept)


def spin_amplitudes(theta: float, phi: float) -> np.ndarray:
    """Spin coherent state cos(theta/2)|up> + sin(theta/2) e^{i phi}|down>.

    Index 1 is the excited (up) state, index 0 the ground state.
    """
    return np.array([math.sin(theta / 2.0) * np.exp(1j * phi), math.cos(theta / 2.0)])


def coherent_product_state(source, basis: QuantumBasis, params: ModelParams | None = None,
                           project_sector: bool = False, max_loss: float = 1e-8) -> QuantumState:
    """Product of photon and spin coherent states.

    ``source`` is a :class:`FixedPoint` or a
    :class:`~jcdimer.core.SemiclassicalState` (both need ``params`` for the
    excitation number M), or a raw tuple
    ``(alpha_L, alpha_R, theta_L, phi_L, theta_R, phi_R)``.  With
    ``project_sector`` the state is projected onto the excitation sector
    closest to its mean and renormalised.
    """
    if isinstance(source, FixedPoint):
        source = source.state
    if hasattr(source, "to_cartesian"):
        if params is None:
            raise DomainError("params are required to scale a semiclassical state")
        scale = math.sqrt(params.excitations / 2.0)
        st = source
        alpha_l = scale * complex(st.x_L, st.p_L)
        alpha_r = scale * complex(st.x_R, st.p_R)
        raw = (alpha_l, alpha_r, math.acos(max(-1.0, min(1.0, st.z_L))), st.phi_L,
               math.acos(max(-1.0, min(1.0, st.z_R))), st.phi_R)
    else:
        raw = tuple(source)
    alpha_l, alpha_r, th_l, ph_l, th_r, ph_r = raw
    ph_amp_l = coherent_amplitudes(alpha_l, basis.n_max, max_loss)
    ph_amp_r = coherent_amplitudes(alpha_r, basis.n_max, max_loss)
    vec = np.einsum("a,s,b,t->asbt", ph_amp_l, spin_amplitudes(th_l, ph_l),
                    ph_amp_r, spin_amplitudes(th_r, ph_r)).ravel()
    if project_sector:
        mean = float(np.sum(np.abs(vec) ** 2 * basis.excitations))
        vec = np.where(basis.excitations == int(round(mean)), vec, 0.0)
    vec = vec / np.linalg.norm(vec)
    return QuantumState(basis, vec)


def fock_state(basis: QuantumBasis, n_l: int, s_l: int, n_r: int, s_r: int) -> QuantumState:
    vec = np.zeros(basis.dimension, dtype=complex)
    vec[basis.index(n_l, s_l, n_r, s_r)] = 1.0
    return QuantumState(basis, vec)


def total_excitation_expectation(state: QuantumState) -> float:
    return state.expect_diag(state.basis.excitations)


def _check_times(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] < 0 or np.any(np.diff(t) < 0):
        raise DomainError("t_grid must be a non-empty ordered sequence starting at t >= 0")
    return t


def iter_evolve(state0: QuantumState, H: HamiltonianOp, t_grid: Sequence[float],
                method: str = "eigen", monitor_tol: float = 1e-8) -> Iterator[QuantumState]:
    """Yield exp(-i H t) |state0> for each time of ``t_grid``.

    ``method="eigen"`` propagates exactly in the excitation-sector
    eigenbases; ``method="krylov"`` steps with ``expm_multiply``.  Norm and
    energy are monitored against ``monitor_tol``; a violation raises
    :class:`PropagationError`.
    """
    t = _check_times(t_grid)
    psi0 = np.asarray(state0.vector, dtype=complex)
    norm0 = np.linalg.norm(psi0)
    e0 = H.expectation(psi0)
    escale = max(abs(e0), 1.0)

    def checked(vec, time):
        norm = np.linalg.norm(vec)
        if abs(norm - norm0) > monitor_tol * norm0:
            raise PropagationError(f"norm drift {abs(norm - norm0):.2e} at t={time:.6g}")
        energy = H.expectation(vec)
        if abs(energy - e0) > monitor_tol * escale:
            raise PropagationError(f"energy drift {abs(energy - e0):.2e} at t={time:.6g}")
        return QuantumState(state0.basis, vec)

    if method == "eigen":
        blocks = []
        for idx, energies, vectors in H.sector_eigensystems.values():
            coeff = vectors.conj().T @ psi0[idx]
            if np.any(coeff != 0):
                blocks.append((idx, energies, vectors, coeff))
        for time in t:
            vec = np.zeros_like(psi0)
            for idx, energies, vectors, coeff in blocks:
                vec[idx] = vectors @ (np.exp(-1j * energies * time) * coeff)
            yield checked(vec, time)
    elif method == "krylov":
        mat = (-1j * H.matrix).tocsc()
        vec = psi0.copy()
        current = 0.0
        for time in t:
            if time > current:
                vec = expm_multiply(mat * (time - current), vec)
                current = time
            yield checked(vec, time)
    else:
        raise DomainError(f"unknown propagation method {method!r}")


def evolve(state0: QuantumState, H: HamiltonianOp, t_grid: Sequence[float],
           method: str = "eigen", monitor_tol: float = 1e-8) -> list:
    """List of states at the grid times (see :func:`iter_evolve`)."""
    return list(iter_evolve(state0, H, t_grid, method, monitor_tol))


def reduce_density(state: QuantumState, subsystem: str) -> DensityMatrix:
    """Partial trace onto one of :data:`SUBSYSTEMS`."""
    psi = state.tensor()
    if subsystem == "spin-L":
        rho = np.einsum("asbt,aubt->su", psi, psi.conj())
    elif subsystem == "spin-R":
        rho = np.einsum("asbt,asbu->tu", psi, psi.conj())
    elif subsystem == "spin-pair":
        rho = np.einsum("asbt,aubv->stuv", psi, psi.conj()).reshape(4, 4)
    elif subsystem == "photon-L":
        rho = np.einsum("asbt,csbt->ac", psi, psi.conj())
    elif subsystem == "photon-R":
        rho = np.einsum("asbt,asct->bc", psi, psi.conj())
    elif subsystem == "photon-pair":
        n = state.basis.n_levels
        rho = np.einsum("asbt,csdt->abcd", psi, psi.conj()).reshape(n * n, n * n)
    else:
        raise DomainError(f"unknown subsystem {subsystem!r}; expected one of {SUBSYSTEMS}")
    return DensityMatrix(rho, subsystem)
