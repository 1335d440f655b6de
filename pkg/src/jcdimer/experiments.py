"""
Experiment runners shared by the command line and the demo scripts.

A run starts from a named steady state (optionally displaced by a seeded
perturbation) or an explicit phase-space point, and produces a
:class:`~jcdimer.core.TimeSeries` of the standard channels.  Quantum runs
start from the product coherent state that represents the same classical
point, so both pictures can be overlaid directly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import semiclassical as sc
from .core import FixedPoint, ModelParams, SemiclassicalState, TimeSeries, constraint_residual
from .errors import DomainError
from .observables import (atomic_imbalance, entanglement_entropy, phase_distribution,
                          phase_moments, photon_imbalance, quadrature_energies, spin_expectations,
                          spin_orientation_clr)
from .quantum import (HamiltonianOp, QuantumState, build_basis, build_hamiltonian, coherent_cutoff,
                      coherent_product_state, default_cutoff, iter_evolve, reduce_density)

__all__ = [
    "Perturbation",
    "restore_constraint",
    "perturb_state",
    "prepare_initial",
    "time_grid",
    "run_classical",
    "quantum_channels",
    "run_quantum",
    "run_quench",
    "QUANTUM_CHANNELS",
]

log = logging.getLogger(__name__)

QUANTUM_CHANNELS = (
    "n_L", "n_R", "Z_p", "Sz_L", "Sz_R", "Z_a", "Sx_L", "Sy_L", "Sx_R", "Sy_R", "C_LR",
    "S_L", "S_R", "S_LR", "MI", "dS", "S_ph_L", "S_ph_R", "psi_L", "psi_R", "psi_r",
    "dpsi2_L", "dpsi2_R", "PE_L", "KE_L", "PE_R", "KE_R", "nvar_ratio_L", "nvar_ratio_R",
    "norm", "M_expect", "energy",
)


@dataclass(frozen=True)
class Perturbation:
    """Displacement applied to a steady state before a run.

    ``kind`` is ``"none"``, ``"gaussian"`` (independent normal displacements of
    x, p, z, phi in both cavities, drawn from ``numpy.random.default_rng(seed)``)
    or ``"imbalance"`` (photon populations n_L, n_R scaled by 1 +- ``scale``).
    Every kind is followed by a rescaling of the photon amplitudes that
    restores the excitation constraint.
    """

    kind: str = "gaussian"
    scale: float = 1e-2
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "imbalance"):
            raise DomainError(f"unknown perturbation kind {self.kind!r}")
        if self.scale < 0:
            raise DomainError("perturbation scale must be non-negative")


def restore_constraint(state: SemiclassicalState, params: ModelParams) -> SemiclassicalState:
    """Rescale both photon amplitudes so that n_L + n_R + (eta/2)(z_L + z_R + 2) = 1."""
    target = 1.0 - 0.5 * params.eta * (state.z_L + state.z_R + 2.0)
    total = state.n_L + state.n_R
    if total <= 0 or target <= 0:
        raise DomainError("cannot restore the excitation constraint for this state")
    k = math.sqrt(target / total)
    return SemiclassicalState(k * state.x_L, k * state.p_L, state.z_L, state.phi_L,
                              k * state.x_R, k * state.p_R, state.z_R, state.phi_R)


def perturb_state(state: SemiclassicalState, params: ModelParams,
                  perturbation: Perturbation) -> SemiclassicalState:
    """Apply ``perturbation`` to ``state`` and project back onto the constraint surface."""
    if perturbation.kind == "none" or perturbation.scale == 0:
        return restore_constraint(state, params)
    if perturbation.kind == "imbalance":
        kl = math.sqrt(1.0 + perturbation.scale)
        kr = math.sqrt(max(0.0, 1.0 - perturbation.scale))
        out = SemiclassicalState(kl * state.x_L, kl * state.p_L, state.z_L, state.phi_L,
                                 kr * state.x_R, kr * state.p_R, state.z_R, state.phi_R)
        return restore_constraint(out, params)
    rng = np.random.default_rng(perturbation.seed)
    values = state.to_array() + perturbation.scale * rng.standard_normal(8)
    values[[2, 6]] = np.clip(values[[2, 6]], -1.0, 1.0)
    return restore_constraint(SemiclassicalState.from_array(values), params)


def prepare_initial(params: ModelParams, source, perturbation: Perturbation | None = None):
    """Resolve a branch name, :class:`FixedPoint` or explicit state to a start point.

    Returns ``(fixed_point_or_None, state)``.
    """
    fp = None
    if isinstance(source, str):
        fp = sc.find_fixed_point(params, source)
        state = fp.state
    elif isinstance(source, FixedPoint):
        fp, state = source, source.state
    elif isinstance(source, SemiclassicalState):
        state = source
    else:
        state = SemiclassicalState.from_array(source)
    if perturbation is not None:
        state = perturb_state(state, params, perturbation)
    return fp, state


def time_grid(t_final: float, dt: float) -> np.ndarray:
    if t_final <= 0 or dt <= 0:
        raise DomainError("t_final and dt must be positive")
    n = int(round(t_final / dt))
    return dt * np.arange(n + 1)


def run_classical(params: ModelParams, state0: SemiclassicalState, t_final: float,
                  dt: float, **kwargs) -> TimeSeries:
    """Integrate the classical equations and return the standard channels."""
    return sc.integrate(state0, params, t_final, dt, **kwargs)


def quantum_channels(state: QuantumState, H: HamiltonianOp, params: ModelParams,
                     psi0: float = -math.pi, recenter: bool = False,
                     phase: bool = True) -> dict:
    """All standard observables of one quantum state, as a flat dict of floats."""
    basis = state.basis
    rho_l = reduce_density(state, "photon-L")
    rho_r = reduce_density(state, "photon-R")
    spin_l = reduce_density(state, "spin-L")
    spin_r = reduce_density(state, "spin-R")
    spin_pair = reduce_density(state, "spin-pair")
    n = np.arange(basis.n_levels)
    n_l = float(np.real(np.diag(rho_l.matrix)) @ n)
    n_r = float(np.real(np.diag(rho_r.matrix)) @ n)
    sl, sr = spin_expectations(spin_l), spin_expectations(spin_r)
    out = {"n_L": n_l, "n_R": n_r, "Z_p": photon_imbalance(n_l, n_r),
           "Sz_L": sl[2], "Sz_R": sr[2], "Z_a": atomic_imbalance(sl[2], sr[2], quantum=True),
           "Sx_L": sl[0], "Sy_L": sl[1], "Sx_R": sr[0], "Sy_R": sr[1]}
    try:
        out["C_LR"] = spin_orientation_clr(spin_pair)
    except ValueError:
        out["C_LR"] = float("nan")
    out["S_L"] = entanglement_entropy(spin_l)
    out["S_R"] = entanglement_entropy(spin_r)
    out["S_LR"] = entanglement_entropy(spin_pair)
    out["MI"] = out["S_L"] + out["S_R"] - out["S_LR"]
    out["dS"] = out["S_L"] - out["S_R"]
    out["S_ph_L"] = entanglement_entropy(rho_l)
    out["S_ph_R"] = entanglement_entropy(rho_r)
    if phase:
        mean_l, _, var_l = phase_moments(phase_distribution(rho_l, psi0, recenter))
        mean_r, _, var_r = phase_moments(phase_distribution(rho_r, psi0, recenter))
        out["psi_L"], out["psi_R"] = mean_l, mean_r
        out["psi_r"] = math.remainder(mean_l - mean_r, 2.0 * math.pi)
        out["dpsi2_L"], out["dpsi2_R"] = var_l, var_r
    else:
        for key in ("psi_L", "psi_R", "psi_r", "dpsi2_L", "dpsi2_R"):
            out[key] = float("nan")
    m = params.excitations
    out["PE_L"], out["KE_L"], out["nvar_ratio_L"] = quadrature_energies(rho_l, m)
    out["PE_R"], out["KE_R"], out["nvar_ratio_R"] = quadrature_energies(rho_r, m)
    out["norm"] = state.norm
    out["M_expect"] = state.expect_diag(basis.excitations)
    out["energy"] = H.expectation(state.vector)
    return out


def run_quantum(params: ModelParams, state0, t_final: float, dt: float,
                n_max: int | None = None, method: str = "eigen",
                snapshot_times: Sequence[float] = (), psi0: float = -math.pi,
                recenter: bool = False, phase: bool = True, project_sector: bool = False,
                hamiltonian: HamiltonianOp | None = None):
    """Propagate the coherent product state of ``state0`` and record all channels.

    ``state0`` may be a :class:`SemiclassicalState`, a :class:`FixedPoint` or
    a ready :class:`QuantumState`.  Returns ``(series, snapshots)`` where
    ``snapshots`` maps each requested time (rounded to the grid) to the
    photon-L density matrix.  Without an explicit ``n_max`` the cutoff is
    the larger of :func:`~jcdimer.quantum.default_cutoff` and what the
    initial coherent state needs.
    """
    if n_max is None:
        n_max = default_cutoff(params.excitations)
        if not isinstance(state0, QuantumState):
            st = state0.state if isinstance(state0, FixedPoint) else state0
            n_max = max(n_max, coherent_cutoff(params.excitations * max(st.n_L, st.n_R)))
    n_max = int(n_max)
    if isinstance(state0, QuantumState):
        psi = state0
        basis = psi.basis
    else:
        basis = build_basis(n_max)
        psi = coherent_product_state(state0, basis, params, project_sector=project_sector)
    H = hamiltonian if hamiltonian is not None else build_hamiltonian(params, basis)
    times = time_grid(t_final, dt)
    snap_idx = {int(round(t / dt)): t for t in snapshot_times}
    rows, snaps = [], {}
    for k, st in enumerate(iter_evolve(psi, H, times, method=method)):
        rows.append(quantum_channels(st, H, params, psi0, recenter, phase))
        if k in snap_idx:
            snaps[float(times[k])] = reduce_density(st, "photon-L")
    channels = {key: np.array([r[key] for r in rows]) for key in QUANTUM_CHANNELS}
    meta = {"kind": "quantum", "n_max": n_max, "dimension": basis.dimension, "method": method}
    return TimeSeries(times, channels, meta), snaps


def run_quench(params: ModelParams, u_initial: float, u_final: float, t_final: float,
               dt: float, n_max: int | None = None, branch: str = "FP-pi",
               snapshot_times: Sequence[float] = (), recenter: bool = False, **kwargs):
    """Prepare the coherent state of ``branch`` at ``u_initial`` and evolve under ``u_final``."""
    pre = params.with_(u_scaled=u_initial)
    fp = sc.find_fixed_point(pre, branch)
    if not fp.stable:
        log.warning("pre-quench %s at U=%g is not stable", branch, u_initial)
    post = params.with_(u_scaled=u_final)
    series, snaps = run_quantum(post, fp.state, t_final, dt, n_max=n_max,
                                snapshot_times=snapshot_times, recenter=recenter, **kwargs)
    meta = dict(series.meta, u_initial=u_initial, u_final=u_final, branch=branch,
                constraint_residual=constraint_residual(fp.state, pre))
    return TimeSeries(series.times, series.channels, meta), snaps, fp
