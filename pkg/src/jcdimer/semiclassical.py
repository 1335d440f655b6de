"""
Semiclassical dynamics of the Jaynes-Cummings dimer.

The product coherent-state ansatz turns the model into a classical
Hamiltonian system with per-cavity energy (per excitation)

    (w - mu) n + (eta/2)(w0 - mu) z + (U/2) n^2 + g sqrt(n) sqrt(1 - z^2) cos(phi + psi)

plus the hopping term -2 sqrt(n_L n_R) cos(psi_L - psi_R).  Integration and
linearisation use photon quadratures (x, p) and a unit spin vector s, where
the flow is polynomial and regular at n = 0 and |z| = 1:

    dx/dt =  dH/dp,      dp/dt = -dH/dx,      ds/dt = (2/eta) grad_s(H) x s.

Steady states are found in two steps: a small-eta reduction to a single
root function of the population ratio f = n_R/n_L (used for seeding and
graphical analysis) and an exact Newton solve at finite eta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from .core import (BRANCH_SIGNS, BranchLabel, FixedPoint, ModelParams,
                   SemiclassicalState, TimeSeries, classical_energy,
                   constraint_residual)
from .errors import (ConvergenceError, DegenerateInputError, DomainError,
                     IntegrationError, NumericError, SingularJacobianError)

__all__ = [
    "RootScanConfig",
    "cartesian_rhs",
    "cartesian_jacobian",
    "eom_rhs",
    "integrate",
    "mu_small_eta",
    "y_function",
    "find_roots_y",
    "y_exact",
    "find_roots_exact",
    "atomic_inversion_star",
    "fixed_point_guess",
    "solve_steady_state_exact",
    "stability",
    "critical_lines",
    "steady_states",
    "find_fixed_point",
    "TOL_IMAG",
]

TOL_IMAG = 1e-7
TOL_ZERO_REL = 1e-6
SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# equations of motion
# ---------------------------------------------------------------------------

def cartesian_rhs(y, params: ModelParams):
    """Time derivative of the 10-component Cartesian state.

    ``y = (x_L, p_L, sx_L, sy_L, sz_L, x_R, p_R, sx_R, sy_R, sz_R)``.
    """
    c = params.omega - params.mu
    u = params.u_scaled
    a = params.g_scaled / SQRT2
    b = 0.5 * params.eta * (params.omega0 - params.mu)
    k = 2.0 / params.eta
    out = np.empty(10)
    for i, j in ((0, 5), (5, 0)):
        x, p, sx, sy, sz = y[i:i + 5]
        n = 0.5 * (x * x + p * p)
        w = c + u * n
        out[i] = w * p - a * sy - y[j + 1]
        out[i + 1] = -w * x - a * sx + y[j]
        # grad_s H = (a x, -a p, b)
        out[i + 2] = k * (-a * p * sz - b * sy)
        out[i + 3] = k * (b * sx - a * x * sz)
        out[i + 4] = k * (a * x * sy + a * p * sx)
    return out


def cartesian_jacobian(y, params: ModelParams) -> np.ndarray:
    """Analytic 10x10 Jacobian of :func:`cartesian_rhs`."""
    c = params.omega - params.mu
    u = params.u_scaled
    a = params.g_scaled / SQRT2
    b = 0.5 * params.eta * (params.omega0 - params.mu)
    k = 2.0 / params.eta
    jac = np.zeros((10, 10))
    for i, j in ((0, 5), (5, 0)):
        x, p, sx, sy, sz = y[i:i + 5]
        n = 0.5 * (x * x + p * p)
        w = c + u * n
        # dx/dt = w p - a sy - p_j
        jac[i, i] = u * x * p
        jac[i, i + 1] = w + u * p * p
        jac[i, i + 3] = -a
        jac[i, j + 1] = -1.0
        # dp/dt = -w x - a sx + x_j
        jac[i + 1, i] = -w - u * x * x
        jac[i + 1, i + 1] = -u * x * p
        jac[i + 1, i + 2] = -a
        jac[i + 1, j] = 1.0
        # spin rows
        jac[i + 2, i + 1] = -k * a * sz
        jac[i + 2, i + 3] = -k * b
        jac[i + 2, i + 4] = -k * a * p
        jac[i + 3, i] = -k * a * sz
        jac[i + 3, i + 2] = k * b
        jac[i + 3, i + 4] = -k * a * x
        jac[i + 4, i] = k * a * sy
        jac[i + 4, i + 1] = k * a * sx
        jac[i + 4, i + 2] = k * a * p
        jac[i + 4, i + 3] = k * a * x
    return jac


def eom_rhs(state: SemiclassicalState, params: ModelParams) -> np.ndarray:
    """Time derivatives of the eight state variables.

    Returned in the order of :meth:`SemiclassicalState.to_array`:
    (dx_L, dp_L, dz_L, dphi_L, dx_R, dp_R, dz_R, dphi_R).  The azimuth rate
    is undefined when the spin sits on a pole with a non-vanishing torque; it
    is reported as ``nan`` there.
    """
    y = state.to_cartesian()
    dy = cartesian_rhs(y, params)
    out = np.empty(8)
    for k in range(2):
        x, p, sx, sy, sz = y[5 * k:5 * k + 5]
        dx, dp, dsx, dsy, dsz = dy[5 * k:5 * k + 5]
        rho2 = sx * sx + sy * sy
        if rho2 > 0.0:
            dphi = (sx * dsy - sy * dsx) / rho2
        elif dsx == 0.0 and dsy == 0.0:
            dphi = params.omega0 - params.mu
        else:
            dphi = float("nan")
        out[4 * k:4 * k + 4] = (dx, dp, dsz, dphi)
    return out


def _channels_from_cartesian(ys: np.ndarray, params: ModelParams) -> dict:
    """Standard observables for an array of Cartesian states (rows)."""
    xL, pL, sxL, syL, szL, xR, pR, sxR, syR, szR = ys.T
    nL = 0.5 * (xL ** 2 + pL ** 2)
    nR = 0.5 * (xR ** 2 + pR ** 2)
    zL = szL / np.sqrt(sxL ** 2 + syL ** 2 + szL ** 2)
    zR = szR / np.sqrt(sxR ** 2 + syR ** 2 + szR ** 2)
    psiL = np.arctan2(pL, xL)
    psiR = np.arctan2(pR, xR)
    phiL = np.arctan2(syL, sxL)
    phiR = np.arctan2(syR, sxR)
    psi_r = np.angle(np.exp(1j * (psiL - psiR)))
    eta, mu = params.eta, params.mu
    energy = np.zeros_like(nL)
    for x, p, sx, sy, sz, n in ((xL, pL, sxL, syL, szL, nL), (xR, pR, sxR, syR, szR, nR)):
        energy += ((params.omega - mu) * n + 0.5 * eta * (params.omega0 - mu) * sz
                   + 0.5 * params.u_scaled * n * n
                   + params.g_scaled * (x * sx - p * sy) / SQRT2)
    energy -= xL * xR + pL * pR
    return {
        "x_L": xL, "p_L": pL, "x_R": xR, "p_R": pR,
        "n_L": nL, "n_R": nR, "z_L": zL, "z_R": zR,
        "psi_L": psiL, "psi_R": psiR, "phi_L": phiL, "phi_R": phiR,
        "Z_p": (nL - nR) / (nL + nR),
        "Z_a": 0.5 * np.abs(zR - zL),
        "psi_r": psi_r,
        "psi_r_unwrapped": np.unwrap(psiL - psiR),
        "residual": nL + nR + 0.5 * eta * (szL + szR + 2.0) - 1.0,
        "energy": energy,
    }


def integrate(state0: SemiclassicalState, params: ModelParams, t_final: float,
              sample_dt: float, tol: float = 1e-10, atol: float = 1e-12) -> TimeSeries:
    """Integrate the semiclassical flow and sample it on a uniform grid.

    Uses the adaptive 8th-order Dormand-Prince pair.  ``tol`` is the relative
    tolerance.  Raises :class:`IntegrationError` if the step size collapses.
    """
    if not t_final > 0 or not tol > 0 or not sample_dt > 0:
        raise DomainError("t_final, sample_dt and tol must be positive")
    n_samples = int(math.floor(t_final / sample_dt + 1e-9)) + 1
    t_eval = sample_dt * np.arange(n_samples)
    y0 = state0.to_cartesian()
    sol = solve_ivp(lambda t, y: cartesian_rhs(y, params), (0.0, t_eval[-1]), y0,
                    method="DOP853", t_eval=t_eval, rtol=tol, atol=atol)
    if sol.status < 0:
        last = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationError(sol.message, last)
    channels = _channels_from_cartesian(sol.y.T, params)
    return TimeSeries(sol.t, channels, {"kind": "classical", "tol": tol})


# ---------------------------------------------------------------------------
# small-eta steady-state analysis
# ---------------------------------------------------------------------------

def _check_f(f):
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise DomainError("population ratio f must be positive")
    return f


def mu_small_eta(f, params: ModelParams, branch: BranchLabel):
    """Chemical potential of a steady state with ratio ``f`` at small eta."""
    f = _check_f(f)
    sf = np.sqrt(f)
    mu = (params.omega - 0.5 * branch.xi1 * (sf + 1.0 / sf) + 0.5 * params.u_scaled
          + 0.25 * branch.xi2 * params.g_scaled * np.sqrt(1.0 + f) * (1.0 + 1.0 / sf))
    return float(mu) if mu.ndim == 0 else mu


def y_function(f, params: ModelParams, branch: BranchLabel):
    """Root function whose zeros in f are the small-eta steady states."""
    f = _check_f(f)
    eta, g, u = params.eta, params.g_scaled, params.u_scaled
    mu = mu_small_eta(f, params, branch)
    n_l = (1.0 - eta) / (1.0 + f)
    n_r = f * n_l
    det2 = (eta * (params.omega0 - mu)) ** 2
    F_l = det2 + 4.0 * g * g * n_l
    F_r = det2 + 4.0 * g * g * n_r
    sf = np.sqrt(f)
    y = (branch.xi1 * (f - 1.0) - u * (1.0 - eta) * ((1.0 - f) / (f + 1.0)) * sf
         - branch.xi2 * g * g * sf * (1.0 / np.sqrt(F_l) - 1.0 / np.sqrt(F_r)))
    # the symmetric root is exact
    y = np.where(f == 1.0, 0.0, y)
    return float(y) if y.ndim == 0 else y


@dataclass(frozen=True)
class RootScanConfig:
    """Grid scan settings for :func:`find_roots_y`."""

    f_min: float = 1e-6
    f_max: float = 1.0
    grid_points: int = 4000
    bisection_tol: float = 1e-12
    deflate_symmetric: bool = True

    def __post_init__(self):
        if not (0 < self.f_min < self.f_max <= 1):
            raise DomainError("need 0 < f_min < f_max <= 1")
        if self.grid_points < 100:
            raise DomainError("grid_points must be >= 100")

    def grid(self) -> np.ndarray:
        """Half log-spaced, half linear grid so both f ~ 0 and f ~ 1 are resolved."""
        half = self.grid_points // 2
        log_part = np.geomspace(self.f_min, self.f_max, half)
        lin_part = np.linspace(self.f_min, self.f_max, self.grid_points - half)
        return np.unique(np.concatenate([log_part, lin_part]))


def _bisect(func, a, b, fa, tol):
    for _ in range(200):
        if b - a <= tol:
            break
        m = 0.5 * (a + b)
        fm = func(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _scan_roots(func, cfg: RootScanConfig) -> list:
    grid = cfg.grid()
    if cfg.deflate_symmetric:
        grid = grid[grid < 1.0]
        vals = func(grid) / (grid - 1.0)
        scalar = lambda f: float(func(f)) / (f - 1.0)  # noqa: E731
    else:
        vals = func(grid)
        scalar = lambda f: float(func(f))  # noqa: E731
    roots = []
    for idx in range(grid.size - 1):
        a, b = grid[idx], grid[idx + 1]
        fa, fb = vals[idx], vals[idx + 1]
        if fa == 0.0:
            if a < 1.0:
                roots.append(float(a))
            continue
        if np.sign(fa) != np.sign(fb) and fb != 0.0:
            roots.append(float(_bisect(scalar, a, b, fa, cfg.bisection_tol)))
    if cfg.f_max == 1.0:
        roots.append(1.0)
    return sorted(set(roots))


def find_roots_y(params: ModelParams, branch: BranchLabel,
                 cfg: RootScanConfig = RootScanConfig()) -> list:
    """All roots of the small-eta root function on (f_min, f_max], ascending.

    Interior roots are bracketed by sign changes on the scan grid and refined
    by bisection; the exact symmetric root ``f = 1`` is always included.
    """
    return _scan_roots(lambda f: y_function(f, params, branch), cfg)


def _exact_populations(f, params: ModelParams, branch: BranchLabel, iterations=60):
    """Solve the excitation constraint and left-cavity stationarity at fixed f.

    Vectorised fixed-point iteration for (n_L, mu); every mu-dependence enters
    through eta^2 (w0 - mu)^2, so the map is a strong contraction.
    """
    f = np.asarray(f, dtype=float)
    eta, g, u = params.eta, params.g_scaled, params.u_scaled
    xi1, xi2 = branch.xi1, branch.xi2
    n_l = (1.0 - eta) / (1.0 + f)
    mu = params.omega + u * n_l + xi2 * 0.5 * g / np.sqrt(n_l) - xi1 * np.sqrt(f)
    for _ in range(iterations):
        det = eta * (params.omega0 - mu)
        F_l = det * det + 4.0 * g * g * n_l
        F_r = det * det + 4.0 * g * g * f * n_l
        z_sum = xi2 * det * (1.0 / np.sqrt(F_l) + 1.0 / np.sqrt(F_r))
        n_l = (1.0 - 0.5 * eta * (z_sum + 2.0)) / (1.0 + f)
        mu = params.omega + u * n_l + xi2 * g * g / np.sqrt(F_l) - xi1 * np.sqrt(f)
    return n_l, mu


def y_exact(f, params: ModelParams, branch: BranchLabel):
    """Finite-eta analogue of :func:`y_function`.

    Zero exactly when the populations implied by ``f`` satisfy both
    cavities' stationarity conditions at finite eta.  Scaled by sqrt(f) so it
    stays bounded as f -> 0; its sign changes bracket the exact steady states.
    """
    f = _check_f(f)
    eta, g, u = params.eta, params.g_scaled, params.u_scaled
    n_l, mu = _exact_populations(f, params, branch)
    n_r = f * n_l
    det2 = (eta * (params.omega0 - mu)) ** 2
    F_l = det2 + 4.0 * g * g * n_l
    F_r = det2 + 4.0 * g * g * n_r
    sf = np.sqrt(f)
    y = (sf * (u * (n_l - n_r) + branch.xi2 * g * g * (1.0 / np.sqrt(F_l) - 1.0 / np.sqrt(F_r)))
         - branch.xi1 * (f - 1.0))
    y = np.where(f == 1.0, 0.0, y)
    return float(y) if y.ndim == 0 else y


def find_roots_exact(params: ModelParams, branch: BranchLabel,
                     cfg: RootScanConfig = RootScanConfig()) -> list:
    """Roots of :func:`y_exact`; same scan/bisection strategy as :func:`find_roots_y`."""
    return _scan_roots(lambda f: y_exact(f, params, branch), cfg)


def atomic_inversion_star(n_star_i: float, mu: float, params: ModelParams, xi2: int) -> float:
    """Steady-state atomic inversion for photon population ``n_star_i``."""
    if n_star_i < 0:
        raise DomainError("n_star_i must be non-negative")
    num = params.eta * (params.omega0 - mu)
    den = math.sqrt(num * num + 4.0 * params.g_scaled ** 2 * n_star_i)
    if den == 0.0:
        raise DegenerateInputError("n_star_i = 0 with mu = omega0 leaves z* undefined")
    return xi2 * num / den


def critical_lines(params: ModelParams, eta: float | None = None) -> tuple:
    """Closed-form small-eta critical couplings ``(g_c1, g_c2, U_c1, U_c2)``.

    g_c1, g_c2 are evaluated at ``params.u_scaled``; U_c1, U_c2 at
    ``params.g_scaled``.  ``eta`` overrides ``params.eta`` (e.g. ``eta=0``).
    """
    eta = params.eta if eta is None else eta
    u, g = params.u_scaled, params.g_scaled
    g_c1 = 2.0 + 3.0 * ((1.0 + u) / 2.0) ** (4.0 / 3.0) * eta ** (2.0 / 3.0) - eta / 2.0
    g_c2 = (math.sqrt(8.0) + SQRT2 * u) - (3.0 / SQRT2 * u + SQRT2) * eta
    u_c1 = 2.0 + g / SQRT2 + (2.0 + 3.0 * g / (2.0 * SQRT2)) * eta
    u_c2 = 2.0 - g / SQRT2 + (2.0 - 3.0 * g / (2.0 * SQRT2)) * eta
    return g_c1, g_c2, u_c1, u_c2


# ---------------------------------------------------------------------------
# exact steady states
# ---------------------------------------------------------------------------
#
# Unknowns q = (u_L, u_R, v_L, w_L, v_R, w_R, mu) in the real gauge psi_L = 0:
# photon amplitudes x_i = sqrt(2) u_i (p_i = 0) and unit spins (v_i, 0, w_i).
# Then n_i = u_i^2, z_i = w_i, xi1 = sign(u_L u_R), xi2 = sign(u_i v_i).
# The residuals are the stationarity of p_i and s_i, |s_i| = 1 and the
# excitation constraint; none of them divides by sqrt(n) or sqrt(1 - z^2).

def _steady_residual(q, params: ModelParams) -> np.ndarray:
    uL, uR, vL, wL, vR, wR, mu = q
    c = params.omega - mu
    g, U, eta = params.g_scaled, params.u_scaled, params.eta
    b = 0.5 * eta * (params.omega0 - mu)
    return np.array([
        (c + U * uL * uL) * uL + 0.5 * g * vL - uR,
        (c + U * uR * uR) * uR + 0.5 * g * vR - uL,
        g * uL * wL - b * vL,
        g * uR * wR - b * vR,
        vL * vL + wL * wL - 1.0,
        vR * vR + wR * wR - 1.0,
        uL * uL + uR * uR + 0.5 * eta * (wL + wR + 2.0) - 1.0,
    ])


def _steady_jacobian(q, params: ModelParams) -> np.ndarray:
    uL, uR, vL, wL, vR, wR, mu = q
    c = params.omega - mu
    g, U, eta = params.g_scaled, params.u_scaled, params.eta
    b = 0.5 * eta * (params.omega0 - mu)
    jac = np.zeros((7, 7))
    jac[0] = [c + 3 * U * uL * uL, -1.0, 0.5 * g, 0, 0, 0, -uL]
    jac[1] = [-1.0, c + 3 * U * uR * uR, 0, 0, 0.5 * g, 0, -uR]
    jac[2] = [g * wL, 0, -b, g * uL, 0, 0, 0.5 * eta * vL]
    jac[3] = [0, g * wR, 0, 0, -b, g * uR, 0.5 * eta * vR]
    jac[4] = [0, 0, 2 * vL, 2 * wL, 0, 0, 0]
    jac[5] = [0, 0, 0, 0, 2 * vR, 2 * wR, 0]
    jac[6] = [2 * uL, 2 * uR, 0, 0.5 * eta, 0, 0.5 * eta, 0]
    return jac


def fixed_point_guess(f: float, params: ModelParams, branch: BranchLabel,
                      exact: bool = False) -> FixedPoint:
    """Approximate steady state from a root ``f`` (no stability).

    With ``exact=False`` the small-eta populations and chemical potential are
    used; with ``exact=True`` those implied by :func:`y_exact`.
    """
    eta = params.eta
    if exact:
        n_l, mu = (float(v) for v in _exact_populations(f, params, branch))
    else:
        mu = mu_small_eta(f, params, branch)
        n_l = (1.0 - eta) / (1.0 + f)
    n_r = f * n_l
    z_l = atomic_inversion_star(n_l, mu, params, branch.xi2)
    z_r = atomic_inversion_star(n_r, mu, params, branch.xi2)
    state = _state_from_unknowns(_unknowns_from_populations(
        (n_l, n_r), (z_l, z_r), mu, branch))
    return FixedPoint(branch=branch, f=f, n_star=(n_l, n_r), z_star=(z_l, z_r),
                      mu_star=mu, state=state)


def _unknowns_from_populations(n, z, mu, branch: BranchLabel) -> np.ndarray:
    uL = math.sqrt(max(n[0], 0.0))
    uR = branch.xi1 * math.sqrt(max(n[1], 0.0))
    vL = branch.xi2 * math.sqrt(max(0.0, 1.0 - z[0] ** 2))
    vR = branch.xi2 * branch.xi1 * math.sqrt(max(0.0, 1.0 - z[1] ** 2))
    return np.array([uL, uR, vL, z[0], vR, z[1], mu])


def _state_from_unknowns(q) -> SemiclassicalState:
    uL, uR, vL, wL, vR, wR, _ = q
    return SemiclassicalState.from_cartesian(
        [SQRT2 * uL, 0.0, vL, 0.0, wL, SQRT2 * uR, 0.0, vR, 0.0, wR])


def _newton(q, params, tol=1e-13, max_iter=100):
    res = _steady_residual(q, params)
    norm = np.linalg.norm(res)
    best = (norm, q)
    for _ in range(max_iter):
        if norm < tol:
            break
        jac = _steady_jacobian(q, params)
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobianError("steady-state Jacobian is singular") from exc
        if not np.all(np.isfinite(step)):
            raise SingularJacobianError("steady-state Jacobian is singular")
        lam = 1.0
        while lam > 1e-10:
            trial = q + lam * step
            trial_res = _steady_residual(trial, params)
            trial_norm = np.linalg.norm(trial_res)
            if trial_norm < norm or trial_norm < tol:
                break
            lam *= 0.5
        else:
            break
        q, res, norm = trial, trial_res, trial_norm
        if norm < best[0]:
            best = (norm, q)
    # a few extra full steps polish the root down to round-off
    q = best[1]
    for _ in range(3):
        res = _steady_residual(q, params)
        try:
            trial = q + np.linalg.solve(_steady_jacobian(q, params), -res)
        except np.linalg.LinAlgError:
            break
        if np.linalg.norm(_steady_residual(trial, params)) <= np.linalg.norm(res):
            q = trial
    return q, float(np.linalg.norm(_steady_residual(q, params)))


def solve_steady_state_exact(guess: FixedPoint, params: ModelParams,
                             branch: BranchLabel | None = None,
                             tol: float = 1e-12, max_iter: int = 100,
                             with_stability: bool = True) -> FixedPoint:
    """Solve the finite-eta steady-state equations by damped Newton iteration.

    Raises :class:`ConvergenceError` if the residual norm stays above ``tol``
    or if the iteration lands on a steady state with different phase signs.
    """
    branch = guess.branch if branch is None else branch
    q0 = _unknowns_from_populations(guess.n_star, guess.z_star, guess.mu_star, branch)
    q, resid = _newton(q0, params, max_iter=max_iter)
    if not np.all(np.isfinite(q)) or resid > tol:
        raise ConvergenceError(f"steady-state Newton failed for {branch}", resid)
    uL, uR, vL, wL, vR, wR, mu = q
    if abs(uR) > abs(uL):  # canonical orientation f <= 1
        q = np.array([uR, uL, vR, wR, vL, wL, mu])
        uL, uR, vL, wL, vR, wR, mu = q
    if uL < 0:  # global sign flip is the gauge rotation by pi
        q = q * np.array([-1, -1, -1, 1, -1, 1, 1])
        uL, uR, vL, wL, vR, wR, mu = q
    xi1 = 1 if uR * uL >= 0 else -1
    xi2_l = 1 if uL * vL >= 0 else -1
    xi2_r = 1 if uR * vR >= 0 else -1
    tiny = 1e-9
    if abs(uR) > tiny and (xi1, xi2_l) != (branch.xi1, branch.xi2):
        raise ConvergenceError(f"converged to a different phase class than {branch}", resid)
    if abs(uR) > tiny and abs(vR) > tiny and xi2_r != branch.xi2:
        raise ConvergenceError(f"inconsistent spin orientation for {branch}", resid)
    if xi2_l != branch.xi2:
        raise ConvergenceError(f"converged to a different phase class than {branch}", resid)
    n_l, n_r = uL * uL, uR * uR
    state = _state_from_unknowns(q)
    f = n_r / n_l
    if branch.is_symmetric and abs(f - 1.0) > 1e-6:
        raise ConvergenceError(f"symmetric guess for {branch} converged to f={f:.4g}", resid)
    fp = FixedPoint(branch=branch, f=f, n_star=(n_l, n_r), z_star=(wL, wR), mu_star=mu,
                    energy=classical_energy(state, params.with_(mu=mu)), state=state,
                    residual=resid)
    if with_stability:
        eig, stable, w0 = stability(fp, params)
        fp = replace(fp, eigenfrequencies=tuple(eig), stable=stable, omega0_min=w0)
    return fp


def _tangent_basis(y) -> np.ndarray:
    """Orthonormal 10x8 basis of the tangent space of R^4 x S^2 x S^2 at ``y``."""
    basis = np.zeros((10, 8))
    col = 0
    for k in range(2):
        base = 5 * k
        basis[base, col] = 1.0
        basis[base + 1, col + 1] = 1.0
        s = y[base + 2:base + 5] / np.linalg.norm(y[base + 2:base + 5])
        trial = np.array([1.0, 0.0, 0.0]) if abs(s[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e1 = trial - s * (s @ trial)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(s, e1)
        basis[base + 2:base + 5, col + 2] = e1
        basis[base + 2:base + 5, col + 3] = e2
        col += 4
    return basis


def linearization(fp: FixedPoint, params: ModelParams) -> np.ndarray:
    """8x8 linearised flow at ``fp`` in its co-rotating frame (mu = mu_star)."""
    frame = params.with_(mu=fp.mu_star)
    y = fp.state.to_cartesian()
    basis = _tangent_basis(y)
    return basis.T @ cartesian_jacobian(y, frame) @ basis


def stability(fp: FixedPoint, params: ModelParams, tol_imag: float = TOL_IMAG,
              tol_zero_rel: float = TOL_ZERO_REL) -> tuple:
    """Linear stability spectrum of a steady state.

    Returns ``(eigenfrequencies, stable, omega0_min)`` where the
    eigenfrequencies are lambda / i for the eigenvalues lambda of the 8x8
    linearisation.  Modes with ``|lambda| < tol_zero_rel * max|lambda|`` are
    the symmetry/conservation zero modes; they are excluded from the
    stability verdict and from ``omega0_min``, the smallest non-zero
    oscillation frequency.
    """
    jac = linearization(fp, params)
    try:
        lam = np.linalg.eigvals(jac)
    except np.linalg.LinAlgError as exc:
        raise NumericError("eigenvalue solver failed") from exc
    if not np.all(np.isfinite(lam)):
        raise NumericError("non-finite stability eigenvalues")
    order = np.lexsort((lam.real, lam.imag))
    lam = lam[order]
    scale = np.max(np.abs(lam)) if lam.size else 0.0
    physical = lam[np.abs(lam) >= tol_zero_rel * scale]
    stable = bool(np.all(np.abs(physical.real) < tol_imag))
    freqs = np.abs(physical.imag)
    freqs = freqs[freqs >= tol_zero_rel * scale]
    omega0_min = float(freqs.min()) if freqs.size else float("nan")
    return lam / 1j, stable, omega0_min


# ---------------------------------------------------------------------------
# convenience: all steady states of a class
# ---------------------------------------------------------------------------

def _interior_name(xi1, xi2, rank):
    if (xi1, xi2) == (1, 1):
        return "PST" if rank == 0 else "ST_u"
    if (xi1, xi2) == (-1, 1):
        return "ST1"
    if (xi1, xi2) == (-1, -1):
        return "ST2"
    return None


def steady_states(params: ModelParams, xi1: int, xi2: int,
                  cfg: RootScanConfig = RootScanConfig(), with_stability=True,
                  errors: list | None = None, seeding: str = "exact") -> list:
    """Exact steady states of the (xi1, xi2) class.

    Newton seeds come from the roots of :func:`y_exact` (``seeding="exact"``)
    or of the small-eta :func:`y_function` (``seeding="small_eta"``).  The
    small-eta seeds miss the exact states in a thin strip next to folds
    whose position shifts at finite eta.

    Returns FixedPoints sorted by descending ``f`` (symmetric state first).
    Roots whose Newton solve fails are skipped and, if ``errors`` is given,
    the exception is appended to it.
    """
    sym = BranchLabel.symmetric(xi1, xi2)
    exact = seeding == "exact"
    if seeding not in ("exact", "small_eta"):
        raise DomainError(f"unknown seeding {seeding!r}")
    roots = (find_roots_exact if exact else find_roots_y)(params, sym, cfg)
    interior = [f for f in roots if f < 1.0]
    out = []
    labels = [(1.0, sym)]
    for rank, f in enumerate(interior):
        name = _interior_name(xi1, xi2, rank)
        if name is not None:
            labels.append((f, BranchLabel.from_name(name)))
    for f, label in labels:
        try:
            guess = fixed_point_guess(f, params, label, exact=exact)
            fp = solve_steady_state_exact(guess, params, label, with_stability=with_stability)
        except (ConvergenceError, SingularJacobianError, DegenerateInputError,
                NumericError) as exc:
            if errors is not None:
                errors.append(exc)
            continue
        if any(abs(fp.f - other.f) < 1e-8 and fp.branch.xi1 == other.branch.xi1
               for other in out):
            continue
        out.append(fp)
    out.sort(key=lambda fp: -fp.f)
    return out


def find_fixed_point(params: ModelParams, name: str | BranchLabel,
                     cfg: RootScanConfig = RootScanConfig()) -> FixedPoint:
    """The exact steady state with the given branch name.

    For families with several interior roots the one closest to the
    reference ordering is taken (PST: smallest f, ST_u: next, ST1/ST2: the
    largest interior f, i.e. the one born at the pitchfork).
    """
    label = name if isinstance(name, BranchLabel) else BranchLabel.from_name(name)
    xi1, xi2 = BRANCH_SIGNS[label.name]
    found = [fp for fp in steady_states(params, xi1, xi2, cfg) if fp.branch.name == label.name]
    if not found:
        raise ConvergenceError(f"no steady state {label} at g={params.g_scaled}, "
                               f"U={params.u_scaled}", float("nan"))
    if label.name == "PST":
        return min(found, key=lambda fp: fp.f)
    return max(found, key=lambda fp: fp.f)
