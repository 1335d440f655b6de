"""
Independent reference implementations used only by the tests.

These follow the textbook formulas directly (polar equations of motion,
brute-force root scans, dense matrix exponentials, displaced-parity Wigner
functions) and share no code with the library beyond plain data types.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm
from scipy.special import factorial


def polar_rhs(n, psi, z, phi, p):
    """Time derivatives (n, psi, z, phi) per cavity from the polar equations of motion."""
    g, u, eta, mu = p.g_scaled, p.u_scaled, p.eta, p.mu
    out = []
    for i, j in ((0, 1), (1, 0)):
        s = math.sqrt(1.0 - z[i] ** 2)
        a = phi[i] + psi[i]
        dn = (-g * math.sqrt(n[i]) * s * math.sin(a)
              + 2.0 * math.sqrt(n[i] * n[j]) * math.sin(psi[i] - psi[j]))
        dpsi = (-(p.omega - mu) - g / (2.0 * math.sqrt(n[i])) * s * math.cos(a)
                + math.sqrt(n[j] / n[i]) * math.cos(psi[i] - psi[j]) - u * n[i])
        dphi = (eta * (p.omega0 - mu) - 2.0 * g * z[i] / s * math.sqrt(n[i]) * math.cos(a)) / eta
        dz = 2.0 * g * math.sqrt(n[i]) * s * math.sin(a) / eta
        out.append((dn, dpsi, dz, dphi))
    return out


def brute_force_roots(func, f_min=1e-6, points=200_000, tol=1e-13):
    """All sign changes of ``func`` on a dense linear+log grid, refined by bisection."""
    grid = np.unique(np.concatenate([np.geomspace(f_min, 1.0, points // 2),
                                     np.linspace(f_min, 1.0, points // 2)]))
    grid = grid[grid < 1.0 - 1e-9]
    vals = func(grid)
    roots = []
    for k in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        a, b = grid[k], grid[k + 1]
        fa = vals[k]
        while b - a > tol:
            m = 0.5 * (a + b)
            fm = func(np.array([m]))[0]
            if np.sign(fm) == np.sign(fa):
                a, fa = m, fm
            else:
                b = m
        roots.append(0.5 * (a + b))
    return roots


def dense_hamiltonian(p, n_max):
    """Dense Hamiltonian of the dimer from explicit operator Kronecker products.

    Ordering of tensor factors: photon L, spin L, photon R, spin R, with
    spin index 1 the excited state.
    """
    N = n_max + 1
    a = np.diag(np.sqrt(np.arange(1, N)), 1)
    num = a.T @ a
    sp = np.array([[0.0, 0.0], [1.0, 0.0]])    # |1><0| raises the atom
    sz = np.diag([-0.5, 0.5])
    I_N, I_2 = np.eye(N), np.eye(2)

    def kron(*ops):
        out = ops[0]
        for op in ops[1:]:
            out = np.kron(out, op)
        return out

    M = p.excitations
    g, U = p.g_physical, p.u_physical
    H = np.zeros((4 * N * N,) * 2)
    for side in (0, 1):
        def place(ph, spin):
            return kron(ph, spin, I_N, I_2) if side == 0 else kron(I_N, I_2, ph, spin)
        H += p.omega * place(num, I_2) + p.omega0 * place(I_N, sz + 0.5 * I_2)
        H += 0.5 * U * place(num @ (num - I_N), I_2)
        H += g * (place(a, sp) + place(a.T, sp.T))
    H -= kron(a.T, I_2, a, I_2) + kron(a, I_2, a.T, I_2)
    total = kron(num, I_2, I_N, I_2) + kron(I_N, I_2, num, I_2) \
        + kron(I_N, sz + 0.5 * I_2, I_N, I_2) + kron(I_N, I_2, I_N, sz + 0.5 * I_2)
    H -= p.mu * total
    return H


def dense_propagate(H, psi0, t):
    return expm(-1j * H * t) @ psi0


def displaced_parity_wigner(rho, alphas):
    """W(alpha) = (2/pi) Tr[rho D(alpha) P D(alpha)^dag] with D from a dense expm
    on an enlarged Fock space."""
    N = rho.shape[0]
    big = N + 40
    a = np.diag(np.sqrt(np.arange(1, big)), 1)
    parity = np.diag((-1.0) ** np.arange(big))
    rho_big = np.zeros((big, big), dtype=complex)
    rho_big[:N, :N] = rho
    out = []
    for al in alphas:
        D = expm(al * a.T - np.conj(al) * a)
        out.append(2.0 / math.pi * np.trace(rho_big @ D @ parity @ D.conj().T).real)
    return np.array(out)


def direct_husimi(rho, alphas):
    """Q(alpha) = <alpha|rho|alpha>/pi with coherent amplitudes from plain factorials."""
    N = rho.shape[0]
    n = np.arange(N)
    out = []
    for al in alphas:
        c = np.exp(-abs(al) ** 2 / 2) * al ** n / np.sqrt(factorial(n))
        out.append((c.conj() @ rho @ c).real / math.pi)
    return np.array(out)


def eigen_entropy(rho):
    lam = np.linalg.eigvalsh(rho)
    lam = lam[lam > 1e-14]
    return float(-(lam * np.log(lam)).sum())
