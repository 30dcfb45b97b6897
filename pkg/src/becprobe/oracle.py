"""Brute-force verifier on the truncated joint Hilbert space.

Everything here deliberately avoids the closed-form results: states are
propagated by eigendecomposition of the full Hamiltonian, open-system
evolution by fixed-step RK4 of the Lindblad equation, and counting
probabilities by nested quadrature of the jump expansion.  Atom number
commutes with the Hamiltonian, so all propagation is done per atomic
sector (each sector is a driven oscillator on the photon space), which
turns dim^3 costs into (atoms) x (photons)^3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .dynamics import ModelParams
from .fock import DensityMatrix, FockVector, JointPureState, coherent_column

MAX_DIM = 4096


@dataclass(frozen=True)
class TruncatedSpace:
    """Joint truncation: atoms 0..n_atoms_max, photons 0..n_photons_max."""

    n_atoms_max: int
    n_photons_max: int

    def __post_init__(self):
        if self.n_atoms_max < 1 or self.n_photons_max < 1:
            raise ValueError("both cutoffs must be >= 1")
        if self.dim > MAX_DIM:
            raise ValueError(f"dim {self.dim} exceeds the desk-scale guard {MAX_DIM}")

    @property
    def block(self) -> int:
        return self.n_photons_max + 1

    @property
    def dim(self) -> int:
        return (self.n_atoms_max + 1) * self.block


def _photon_ops(space: TruncatedSpace) -> tuple[np.ndarray, np.ndarray]:
    """(a, n) on the photon factor."""
    p = space.block
    a = np.zeros((p, p), dtype=complex)
    idx = np.arange(1, p)
    a[idx - 1, idx] = np.sqrt(idx)
    return a, np.diag(np.arange(p, dtype=complex))


def sector_hamiltonians(params: ModelParams, space: TruncatedSpace) -> np.ndarray:
    """Stacked light-mode Hamiltonians H_m, one per atomic sector."""
    a, nph = _photon_ops(space)
    adag = a.conj().T
    blocks = np.zeros((space.n_atoms_max + 1, space.block, space.block), dtype=complex)
    drive = params.drive
    for m in range(space.n_atoms_max + 1):
        scalar = params.omega_a * m + params.kappa * m * (m - 1)
        blocks[m] = (
            scalar * np.eye(space.block)
            + m * (drive * a + np.conj(drive) * adag)
            + params.xi * m * nph
        )
    return blocks


def build_hamiltonian(params: ModelParams, space: TruncatedSpace) -> np.ndarray:
    """Dense joint Hamiltonian; Hermitian and block diagonal in atom number."""
    h = np.zeros((space.dim, space.dim), dtype=complex)
    for m, hm in enumerate(sector_hamiltonians(params, space)):
        sl = slice(m * space.block, (m + 1) * space.block)
        h[sl, sl] = hm
    return h


def _check_hermitian(h: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(h))))
    if float(np.max(np.abs(h - h.conj().T))) > 1e-12 * scale:
        raise ValueError("Hamiltonian is not Hermitian")


def _extract_blocks(h: np.ndarray, space: TruncatedSpace) -> np.ndarray:
    """Split a block-diagonal joint operator into stacked sector blocks."""
    b = space.block
    n_sec = space.n_atoms_max + 1
    blocks = np.empty((n_sec, b, b), dtype=complex)
    leak = 0.0
    for m in range(n_sec):
        sl = slice(m * b, (m + 1) * b)
        blocks[m] = h[sl, sl]
        row = np.abs(h[sl, :]).sum() - np.abs(h[sl, sl]).sum()
        leak = max(leak, float(row))
    if leak > 1e-12 * max(1.0, float(np.max(np.abs(h)))):
        raise ValueError("operator mixes atom-number sectors")
    return blocks


def propagate(
    psi0: np.ndarray, h: np.ndarray, t: float, space: TruncatedSpace | None = None
) -> np.ndarray:
    """e^{-i h t} psi0 via Hermitian eigendecomposition.

    With a TruncatedSpace given, diagonalization runs per atomic sector,
    exploiting exact atom-number conservation.
    """
    _check_hermitian(h)
    psi0 = np.asarray(psi0, dtype=complex)
    if space is None:
        w, v = np.linalg.eigh(h)
        return v @ (np.exp(-1j * w * t) * (v.conj().T @ psi0))
    out = np.empty_like(psi0)
    b = space.block
    for m in range(space.n_atoms_max + 1):
        sl = slice(m * b, (m + 1) * b)
        w, v = np.linalg.eigh(h[sl, sl])
        out[sl] = v @ (np.exp(-1j * w * t) * (v.conj().T @ psi0[sl]))
    return out


def _lindblad_rhs(blocks, rho, hb, gamma, sqrt_outer, nvec):
    """Stacked-block RHS of drho/dt = -i[H,rho] + gamma D[a]rho."""
    hr = np.einsum("mij,mnjk->mnik", hb, rho)
    rh = np.einsum("mnij,njk->mnik", rho, hb)
    out = -1j * (hr - rh)
    jump = np.zeros_like(rho)
    jump[..., :-1, :-1] = rho[..., 1:, 1:] * sqrt_outer
    out += gamma * (jump - 0.5 * (nvec[:, None] * rho + rho * nvec[None, :]))
    return out


def lindblad_evolve(
    rho0: np.ndarray,
    h: np.ndarray,
    space: TruncatedSpace,
    gamma: float,
    t: float,
    dt: float,
) -> np.ndarray:
    """Fixed-step RK4 integration of the photon amplitude-damping master equation.

    Rejects step sizes above 0.01 / max(gamma, spectral scale), with the
    spectral scale estimated from the largest Hamiltonian diagonal.
    The step count is rounded up so the integration lands exactly on t.
    """
    _check_hermitian(h)
    scale = max(gamma, float(np.max(np.abs(np.diag(h)))), 1e-30)
    if dt > 0.01 / scale:
        raise ValueError(f"dt={dt:g} violates dt <= 0.01/{scale:g}")
    if t < 0:
        raise ValueError("t must be >= 0")
    hb = _extract_blocks(h, space)
    b = space.block
    n_sec = space.n_atoms_max + 1
    rho = (
        np.asarray(rho0, dtype=complex)
        .reshape(n_sec, b, n_sec, b)
        .transpose(0, 2, 1, 3)
        .copy()
    )
    idx = np.arange(1, b, dtype=float)
    sqrt_outer = np.sqrt(np.outer(idx, idx))
    nvec = np.arange(b, dtype=float)
    n_steps = max(1, math.ceil(t / dt))
    step = t / n_steps
    for _ in range(n_steps):
        k1 = _lindblad_rhs(None, rho, hb, gamma, sqrt_outer, nvec)
        k2 = _lindblad_rhs(None, rho + 0.5 * step * k1, hb, gamma, sqrt_outer, nvec)
        k3 = _lindblad_rhs(None, rho + 0.5 * step * k2, hb, gamma, sqrt_outer, nvec)
        k4 = _lindblad_rhs(None, rho + step * k3, hb, gamma, sqrt_outer, nvec)
        rho += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rho.transpose(0, 2, 1, 3).reshape(space.dim, space.dim)


def counting_operation(
    rho0: np.ndarray,
    h: np.ndarray,
    space: TruncatedSpace,
    gamma: float,
    k: int,
    t: float,
    n_steps: int = 400,
) -> np.ndarray:
    """Nested-quadrature evaluation of the k-count operation N_t(k) rho0.

    Composite-trapezoid integration of
    S_{t-t_k} J ... J S_{t_1} rho with J rho = gamma a rho a^dag and
    S_t rho = e^{Yt} rho e^{Y^dag t}, Y = -iH - (gamma/2) a^dag a.
    Returns the unnormalized joint density whose trace is P(k,t); only
    k <= 2 is supported (the integral depth grows with k).
    """
    if k not in (0, 1, 2):
        raise ValueError("counting_operation supports k in {0, 1, 2} only")
    if n_steps < 2:
        raise ValueError("n_steps must be >= 2")
    _check_hermitian(h)
    rho0 = np.asarray(rho0, dtype=complex)
    evals, evecs = np.linalg.eigh(0.5 * (rho0 + rho0.conj().T))
    out = np.zeros((space.dim, space.dim), dtype=complex)
    for weight, vec in zip(evals[::-1], evecs.T[::-1]):
        if weight < 1e-14:
            break
        out += weight * _counting_pure(vec, h, space, gamma, k, t, n_steps)
    return out


def _sector_split(vec: np.ndarray, space: TruncatedSpace) -> np.ndarray:
    return vec.reshape(space.n_atoms_max + 1, space.block)


def _apply_jump(vecs: np.ndarray, sqrt_idx: np.ndarray) -> np.ndarray:
    """Photon annihilation on sector-stacked vectors (no gamma factor)."""
    out = np.zeros_like(vecs)
    out[..., :-1] = vecs[..., 1:] * sqrt_idx
    return out


def _counting_pure(psi0, h, space, gamma, k, t, n_steps):
    hb = _extract_blocks(h, space)
    b = space.block
    nvec = np.arange(b)
    y_blocks = -1j * hb - 0.5 * gamma * np.diag(nvec.astype(complex))[None, :, :]
    delta = t / n_steps
    e_step = np.stack([expm(y * delta) for y in y_blocks])
    sqrt_idx = np.sqrt(np.arange(1, b, dtype=float))

    def march(vs):
        return np.einsum("mij,mj->mi", e_step, vs)

    # no-jump trajectory on the grid
    a_traj = np.empty((n_steps + 1, y_blocks.shape[0], b), dtype=complex)
    a_traj[0] = _sector_split(psi0, space)
    for j in range(n_steps):
        a_traj[j + 1] = march(a_traj[j])
    if k == 0:
        v = a_traj[-1].ravel()
        return np.outer(v, v.conj())

    w = np.full(n_steps + 1, delta)
    w[0] = w[-1] = 0.5 * delta

    if k == 1:
        out = np.zeros((space.dim, space.dim), dtype=complex)
        for j in range(n_steps + 1):
            v = _apply_jump(a_traj[j], sqrt_idx)
            for _ in range(n_steps - j):
                v = march(v)
            flat = v.ravel()
            out += (gamma * w[j]) * np.outer(flat, flat.conj())
        return out

    # k = 2: chi(j, l) = R_l a E^{l-j} a A_j with R_l = e^{Y (t - s_l)},
    # accumulated with the triangular trapezoid weights
    r_to_end = [None] * (n_steps + 1)
    r_to_end[n_steps] = np.stack([np.eye(b, dtype=complex)] * y_blocks.shape[0])
    for l in range(n_steps - 1, -1, -1):
        r_to_end[l] = np.einsum("mij,mjk->mik", r_to_end[l + 1], e_step)
    out = np.zeros((space.dim, space.dim), dtype=complex)
    for j in range(n_steps + 1):
        g = _apply_jump(a_traj[j], sqrt_idx)
        for l in range(j, n_steps + 1):
            if l > j:
                g = march(g)
            wl = w[l] if l > 0 else 0.0
            inner_w = w[j] if j < l else (0.5 * delta if l > 0 else 0.0)
            if j == l:
                inner_w = 0.5 * delta
            if l == 0:
                continue
            chi = np.einsum(
                "mij,mj->mi", r_to_end[l], _apply_jump(g, sqrt_idx)
            ).ravel()
            out += (gamma**2 * wl * inner_w) * np.outer(chi, chi.conj())
    return out


def joint_product_vector(
    atoms: FockVector, beta: complex, space: TruncatedSpace
) -> np.ndarray:
    """|C> (x) |beta> as a joint vector (atoms must fit the atom cutoff)."""
    if atoms.n_max != space.n_atoms_max:
        raise ValueError("atomic cutoff must match the space")
    return np.kron(atoms.amplitudes, coherent_column(beta, space.n_photons_max))


def joint_product_density(
    rho_a: DensityMatrix, beta: complex, space: TruncatedSpace
) -> np.ndarray:
    """rho_A (x) |beta><beta| as a joint density matrix."""
    if rho_a.n_max != space.n_atoms_max:
        raise ValueError("atomic cutoff must match the space")
    col = coherent_column(beta, space.n_photons_max)
    return np.kron(rho_a.matrix, np.outer(col, col.conj()))


def analytic_joint_vector(state: JointPureState, space: TruncatedSpace) -> np.ndarray:
    """Embed an entangled-coherent expansion into the truncated joint space."""
    if state.n_max != space.n_atoms_max:
        raise ValueError("atomic cutoff must match the space")
    rows = np.stack(
        [w * coherent_column(b, space.n_photons_max)
         for w, b in zip(state.weights, state.probe_amps)]
    )
    return rows.ravel()


def atomic_marginal(rho_joint: np.ndarray, space: TruncatedSpace) -> np.ndarray:
    """Partial trace over the photon factor."""
    n_sec = space.n_atoms_max + 1
    return np.einsum(
        "mpnp->mn", rho_joint.reshape(n_sec, space.block, n_sec, space.block)
    )


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """(1/2) sum |eig(rho1 - rho2)| for Hermitian arguments."""
    diff = rho1 - rho2
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))
