"""Truncated Fock-space substrate for the bipartite atom-light system.

States live in a number basis |0..n_max> for the atomic mode, while the
light mode is carried symbolically as coherent-state labels attached to
each atomic Fock component.  Everything here is dense complex numpy;
amplitudes are evaluated in log-domain so cutoffs up to several hundred
stay overflow-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import CutoffError

#: truncation budget used by every tail check
EPS_TRUNC = 1e-12


def default_cutoff(alpha: complex) -> int:
    """Fock cutoff holding a coherent state of amplitude alpha to < 1e-12 tail."""
    a = abs(alpha)
    return max(2, math.ceil(a * a + 10.0 * a + 10.0))


def coherent_column(beta: complex, cutoff: int) -> np.ndarray:
    """Number-basis column <n|beta> for n = 0..cutoff (log-domain evaluation)."""
    n = np.arange(cutoff + 1)
    if beta == 0:
        col = np.zeros(cutoff + 1, dtype=complex)
        col[0] = 1.0
        return col
    mag = np.exp(-0.5 * abs(beta) ** 2 + n * math.log(abs(beta)) - 0.5 * gammaln(n + 1))
    return mag * np.exp(1j * n * np.angle(beta))


@dataclass(frozen=True)
class FockVector:
    """Pure atomic state sum_m C_m |m> truncated at n_max = len(amplitudes) - 1."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 2:
            raise ValueError("amplitudes must be a 1-d array with n_max >= 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_max(self) -> int:
        return self.amplitudes.size - 1

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class DensityMatrix:
    """Dense density matrix over the truncated number basis."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("matrix must be square")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def n_max(self) -> int:
        return self.matrix.shape[0] - 1

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).copy()

    @classmethod
    def from_pure(cls, state: FockVector) -> "DensityMatrix":
        return cls(np.outer(state.amplitudes, state.amplitudes.conj()))

    def validate(self, check_psd: bool = True) -> None:
        """Assert hermiticity (1e-12), unit trace (1e-10) and positivity (-1e-10)."""
        mat = self.matrix
        herm = np.max(np.abs(mat - mat.conj().T))
        if herm > 1e-12:
            raise ValueError(f"not Hermitian: max deviation {herm:.3e}")
        if abs(self.trace - 1.0) > 1e-10:
            raise ValueError(f"trace {self.trace!r} deviates from 1")
        if check_psd:
            lo = float(np.linalg.eigvalsh(mat)[0])
            if lo < -1e-10:
                raise ValueError(f"not positive semidefinite: min eigenvalue {lo:.3e}")


@dataclass(frozen=True)
class JointPureState:
    """Entangled-coherent expansion sum_m w_m |m> (x) |amp_m>.

    ``weights[m]`` already includes the dynamical prefactor, so the state norm
    is sum |w_m|^2 (the coherent labels are normalized).
    """

    weights: np.ndarray
    probe_amps: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex)
        b = np.asarray(self.probe_amps, dtype=complex)
        if w.shape != b.shape or w.ndim != 1:
            raise ValueError("weights and probe_amps must be matching 1-d arrays")
        norm = float(np.sum(np.abs(w) ** 2))
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond 1e-10")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "probe_amps", b)

    @property
    def n_max(self) -> int:
        return self.weights.size - 1


@dataclass(frozen=True)
class JointDensity:
    """Coherent-labeled joint density sum_mn coeffs[m,n] |m><n| (x) |amp_m><amp_n|."""

    coeffs: np.ndarray
    probe_amps: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        b = np.asarray(self.probe_amps, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or b.shape != (c.shape[0],):
            raise ValueError("coeffs must be square and probe_amps match its size")
        herm = np.max(np.abs(c - c.conj().T))
        if herm > 1e-10:
            raise ValueError(f"coefficient matrix not Hermitian: {herm:.3e}")
        tr = float(np.real(np.trace(c)))
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"trace {tr!r} deviates from 1 beyond 1e-10")
        c.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "probe_amps", b)

    @property
    def n_max(self) -> int:
        return self.coeffs.shape[0] - 1

    @classmethod
    def from_pure(cls, state: JointPureState) -> "JointDensity":
        return cls(np.outer(state.weights, state.weights.conj()), state.probe_amps)


def coherent_amplitudes(alpha: complex, n_max: int | None = None) -> FockVector:
    """Truncated Glauber-state amplitudes C_m = e^{-|a|^2/2} a^m / sqrt(m!).

    Raises CutoffError if the truncated tail mass exceeds 1e-12 at the
    requested n_max; with n_max=None a sufficient cutoff is chosen.
    """
    if n_max is None:
        n_max = default_cutoff(alpha)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    amps = coherent_column(alpha, n_max)
    tail = 1.0 - float(np.sum(np.abs(amps) ** 2))
    if tail > EPS_TRUNC:
        raise CutoffError(
            f"n_max={n_max} leaves tail mass {tail:.3e} > {EPS_TRUNC:g} "
            f"for |alpha|^2={abs(alpha)**2:.3g}"
        )
    return FockVector(amps)


def fock_amplitudes(n: int, n_max: int | None = None) -> FockVector:
    """Number state |n> as a FockVector."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n_max is None:
        n_max = max(n, 1)
    if n > n_max:
        raise CutoffError(f"n={n} exceeds n_max={n_max}")
    amps = np.zeros(n_max + 1, dtype=complex)
    amps[n] = 1.0
    return FockVector(amps)


def binomial_mixture(n_total: int, n_max: int | None = None) -> DensityMatrix:
    """Diagonal mixture with binomial weights P_m = C(n_total, m) / 2^n_total.

    This is the one-mode marginal of a symmetric two-mode state of n_total
    atoms; its mean occupation is n_total / 2.
    """
    if n_total < 0:
        raise ValueError("n_total must be >= 0")
    if n_max is None:
        n_max = max(n_total, 1)
    if n_max < n_total:
        raise CutoffError(f"n_max={n_max} cannot hold binomial weights up to {n_total}")
    m = np.arange(n_total + 1)
    logw = gammaln(n_total + 1) - gammaln(m + 1) - gammaln(n_total - m + 1) \
        - n_total * math.log(2.0)
    diag = np.zeros(n_max + 1)
    diag[: n_total + 1] = np.exp(logw)
    return DensityMatrix(np.diag(diag.astype(complex)))


def coherent_overlap(b1: complex | np.ndarray, b2: complex | np.ndarray):
    """Coherent-state overlap <b1|b2> = exp(-|b1|^2/2 - |b2|^2/2 + conj(b1) b2)."""
    b1 = np.asarray(b1, dtype=complex)
    b2 = np.asarray(b2, dtype=complex)
    out = np.exp(-0.5 * np.abs(b1) ** 2 - 0.5 * np.abs(b2) ** 2 + np.conj(b1) * b2)
    return complex(out) if out.ndim == 0 else out


def _label_overlap_matrix(amps: np.ndarray) -> np.ndarray:
    """Matrix O[m, n] = <amp_n|amp_m>, the light-trace kernel."""
    return np.exp(
        -0.5 * np.abs(amps[:, None]) ** 2
        - 0.5 * np.abs(amps[None, :]) ** 2
        + np.conj(amps[None, :]) * amps[:, None]
    )


def reduce_to_atoms(state: JointPureState | JointDensity) -> DensityMatrix:
    """Trace out the light mode: (rho_A)_{mn} = c_{mn} <amp_n|amp_m>."""
    if isinstance(state, JointPureState):
        coeffs = np.outer(state.weights, state.weights.conj())
        amps = state.probe_amps
    else:
        coeffs = state.coeffs
        amps = state.probe_amps
    return DensityMatrix(coeffs * _label_overlap_matrix(amps))


def reduce_to_light(
    state: JointPureState | JointDensity, photon_cutoff: int
) -> DensityMatrix:
    """Trace out the atoms: rho_L = sum_m p_m |amp_m><amp_m| in the photon basis.

    Atomic orthogonality kills all m != n cross terms, so the light marginal
    is always a proper mixture of the coherent components.  Raises
    CutoffError when any component leaves > 1e-12 tail above photon_cutoff.
    """
    if isinstance(state, JointPureState):
        pops = np.abs(state.weights) ** 2
        amps = state.probe_amps
    else:
        pops = np.real(np.diag(state.coeffs))
        amps = state.probe_amps
    cols = np.stack([coherent_column(b, photon_cutoff) for b in amps])
    tails = 1.0 - np.sum(np.abs(cols) ** 2, axis=1)
    worst = float(np.max(tails[pops > EPS_TRUNC], initial=0.0))
    if worst > EPS_TRUNC:
        raise CutoffError(
            f"photon_cutoff={photon_cutoff} leaves tail {worst:.3e} > {EPS_TRUNC:g}"
        )
    rho = np.einsum("m,mp,mq->pq", pops.astype(complex), cols, cols.conj())
    return DensityMatrix(rho)
