"""Phase-space and counting observables of the reduced states.

Phase statistics use the canonical phase distribution built from the
density-matrix coherences,

    P(theta) = (1/2pi) sum_{m,n} rho_{mn} e^{i(m-n) theta},

windowed +-pi around the circular-mean phase arg(sum_m rho_{m+1,m}) so
that frequency drift rotates the window instead of faking a collapse.
The variance is the second moment about the window center; for any
diagonal (phase-less) state it is pi^2/3 exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.integrate import simpson

from .errors import CutoffError
from .fock import DensityMatrix, JointPureState, coherent_column, reduce_to_atoms

HUSIMI_BOUND = 1.0 / math.pi


@dataclass(frozen=True)
class HusimiGrid:
    """Sampled Husimi field Q(re + i*im) on a uniform rectangular grid."""

    re_axis: np.ndarray
    im_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.im_axis.size, self.re_axis.size):
            raise ValueError("values must have shape (len(im_axis), len(re_axis))")
        if float(self.values.min()) < -1e-12:
            raise ValueError("Husimi values must be non-negative")
        if float(self.values.max()) > HUSIMI_BOUND + 1e-12:
            raise ValueError("Husimi values must not exceed 1/pi")

    def integral(self) -> float:
        """Grid integral of Q over the covered window."""
        inner = simpson(self.values, x=self.re_axis, axis=1)
        return float(simpson(inner, x=self.im_axis))

    def peak_count(self, rel_threshold: float = 0.2, size: int = 5) -> int:
        """Number of distinct local maxima above rel_threshold * max(Q)."""
        vals = self.values
        local_max = vals == ndimage.maximum_filter(vals, size=size, mode="nearest")
        mask = local_max & (vals >= rel_threshold * vals.max())
        _, count = ndimage.label(mask)
        return int(count)


def husimi_grid(
    rho: DensityMatrix,
    radius: float,
    n_points: int = 201,
    center: complex = 0.0,
) -> HusimiGrid:
    """Husimi function Q(alpha) = <alpha|rho|alpha> / pi on a square grid.

    Raises CutoffError when rho occupies its own truncation boundary
    (population > 1e-9 in the top Fock level), since Q would then be
    missing weight the matrix cannot represent.
    """
    if radius <= 0 or n_points < 2:
        raise ValueError("radius must be > 0 and n_points >= 2")
    top = float(np.real(rho.matrix[-1, -1]))
    if top > 1e-9:
        raise CutoffError(
            f"top Fock level holds population {top:.3e}; increase the state cutoff"
        )
    re_axis = np.linspace(center.real - radius, center.real + radius, n_points)
    im_axis = np.linspace(center.imag - radius, center.imag + radius, n_points)
    alphas = re_axis[None, :] + 1j * im_axis[:, None]
    flat = alphas.ravel()
    # <n|alpha> columns built by the stable recursion c_n = c_{n-1} alpha/sqrt(n)
    cols = np.empty((flat.size, rho.n_max + 1), dtype=complex)
    cols[:, 0] = np.exp(-0.5 * np.abs(flat) ** 2)
    for n in range(1, rho.n_max + 1):
        cols[:, n] = cols[:, n - 1] * flat / math.sqrt(n)
    q = np.real(np.einsum("gm,mn,gn->g", cols.conj(), rho.matrix, cols)) / math.pi
    q = np.clip(q, 0.0, HUSIMI_BOUND)
    return HusimiGrid(re_axis, im_axis, q.reshape(alphas.shape))


@dataclass(frozen=True)
class PhaseDistribution:
    """Canonical phase distribution sampled on a periodic 2 pi window."""

    thetas: np.ndarray
    probs: np.ndarray
    window_center: float

    def __post_init__(self):
        if self.thetas.shape != self.probs.shape or self.thetas.ndim != 1:
            raise ValueError("thetas and probs must be matching 1-d arrays")
        if float(self.probs.min()) < -1e-12:
            raise ValueError("phase distribution must be non-negative")


def _coherence_sums(rho: np.ndarray) -> np.ndarray:
    """d_s = sum_m rho[m+s, m] for s = 0..n_max (d_0 is the trace)."""
    n = rho.shape[0]
    return np.array([np.trace(rho, offset=-s) for s in range(n)])


def circular_mean_phase(rho: DensityMatrix) -> float:
    """arg(sum_m rho_{m+1,m}); zero when the state carries no first coherence."""
    d1 = complex(np.trace(rho.matrix, offset=-1))
    return float(np.angle(d1)) if abs(d1) > 0 else 0.0


def phase_distribution(rho: DensityMatrix, n_theta: int = 512) -> PhaseDistribution:
    """Sample P(theta) on n_theta periodic points centered at the circular mean.

    n_theta must be even and >= 256 so the Riemann sum of the underlying
    trigonometric polynomial is exact and Simpson integration applies.
    """
    if n_theta < 256 or n_theta % 2:
        raise ValueError("n_theta must be even and >= 256")
    center = circular_mean_phase(rho)
    thetas = center - math.pi + 2 * math.pi * np.arange(n_theta) / n_theta
    m = np.arange(rho.n_max + 1)
    # P(theta) = |column(theta)|^2-type quadratic form, evaluated directly
    phases = np.exp(1j * np.outer(thetas, m))
    probs = np.real(np.einsum("tm,mn,tn->t", phases, rho.matrix, phases.conj()))
    probs = np.clip(probs / (2 * math.pi), 0.0, None)
    return PhaseDistribution(thetas, probs, center)


def phase_variance(dist: PhaseDistribution) -> float:
    """Second moment of the distribution about its window center (Simpson).

    Exact (to roundoff) for the uniform distribution, where it equals
    pi^2/3; agrees with ``phase_variance_exact`` to integration accuracy.
    """
    theta = np.append(dist.thetas, dist.thetas[0] + 2 * math.pi)
    p = np.append(dist.probs, dist.probs[0])
    u = theta - dist.window_center
    return float(simpson(u * u * p, x=theta))


def phase_variance_exact(rho: DensityMatrix) -> float:
    """Closed-form window variance from the coherence sums d_s.

    V = pi^2/3 + 4 sum_{s>=1} (-1)^s Re(d_s e^{i s c}) / s^2 with c the
    circular-mean phase; used as the fast path in time sweeps.
    """
    d = _coherence_sums(rho.matrix)
    c = float(np.angle(d[1])) if d.size > 1 and abs(d[1]) > 0 else 0.0
    s = np.arange(1, d.size)
    if s.size == 0:
        return math.pi**2 / 3
    terms = ((-1.0) ** s) * np.real(d[1:] * np.exp(1j * s * c)) / (s * s)
    return float(math.pi**2 / 3 + 4.0 * np.sum(terms))


def purity(rho: DensityMatrix) -> float:
    """tr(rho^2), in [1/dim, 1]."""
    return float(np.real(np.sum(rho.matrix * rho.matrix.conj().T)))


def number_moments(rho: DensityMatrix, r_max: int) -> list[float]:
    """Raw occupation moments [<n>, <n^2>, ..., <n^r_max>]."""
    if r_max < 1:
        raise ValueError("r_max must be >= 1")
    diag = rho.diagonal()
    n = np.arange(diag.size, dtype=float)
    return [float(np.sum(diag * n**r)) for r in range(1, r_max + 1)]


def mandel_q(rho: DensityMatrix) -> float:
    """Mandel parameter (<n^2> - <n>^2) / <n> - 1; -1 Fock, 0 coherent."""
    n1, n2 = number_moments(rho, 2)
    if n1 <= 0:
        raise ValueError("Mandel Q undefined for vacuum (zero mean occupation)")
    return (n2 - n1 * n1) / n1 - 1.0


def cat_overlaps(state: JointPureState, alpha0: complex) -> tuple[float, float]:
    """Squared overlaps of the atomic marginal with even/odd cat states.

    The cats are the normalized |alpha0> +- |-alpha0| superpositions,
    truncated at the state's own cutoff and renormalized there.
    """
    rho = reduce_to_atoms(state)
    plus = coherent_column(alpha0, rho.n_max)
    minus = coherent_column(-alpha0, rho.n_max)
    out = []
    for sign in (+1.0, -1.0):
        cat = plus + sign * minus
        nrm = np.linalg.norm(cat)
        if nrm < 1e-150:
            out.append(0.0)
            continue
        cat = cat / nrm
        out.append(float(np.real(cat.conj() @ rho.matrix @ cat)))
    return out[0], out[1]
