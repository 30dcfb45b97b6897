"""Continuous photodetection of the probe field.

With the detector on, the no-count evolution of each atomic sector m is
the same driven-oscillator problem as the unitary case but with complex
frequency, encoded by

    Gamma_m = i xi m + gamma/2          (sector decay rate)
    G_m     = conj(g1) g2_tilde m / (delta Gamma_m)
    Lambda_m = beta + i G_m

so the damped probe amplitude is Lambda_m e^{-Gamma_m t} - i G_m.  The
count kernel

    F_{mn}(t) = gamma * integral_0^t amp_m(s) conj(amp_n(s)) ds

drives everything: P(k,t) is a Poisson mixture over F_{mm}, the k-count
conditioned state multiplies coherences by F_{mn}^k, and the
count-averaged (pre-selected) state exponentiates it.  The no-count
phase exponent obeys 2 Re Phi_m = -F_{mm} identically, which keeps the
decomposition sum_k P(k,t) rho_k(t) exactly trace-one.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .dynamics import ModelParams
from .errors import DegenerateStateError, RegimeWarning, ZeroProbabilityError
from .fock import DensityMatrix, JointDensity

#: asymptotic-regime defaults: gamma t >= 50 and gamma^2 >= 100 xi^2 <n^2>
ASYMPTOTIC_MIN_GAMMA_T = 50.0
ASYMPTOTIC_MIN_SEPARATION = 100.0


@dataclass(frozen=True)
class DetectionParams:
    """Detector counting rate attached to the coherent model parameters."""

    model: ModelParams
    gamma: float

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0 (use the unitary path for gamma = 0)")

    def decay_rates(self, m) -> np.ndarray:
        """Gamma_m = i xi m + gamma / 2."""
        return 1j * self.model.xi * np.asarray(m) + self.gamma / 2.0

    def drive_offsets(self, m) -> np.ndarray:
        """G_m = conj(g1) g2_tilde m / (delta Gamma_m)."""
        m = np.asarray(m)
        return (
            np.conj(self.model.g1)
            * self.model.g2_tilde
            * m
            / (self.model.delta * self.decay_rates(m))
        )


def damped_probe_amplitude(det: DetectionParams, beta: complex, m, t: float):
    """Probe amplitude under counting, Lambda_m e^{-Gamma_m t} - i G_m.

    Converges to the unitary amplitude as gamma -> 0+ and to the driven
    steady state -i G_m as t -> infinity.
    """
    gam = det.decay_rates(m)
    g = det.drive_offsets(m)
    out = (beta + 1j * g) * np.exp(-gam * t) - 1j * g
    out = np.asarray(out)
    return complex(out) if out.ndim == 0 else out


def count_integral(det: DetectionParams, beta: complex, m, n, t: float):
    """Count kernel F_{mn}(t) = gamma int_0^t amp_m conj(amp_n) ds, closed form.

    F_{mm} is real, non-negative and non-decreasing in t: it is the mean
    number of counts accumulated from sector m.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    gam_m = det.decay_rates(m)
    gam_n = det.decay_rates(n)
    g_m = det.drive_offsets(m)
    g_n = det.drive_offsets(n)
    lam_m = beta + 1j * g_m
    lam_n = beta + 1j * g_n
    f_m = np.expm1(-gam_m * t)
    f_n = np.expm1(-gam_n * t)
    g = det.gamma
    out = g * (
        -(lam_m * np.conj(lam_n))
        / (gam_m + np.conj(gam_n))
        * np.expm1(-(gam_m + np.conj(gam_n)) * t)
        + g_m * np.conj(g_n) * t
    )
    out = out + 1j * g * (
        g_m * np.conj(lam_n) * np.conj(f_n) / np.conj(gam_n)
        - np.conj(g_n) * lam_m * f_m / gam_m
    )
    out = np.asarray(out)
    return complex(out) if out.ndim == 0 else out


def damped_phase_exponent(det: DetectionParams, beta: complex, m, t: float):
    """No-count scalar log-prefactor of sector m.

    Phi_m = (|amp_m|^2 - |beta|^2)/2
            + i (conj(Gamma_m)/Gamma_m) conj(G_m) Lambda_m f_m(t)
            - |G_m|^2 conj(Gamma_m) t
            - i [omega_a m + kappa m(m-1)] t,      f_m = e^{-Gamma_m t} - 1.

    The middle term is grouped as conj(Gamma)/Gamma * conj(G) * Lambda
    (equal to G Lambda for real g1 conj(g2_tilde)); this grouping is the
    one that satisfies 2 Re Phi_m = -F_{mm} for arbitrary complex
    couplings and recovers the unitary exponent as gamma -> 0.
    """
    m_arr = np.asarray(m)
    gam = det.decay_rates(m_arr)
    g = det.drive_offsets(m_arr)
    lam = beta + 1j * g
    f = np.expm1(-gam * t)
    amp = lam * np.exp(-gam * t) - 1j * g
    pm = det.model
    out = (
        0.5 * (np.abs(amp) ** 2 - abs(beta) ** 2)
        + 1j * (np.conj(gam) / gam) * np.conj(g) * lam * f
        - np.abs(g) ** 2 * np.conj(gam) * t
        - 1j * (pm.omega_a * m_arr + pm.kappa * m_arr * (m_arr - 1)) * t
    )
    out = np.asarray(out)
    return complex(out) if out.ndim == 0 else out


def _diag_and_check(rho0: DensityMatrix) -> np.ndarray:
    diag = rho0.diagonal()
    if diag.min() < -1e-12:
        raise ValueError("initial state has negative populations")
    return np.clip(diag, 0.0, None)


def count_probability(
    rho0: DensityMatrix, beta: complex, det: DetectionParams, k: int, t: float
) -> float:
    """P(k,t): Poisson mixture (1/k!) sum_m rho_mm F_mm^k e^{-F_mm}.

    Exactly normalized over k for any parameter values, since each
    sector contributes a complete Poisson distribution.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    diag = _diag_and_check(rho0)
    m = np.arange(diag.size)
    f = np.real(count_integral(det, beta, m, m, t))
    f = np.clip(f, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        logpmf = k * np.log(f) - f - gammaln(k + 1)
    pmf = np.where(f > 0, np.exp(logpmf), 1.0 if k == 0 else 0.0)
    return float(np.sum(diag * pmf))


def _conditioned_coeffs(
    rho0: DensityMatrix, beta: complex, det: DetectionParams, k: int, t: float
) -> tuple[np.ndarray, np.ndarray]:
    """Normalized coefficient matrix and damped amplitudes for the k-count state.

    Works in log-domain: coefficient exponents are shifted by the
    log-sum-exp of the diagonal, so the trace is exactly one and large
    F values cannot overflow.
    """
    mat = rho0.matrix
    m = np.arange(mat.shape[0])
    fmat = count_integral(det, beta, m[:, None], m[None, :], t)
    phi = damped_phase_exponent(det, beta, m, t)
    expo = phi[:, None] + np.conj(phi)[None, :]
    if k > 0:
        absf = np.abs(fmat)
        if float(absf.max()) == 0.0:
            raise ZeroProbabilityError(f"P({k},{t}) is zero: no counts possible yet")
        with np.errstate(divide="ignore"):
            logf = np.log(np.where(absf > 0, absf, 1.0))
        logf = np.where(absf > 0, logf, -np.inf)
        expo = expo + k * (logf + 1j * np.angle(fmat))
    diag_expo = np.real(np.diag(expo))
    diag_w = np.real(np.diag(mat))
    finite = np.isfinite(diag_expo) & (diag_w > 0)
    if not np.any(finite):
        raise ZeroProbabilityError(f"P({k},{t}) underflowed to zero")
    shift = float(np.max(diag_expo[finite] + np.log(diag_w[finite])))
    if shift == -math.inf or shift < math.log(1e-300):
        raise ZeroProbabilityError(f"P({k},{t}) < 1e-300: refusing to condition")
    with np.errstate(invalid="ignore"):
        coeffs = mat * np.exp(np.where(np.isfinite(expo), expo - shift, -np.inf))
    coeffs = np.where(np.isfinite(coeffs), coeffs, 0.0)
    coeffs = coeffs / np.real(np.trace(coeffs))
    amps = damped_probe_amplitude(det, beta, m, t)
    return coeffs, amps


def conditioned_state(
    rho0: DensityMatrix, beta: complex, det: DetectionParams, k: int, t: float
) -> JointDensity:
    """Joint state given exactly k counts in [0, t].

    Coefficients rho_mn F_mn^k e^{Phi_m + conj(Phi_n)} / (P(k,t) k!) with
    damped coherent labels.  Raises ZeroProbabilityError when P(k,t)
    underflows (e.g. k >= 1 at t = 0).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    coeffs, amps = _conditioned_coeffs(rho0, beta, det, k, t)
    coeffs = 0.5 * (coeffs + coeffs.conj().T)
    return JointDensity(coeffs, amps)


def unconditioned_state(
    rho0: DensityMatrix, beta: complex, det: DetectionParams, t: float
) -> JointDensity:
    """Count-averaged (pre-selected) state sum_k P(k,t) rho_k(t).

    Coefficients rho_mn e^{Phi_m + conj(Phi_n) + F_mn}; equivalent to
    evolving the joint system under an amplitude-damping channel on the
    probe, which the Lindblad oracle checks independently.
    """
    mat = rho0.matrix
    m = np.arange(mat.shape[0])
    fmat = count_integral(det, beta, m[:, None], m[None, :], t)
    phi = damped_phase_exponent(det, beta, m, t)
    coeffs = mat * np.exp(phi[:, None] + np.conj(phi)[None, :] + fmat)
    tr = float(np.real(np.trace(coeffs)))
    coeffs = 0.5 * (coeffs + coeffs.conj().T) / tr
    return JointDensity(coeffs, damped_probe_amplitude(det, beta, m, t))


def nonzero_count_state(
    rho0: DensityMatrix, beta: complex, det: DetectionParams, t: float
) -> JointDensity:
    """State given at least one count: [rho(t) - P(0,t) rho_0(t)] / (1 - P(0,t))."""
    p0 = count_probability(rho0, beta, det, 0, t)
    if 1.0 - p0 < 1e-12:
        raise DegenerateStateError(
            f"P(0,{t}) = {p0!r}: the any-count branch has no probability mass"
        )
    full = unconditioned_state(rho0, beta, det, t)
    none = conditioned_state(rho0, beta, det, 0, t)
    coeffs = (full.coeffs - p0 * none.coeffs) / (1.0 - p0)
    return JointDensity(coeffs, full.probe_amps)


def _stirling2_row(r: int) -> np.ndarray:
    """Stirling numbers of the second kind S(r, j), j = 0..r."""
    row = np.zeros(r + 1)
    row[0] = 1.0
    for _ in range(r):
        new = np.zeros_like(row)
        for j in range(1, len(row)):
            new[j] = row[j - 1] + j * row[j]
        row = new
    return row


def count_moment(
    rho0: DensityMatrix, beta: complex, det: DetectionParams, r: int, t: float
) -> float:
    """r-th raw moment sum_k k^r P(k,t) via Poisson moment identities.

    Each sector contributes the Touchard polynomial
    sum_j S(r,j) F_mm^j, avoiding explicit (cancellation-prone) k sums.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    diag = _diag_and_check(rho0)
    m = np.arange(diag.size)
    f = np.clip(np.real(count_integral(det, beta, m, m, t)), 0.0, None)
    srow = _stirling2_row(r)
    powers = f[None, :] ** np.arange(r + 1)[:, None]
    touchard = srow @ powers
    return float(np.sum(diag * touchard))


def rescaled_count_moment(
    rho0: DensityMatrix, beta: complex, det: DetectionParams, r: int, t: float
) -> float:
    """Asymptotic-rescaled moment k~^r = k^r / [(gamma t)^r |2 g1 g2t/(gamma delta)|^{2r}].

    In the regime gamma t >> 1, gamma^2 >> xi^2 <n^2> this estimates the
    even occupation moment <n^{2r}> of the initial atomic state; a
    RegimeWarning is attached when the pinned thresholds (gamma t >= 50,
    separation factor >= 100) are not met.
    """
    pm = det.model
    scale = abs(2.0 * pm.g1 * pm.g2_tilde / (det.gamma * pm.delta)) ** 2
    if scale == 0:
        raise ValueError("rescaling undefined for g1 * g2_tilde = 0")
    n2 = float(np.sum(_diag_and_check(rho0) * np.arange(rho0.n_max + 1) ** 2))
    if det.gamma * t < ASYMPTOTIC_MIN_GAMMA_T:
        warnings.warn(
            f"gamma t = {det.gamma * t:.3g} < {ASYMPTOTIC_MIN_GAMMA_T:g}: "
            "rescaled moment may be biased",
            RegimeWarning,
            stacklevel=2,
        )
    separation = det.gamma**2 / (pm.xi**2 * n2) if n2 > 0 else math.inf
    if separation < ASYMPTOTIC_MIN_SEPARATION:
        warnings.warn(
            f"separation factor {separation:.3g} < {ASYMPTOTIC_MIN_SEPARATION:g}: "
            "rescaled moment may be biased",
            RegimeWarning,
            stacklevel=2,
        )
    return count_moment(rho0, beta, det, r, t) / ((det.gamma * t) ** r * scale**r)


def mandel_q_from_counts(k_tilde: float, n_mean: float) -> float:
    """Infer the atomic Mandel Q from the rescaled first moment:
    Q = (k~ - n_mean^2)/n_mean - 1."""
    if n_mean <= 0:
        raise ValueError("n_mean must be > 0")
    return (k_tilde - n_mean * n_mean) / n_mean - 1.0


def ssr_verdict(k_tilde: float, n_mean: float) -> str:
    """Classify the inferred statistics against the number superselection rule.

    Sub-Poissonian (Q < 0) is compatible with number-conserving states;
    k~ >= n_mean (n_mean + 1) is a strong indication of an SSR-violating
    (phase-bearing) state.
    """
    if k_tilde >= n_mean * (n_mean + 1.0):
        return "Poissonian-or-super/SSR-violation-indicated"
    return "sub-Poissonian/SSR-compatible"
