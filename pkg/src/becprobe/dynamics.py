"""Closed-form unitary evolution of the atom-probe system.

The effective Hamiltonian (hbar = 1) is

    H = omega_a n_c + kappa n_c (n_c - 1)
        + n_c (F a + conj(F) a^dag) + xi n_c a^dag a,

with n_c the atom number, a the probe mode, xi = |g1|^2 / delta the
cross-Kerr rate and F = g1 conj(g2_tilde) / delta the pump-scattering
drive.  Atom number is conserved, so each Fock sector m sees a driven
harmonic oscillator; an initial product |psi(0)> = sum_m C_m |m> (x) |beta>
evolves into an entangled-coherent expansion with per-sector coherent
amplitudes and scalar prefactors, both in closed form.

The prefactor exponent is evaluated from the normal-ordered propagator of
the driven oscillator (see ``driven_oscillator_coefficients``); its net
m-linear phase is -i omega0 m t because the drive's secular term cancels
the pump Stark shift exactly.  Sector-wise unitarity makes Re(exponent)
vanish identically, which is what keeps the expansion normalized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import DensityMatrix, FockVector, JointDensity, JointPureState


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the reduced single-mode model.

    kappa     -- atomic collision rate (>= 0)
    delta     -- pump detuning (nonzero)
    g1        -- probe coupling (complex)
    g2_tilde  -- pumped coupling g2 * alpha_2 (complex)
    omega0    -- trap ground-state frequency
    """

    kappa: float
    delta: float
    g1: complex = 0.0
    g2_tilde: complex = 0.0
    omega0: float = 0.0

    def __post_init__(self):
        if self.delta == 0:
            raise ValueError("delta must be nonzero")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if not (np.isfinite(self.xi) and np.isfinite(abs(self.drive))):
            raise ValueError("derived couplings must be finite")

    @property
    def xi(self) -> float:
        """Cross-Kerr rate |g1|^2 / delta."""
        return abs(self.g1) ** 2 / self.delta

    @property
    def drive(self) -> complex:
        """Drive coefficient F = g1 conj(g2_tilde) / delta."""
        return self.g1 * np.conj(self.g2_tilde) / self.delta

    @property
    def omega_a(self) -> float:
        """Stark-shifted atomic frequency omega0 + |g2_tilde|^2 / delta."""
        return self.omega0 + abs(self.g2_tilde) ** 2 / self.delta

    @property
    def kerr_ratio(self) -> float:
        """Commensurability parameter |g1|^2 / (kappa delta); requires kappa > 0."""
        if self.kappa == 0:
            raise ValueError("kerr_ratio undefined for kappa = 0")
        return self.xi / self.kappa


def _check_drive_ratio(params: ModelParams) -> complex:
    """Ratio g2_tilde / g1, rejecting the undefined g1 = 0, g2_tilde != 0 case."""
    if params.g1 == 0:
        if params.g2_tilde != 0:
            raise ValueError("g1 = 0 with g2_tilde != 0: drive ratio undefined")
        return 0.0 + 0.0j
    return params.g2_tilde / params.g1


def probe_amplitude(params: ModelParams, beta: complex, m, t: float):
    """Coherent amplitude of the probe conditioned on atom number m.

    amp_m(t) = beta e^{-i xi m t} + (g2_tilde / g1)(e^{-i xi m t} - 1);
    m may be an integer or an integer array.  For m = 0 this returns beta
    exactly at all times, and at t = 2 pi / xi the initial beta for every m.
    """
    ratio = _check_drive_ratio(params)
    m = np.asarray(m)
    phase = np.exp(-1j * params.xi * m * t)
    out = beta * phase + ratio * (phase - 1.0)
    return complex(out) if out.ndim == 0 else out


def phase_exponent(params: ModelParams, beta: complex, m, t: float):
    """Scalar log-prefactor of the |m> component of the evolved state.

    Combines the driven-oscillator prefactor with the collision and trap
    phases; its real part vanishes identically (sector-wise unitarity).
    Only the bare omega0 rotation survives in the m-linear phase: the
    pump Stark shift inside omega_a is cancelled by the secular part of
    the drive term.
    """
    ratio = _check_drive_ratio(params)
    m = np.asarray(m)
    amp = probe_amplitude(params, beta, m, t)
    out = (
        0.5 * (np.abs(amp) ** 2 - abs(beta) ** 2)
        + np.conj(ratio) * (amp - beta)
        - 1j * (params.omega0 * m + params.kappa * m * (m - 1)) * t
    )
    return complex(out) if out.ndim == 0 else out


def evolve_pure(
    state: FockVector, beta: complex, params: ModelParams, t: float
) -> JointPureState:
    """Exact evolved state of C (x) |beta> as an entangled-coherent expansion."""
    m = np.arange(state.n_max + 1)
    weights = state.amplitudes * np.exp(phase_exponent(params, beta, m, t))
    return JointPureState(weights, probe_amplitude(params, beta, m, t))


def evolve_density(
    rho: DensityMatrix, beta: complex, params: ModelParams, t: float
) -> JointDensity:
    """Exact evolved joint density for an arbitrary initial atomic mixture.

    Coefficients are rho_{mn} e^{Phi_m + conj(Phi_n)}; a diagonal input
    stays diagonal, so incoherent mixtures keep their atomic marginal.
    """
    m = np.arange(rho.n_max + 1)
    phi = phase_exponent(params, beta, m, t)
    coeffs = rho.matrix * np.exp(phi[:, None] + np.conj(phi)[None, :])
    return JointDensity(coeffs, probe_amplitude(params, beta, m, t))


@dataclass(frozen=True)
class OscillatorCoefficients:
    """Normal-ordered propagator exponents of a driven harmonic oscillator.

    The propagator matrix element <beta|U|beta> equals exp(a + b beta +
    c conj(beta) + d conj(beta) beta); all four vanish at t = 0 and
    |1 + d| = 1 for real oscillator frequency.
    """

    a: complex
    b: complex
    c: complex
    d: complex


# below this |xi_m * t| the closed forms lose digits to cancellation
_SERIES_THRESHOLD = 1e-6


def driven_oscillator_coefficients(
    xi_m: float, drive_m: complex, t: float
) -> OscillatorCoefficients:
    """Solve i d'/dt = xi_m (d+1), i b'/dt = F (d+1), i c'/dt = xi_m c + conj(F),
    i a'/dt = F c for the oscillator H = xi_m n + F a + conj(F) a^dag.

    Closed forms: d = e^{-i xi t} - 1, b = (F/xi) d, c = (conj(F)/xi) d,
    a = (|F|^2/xi^2) d + i (|F|^2/xi) t, with a series branch for
    |xi t| < 1e-6 to avoid catastrophic cancellation (the xi -> 0 limit
    is d = 0, b = -i F t, c = -i conj(F) t, a = -|F|^2 t^2 / 2).
    """
    x = xi_m * t
    d = complex(np.expm1(-1j * x))
    if abs(x) < _SERIES_THRESHOLD:
        # (e^{-ix} - 1)/xi = -i t (1 - ix/2 - x^2/6 + ...)
        ramp = -1j * t * (1.0 - 0.5j * x - x * x / 6.0)
        # (e^{-ix} - 1 + ix)/xi^2 = -t^2/2 (1 - ix/3 - x^2/12 + ...)
        curv = -0.5 * t * t * (1.0 - 1j * x / 3.0 - x * x / 12.0)
    else:
        ramp = d / xi_m
        curv = (d + 1j * x) / (xi_m * xi_m)
    b = drive_m * ramp
    c = np.conj(drive_m) * ramp
    a = abs(drive_m) ** 2 * curv
    return OscillatorCoefficients(a=a, b=b, c=c, d=d)


def apply_propagator(
    coeffs: OscillatorCoefficients, beta: complex
) -> tuple[complex, complex]:
    """Act the driven-oscillator propagator on |beta>.

    Returns (prefactor, new_amp) with new_amp = (1 + d) beta + c and
    prefactor = exp(a + b beta - |beta|^2/2 + |new_amp|^2/2), i.e.
    U|beta> = prefactor |new_amp>.  Evaluated with xi_m = xi m and
    drive_m = F m this reproduces the probe amplitude and the phase
    exponent up to the commuting e^{-i[omega_a m + kappa m(m-1)]t} factor.
    """
    new_amp = (1.0 + coeffs.d) * beta + coeffs.c
    prefactor = np.exp(
        coeffs.a + coeffs.b * beta - 0.5 * abs(beta) ** 2 + 0.5 * abs(new_amp) ** 2
    )
    return complex(prefactor), complex(new_amp)
