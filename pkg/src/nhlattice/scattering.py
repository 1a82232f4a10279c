"""Closed-form scattering theory of the side-coupled and folded chains.

Scattering states at energy eps_k = -2*kappa*cos(k) are controlled by

    eta(k) = 2i*kappa*sin(k) * (i*gamma + 2*kappa*cos(k)) + g**2,

whose zeros are the spectral singularities: k_c = pi/2 together with
gamma_c = sigma * g^2 / (2*kappa), sigma = +1 for gain and -1 for loss.
There r = -g^2/eta and t = r + 1 diverge.  The folded chain sees the same
singularity through r(gamma) = (2*kappa*gamma + g^2)/(2*kappa*gamma - g^2)
at k = pi/2, with R(-gamma) = 1/R(gamma).

Amplitudes with |eta| below EPS_DIV_FACTOR * g^2 are flagged divergent
instead of being returned as overflow-scale floats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import LatticeSpec

EPS_DIV_FACTOR = 1e-10


def _check_k(k: float) -> None:
    if not 0.0 < k < np.pi:
        raise ValueError(f"wave vector k must lie in (0, pi), got {k}")


@dataclass(frozen=True)
class ScatteringSolution:
    k: float
    energy: float
    eta: complex
    r: complex | None
    t: complex | None
    divergent: bool
    c_overlap: complex | None = None


@dataclass(frozen=True)
class SingularityPoint:
    k_c: float
    gamma_c: float
    sigma: int


@dataclass(frozen=True)
class BiorthOverlap:
    value: complex
    collapsed: bool


def eta(k: float, spec: LatticeSpec) -> complex:
    """2i*kappa*sin(k)*(i*gamma + 2*kappa*cos(k)) + g^2 for k in (0, pi)."""
    _check_k(k)
    return (2j * spec.kappa * np.sin(k) * (1j * spec.gamma + 2.0 * spec.kappa * np.cos(k))
            + spec.g ** 2)


def reflection_transmission(k: float, spec: LatticeSpec) -> ScatteringSolution:
    """Reflection r = -g^2/eta and transmission t = r + 1 of the side-coupled chain."""
    _check_k(k)
    e = eta(k, spec)
    energy = -2.0 * spec.kappa * np.cos(k)
    eps_div = EPS_DIV_FACTOR * spec.g ** 2
    if abs(e) < eps_div:
        return ScatteringSolution(k=k, energy=energy, eta=e, r=None, t=None,
                                  divergent=True)
    r = -spec.g ** 2 / e
    return ScatteringSolution(k=k, energy=energy, eta=e, r=r, t=r + 1.0,
                              divergent=False)


def folded_reflection(gamma: float, g: float, kappa: float = 1.0) -> complex:
    """k = pi/2 reflection amplitude of the folded chain (explicit-g end).

    r = (2*kappa*gamma + g^2) / (2*kappa*gamma - g^2); raises
    ZeroDivisionError-like divergence flag via ValueError at the
    singularity 2*kappa*gamma = g^2.
    """
    if g <= 0:
        raise ValueError(f"g must be positive, got {g}")
    num = 2.0 * kappa * gamma + g ** 2
    den = 2.0 * kappa * gamma - g ** 2
    if abs(den) < EPS_DIV_FACTOR * g ** 2:
        raise DivergentAmplitudeError(
            f"folded reflection diverges at 2*kappa*gamma = g^2 (gamma={gamma})")
    return num / den


class DivergentAmplitudeError(ArithmeticError):
    """Amplitude requested exactly at a spectral singularity."""


def folded_reflection_at_k(k: float, gamma: float, g: float,
                           kappa: float = 1.0) -> complex:
    """General-k reflection of the folded chain (explicit-g end).

    From the end-site Schroedinger rows with the incident + reflected
    ansatz in the uniform region:  r = -(D + W e^{-ik}) / (D + W e^{ik}),
    D = eps*(i*gamma - eps) + g^2, W = 2*kappa*(i*gamma - eps).
    Reduces to folded_reflection at k = pi/2.
    """
    _check_k(k)
    eps = -2.0 * kappa * np.cos(k)
    d = eps * (1j * gamma - eps) + g ** 2
    w = 2.0 * kappa * (1j * gamma - eps)
    den = d + w * np.exp(1j * k)
    if abs(den) < EPS_DIV_FACTOR * g ** 2:
        raise DivergentAmplitudeError(
            f"folded reflection diverges at k={k}, gamma={gamma}")
    return -(d + w * np.exp(-1j * k)) / den


def locate_singularity(spec: LatticeSpec, sigma: int) -> SingularityPoint:
    """Singularity location (k_c = pi/2, gamma_c = sigma*g^2/(2*kappa))."""
    if sigma not in (+1, -1):
        raise ValueError(f"sigma must be +1 or -1, got {sigma}")
    return SingularityPoint(k_c=np.pi / 2.0,
                            gamma_c=sigma * spec.g ** 2 / (2.0 * spec.kappa),
                            sigma=sigma)


def steady_state_profile(sigma: int, sites) -> np.ndarray:
    """Unit-modulus singular steady state on the chain sites.

    Amplitude exp(-i*sigma*pi*j/2) for j <= -1 and exp(+i*sigma*pi*j/2) for
    j >= 1; j = 0 is excluded from the piecewise form (see
    steady_state_center_amplitudes).
    """
    if sigma not in (+1, -1):
        raise ValueError(f"sigma must be +1 or -1, got {sigma}")
    j = np.asarray(sites, dtype=float)
    if np.any(j == 0):
        raise ValueError("site 0 is excluded from the steady-state profile")
    phase = np.where(j <= -1, -sigma * np.pi * j / 2.0, sigma * np.pi * j / 2.0)
    return np.exp(1j * phase)


def steady_state_center_amplitudes(sigma: int, spec: LatticeSpec) -> tuple[complex, complex]:
    """(psi_0, psi_S) completing the singular steady state at gamma = sigma*g^2/(2k).

    Solving the j = +-1 and j = 0 rows gives psi_0 = 1 and
    psi_S = -2i*sigma*kappa/g; the S row then closes exactly.
    """
    if sigma not in (+1, -1):
        raise ValueError(f"sigma must be +1 or -1, got {sigma}")
    return 1.0 + 0.0j, -2j * sigma * spec.kappa / spec.g


def biorth_overlap(k: float, parity: int, spec: LatticeSpec,
                   half_width: int) -> BiorthOverlap:
    """Same-k biorthogonal overlap density on a truncated window of half-width M.

    Sums conj(psi_bar_j) * psi_j over j in [-M..-1] U [1..M] and divides by
    M.  For the even-parity scattering pair the density is 2*eta(k)*eta(-k)
    per site; it collapses exactly when eta(k) or eta(-k) vanishes, i.e. at
    k = pi/2 with 2*kappa*gamma = +-g^2.  The odd-parity sector
    (sin(k j), both chiralities identical) never collapses and is exposed
    read-only for basis completeness.

    The overlap is complex away from k = pi/2 for gamma != 0; only relative
    values and the collapse flag are meaningful (truncation-window
    normalization, not delta normalization).
    """
    _check_k(k)
    if half_width < 2:
        raise ValueError(f"half_width must be >= 2, got {half_width}")
    if parity not in (+1, -1):
        raise ValueError(f"parity must be +1 or -1, got {parity}")
    m = half_width
    j_neg = np.arange(-m, 0)
    j_pos = np.arange(1, m + 1)
    if parity == -1:
        psi = np.concatenate([np.sin(k * j_neg), np.sin(k * j_pos)])
        value = complex(np.sum(psi * psi)) / m
        return BiorthOverlap(value=value, collapsed=False)

    e_p = _eta_raw(k, spec)
    e_m = _eta_raw(-k, spec)
    psi = np.concatenate([
        e_p * np.exp(1j * k * j_neg) - e_m * np.exp(-1j * k * j_neg),
        -e_m * np.exp(1j * k * j_pos) + e_p * np.exp(-1j * k * j_pos),
    ])
    psi_bar = np.concatenate([
        np.conj(e_m) * np.exp(1j * k * j_neg) - np.conj(e_p) * np.exp(-1j * k * j_neg),
        -np.conj(e_p) * np.exp(1j * k * j_pos) + np.conj(e_m) * np.exp(-1j * k * j_pos),
    ])
    value = complex(np.vdot(psi_bar, psi)) / m
    eps_div = EPS_DIV_FACTOR * spec.g ** 2
    collapsed = bool(abs(e_p) < eps_div or abs(e_m) < eps_div)
    return BiorthOverlap(value=value, collapsed=collapsed)


def _eta_raw(k: float, spec: LatticeSpec) -> complex:
    # domain-unchecked eta, needed at -k for the left-eigenstate formulas
    return (2j * spec.kappa * np.sin(k) * (1j * spec.gamma + 2.0 * spec.kappa * np.cos(k))
            + spec.g ** 2)
