"""Finite-system eigenanalysis: left/right spectra, PT critical equation,
exceptional-point detection, biorthogonal basis construction.

The PT chain has a chiral symmetry (staggered sign flip composed with site
reversal), so its spectrum is symmetric about zero energy.  Real wave
vectors of its extended states solve

    {4 k^2 [k^2 sin^2(2q) + gamma^2 sin^2 q] - g^4} sin[(N-1) q]
        + 4 g^2 k^2 sin(2q) cos[(N-1) q] = 0        (k == kappa, q == wave vector)

with q = pi/2 always a root for odd N, and for even N only at
gamma = g^2/(2*kappa) where it is a double root: the exceptional point,
carrying a 2x2 Jordan block whose coalesced zero-energy state is the
unidirectional plane wave written down in closed form below.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .model import HamiltonianMatrix, LatticeSpec, Topology, build_pt_chain

ZERO_CLUSTER_TOL = 1e-6    # |E|/kappa grouping for EP multiplicity analysis
EPS_EP = 1e-8              # normalized left-right overlap collapse threshold
BOUND_IM_TOL = 1e-7        # |Im E|/kappa above which a state counts as bound
BOUND_IPR = 0.1            # inverse participation ratio marking localization


class NearEPError(RuntimeError):
    """Biorthogonal basis construction refused: left-right overlap collapsed."""


class EPVerdict(str, Enum):
    NOT_EP = "not_ep"
    EP2 = "ep2"
    DEGENERATE_DIAGONALIZABLE = "degenerate_diagonalizable"


@dataclass
class EigenPair:
    energy: complex
    right_vec: np.ndarray
    left_vec: np.ndarray
    overlap: complex
    is_bound: bool
    ipr: float
    k_label: float | None = None
    ab_coeffs: tuple[complex, complex] | None = None        # right: (A, B)
    ab_coeffs_left: tuple[complex, complex] | None = None   # left: (A~, B~)


@dataclass
class SpectralReport:
    pairs: list
    bound_states: list
    imaginary_pairs: list
    ep_verdict: EPVerdict
    min_overlap: float
    chiral_defect: float


@dataclass
class EPReport:
    verdict: EPVerdict
    overlap: complex
    algebraic_multiplicity: int
    geometric_multiplicity: int
    state: np.ndarray
    left_state: np.ndarray
    residual: float


def _multiplicity_verdict(h: HamiltonianMatrix, eigs: np.ndarray) -> EPVerdict:
    """Jordan-block verdict for the zero-energy cluster.

    Degeneracies of these lattices occur at E = 0 (the chiral-symmetric
    point), so only that cluster is analyzed: algebraic multiplicity from
    eigenvalue counting, geometric from the singular-value rank of H.
    """
    kappa = h.kappa
    m_alg = int(np.sum(np.abs(eigs) < ZERO_CLUSTER_TOL * kappa))
    if m_alg < 2:
        return EPVerdict.NOT_EP
    sv = scipy.linalg.svdvals(h.matrix)
    m_geo = int(np.sum(sv < 1e-8 * kappa))
    if m_geo < m_alg:
        return EPVerdict.EP2 if m_alg == 2 else EPVerdict.NOT_EP
    return EPVerdict.DEGENERATE_DIAGONALIZABLE


def _chiral_defect(eigs: np.ndarray) -> float:
    """Multiset distance between the spectrum and its negation:
    max over eigenvalues of the distance to the nearest partner of -E."""
    d = np.abs(eigs[:, None] + eigs[None, :])
    return float(d.min(axis=1).max())


def _ipr(vec: np.ndarray) -> float:
    p = np.abs(vec) ** 2
    s = p.sum()
    return float(np.sum(p * p) / (s * s))


def full_spectrum(h: HamiltonianMatrix, lattice: LatticeSpec | None = None) -> SpectralReport:
    """All eigenvalues with right and left eigenvectors and their overlaps.

    Left vectors solve the conjugate-transpose problem (H^dag v = E^* v) and
    are returned index-matched with the right vectors.  Bound states are
    classified by |Im E| > 1e-7*kappa or IPR > 0.1.  When a PT lattice spec
    is supplied, real-energy extended states get a momentum label
    k = arccos(-E/(2*kappa)) and bulk plane-wave coefficients (A, B) fitted
    over sites 3..N.
    """
    if h.dim > 4096:
        raise ValueError(f"dimension {h.dim} exceeds the dense limit 4096")
    kappa = h.kappa
    try:
        eigs, vl, vr = scipy.linalg.eig(h.matrix, left=True, right=True)
    except scipy.linalg.LinAlgError as exc:   # pragma: no cover
        cond = np.linalg.cond(h.matrix)
        raise RuntimeError(f"eigen-solver failed (matrix condition {cond:.3e})") from exc

    pairs = []
    min_overlap = np.inf
    for i in range(h.dim):
        g_i = complex(np.vdot(vl[:, i], vr[:, i]))
        norm = np.linalg.norm(vl[:, i]) * np.linalg.norm(vr[:, i])
        min_overlap = min(min_overlap, abs(g_i) / norm)
        e = eigs[i]
        ipr = _ipr(vr[:, i])
        bound = abs(e.imag) > BOUND_IM_TOL * kappa or ipr > BOUND_IPR
        pair = EigenPair(energy=e, right_vec=vr[:, i], left_vec=vl[:, i],
                         overlap=g_i, is_bound=bound, ipr=ipr)
        if (lattice is not None and lattice.topology is Topology.PT
                and not bound and abs(e.real) <= 2.0 * kappa):
            k = float(np.arccos(np.clip(-e.real / (2.0 * kappa), -1.0, 1.0)))
            pair.k_label = k
            pair.ab_coeffs = plane_wave_coefficients(vr[:, i], k, lattice.n_sites)
            pair.ab_coeffs_left = plane_wave_coefficients(vl[:, i], k,
                                                          lattice.n_sites)
        pairs.append(pair)

    bound_states = [p for p in pairs if p.is_bound]
    imag_pairs = [p for p in bound_states
                  if abs(p.energy.real) < BOUND_IM_TOL * kappa]
    verdict = _multiplicity_verdict(h, eigs)
    return SpectralReport(pairs=pairs, bound_states=bound_states,
                          imaginary_pairs=imag_pairs, ep_verdict=verdict,
                          min_overlap=float(min_overlap),
                          chiral_defect=_chiral_defect(eigs))


def plane_wave_coefficients(vec: np.ndarray, k: float, n_bulk: int
                            ) -> tuple[complex, complex]:
    """Least-squares (A, B) with vec_l = A e^{ikl} + B e^{-ikl} on sites 3..N."""
    l = np.arange(3, n_bulk + 1)
    design = np.stack([np.exp(1j * k * l), np.exp(-1j * k * l)], axis=1)
    coef, *_ = np.linalg.lstsq(design, vec[2:n_bulk], rcond=None)
    return complex(coef[0]), complex(coef[1])


def critical_equation_value(k: float, spec: LatticeSpec) -> float:
    """Left-hand side of the real-wave-vector condition for the PT chain."""
    ka, g, ga, n = spec.kappa, spec.g, spec.gamma, spec.n_sites
    return float(
        (4.0 * ka ** 2 * (ka ** 2 * np.sin(2.0 * k) ** 2 + ga ** 2 * np.sin(k) ** 2)
         - g ** 4) * np.sin((n - 1) * k)
        + 4.0 * g ** 2 * ka ** 2 * np.sin(2.0 * k) * np.cos((n - 1) * k))


def solve_critical_equation(spec: LatticeSpec) -> list[float]:
    """All real roots in (0, pi), by sign-change bracketing plus brentq to 1e-12.

    The left-hand side oscillates with wavelength ~pi/N; an 8N-point grid
    guarantees bracketing of simple roots.  k = pi/2 is probed explicitly
    because at even N with gamma = g^2/(2*kappa) it is a double root
    (tangency) invisible to sign changes.  Emits a grid-resolution warning
    when two accepted roots fall within one grid cell.
    """
    from scipy.optimize import brentq

    n = spec.n_sites
    n_grid = 8 * n
    margin = np.pi / (16.0 * n)
    grid = np.linspace(margin, np.pi - margin, n_grid)
    ka, g, ga = spec.kappa, spec.g, spec.gamma
    sin2, sink = np.sin(2.0 * grid), np.sin(grid)
    vals = ((4.0 * ka ** 2 * (ka ** 2 * sin2 ** 2 + ga ** 2 * sink ** 2) - g ** 4)
            * np.sin((n - 1) * grid)
            + 4.0 * g ** 2 * ka ** 2 * sin2 * np.cos((n - 1) * grid))

    roots: list[float] = []
    f = lambda k: critical_equation_value(k, spec)
    for i in range(n_grid - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(float(grid[i]))
        elif a * b < 0.0:
            roots.append(float(brentq(f, grid[i], grid[i + 1], xtol=1e-12)))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))

    # tangent double root at pi/2 (even N at the exceptional point)
    scale = 4.0 * ka ** 2 * (ka ** 2 + ga ** 2) + g ** 4 + 4.0 * g ** 2 * ka ** 2
    if abs(f(np.pi / 2.0)) < 1e-12 * scale:
        if not any(abs(r - np.pi / 2.0) < 1e-9 for r in roots):
            roots.append(np.pi / 2.0)

    roots.sort()
    step = grid[1] - grid[0]
    for r1, r2 in zip(roots, roots[1:]):
        if r2 - r1 < step:
            warnings.warn(f"roots {r1:.12f} and {r2:.12f} share a grid cell; "
                          "grid resolution may be insufficient", RuntimeWarning)
    return roots


def ep_closed_form_states(spec: LatticeSpec) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form k = pi/2 zero-energy states of the PT chain and its adjoint.

    Both are exact eigenstates only at gamma = g^2/(2*kappa).  Free overall
    amplitude fixed by f_2 = 1.  The right state is a unidirectional plane
    wave (left-going component only) in the bulk.
    """
    n = spec.n_sites
    ratio = 2.0 * spec.kappa / spec.g
    l = np.arange(3, n + 1)
    phi = np.empty(n + 2, dtype=complex)
    phi[0] = 1j * ratio
    phi[1] = 1.0
    phi[2:n] = -np.sqrt(2.0) * (-1j) ** l
    phi[n] = (-1j) ** (n - 1)
    phi[n + 1] = (-1j) ** n * ratio
    phi_t = np.empty(n + 2, dtype=complex)
    phi_t[0] = -1j * ratio
    phi_t[1] = 1.0
    phi_t[2:n] = -np.sqrt(2.0) * 1j ** l
    phi_t[n] = 1j ** (n - 1)
    phi_t[n + 1] = 1j ** n * ratio
    return phi, phi_t


def ep_detect(spec: LatticeSpec) -> EPReport:
    """Exceptional-point verdict for the PT chain at the given parameters.

    Builds the closed-form k = pi/2 states, computes the left-right overlap
    <phi_tilde|phi> (exactly 0 for even N, -8*kappa^2/g^2 for odd N), and
    cross-checks with the numerical multiplicities of the E = 0 cluster:
    verdict EP2 requires even N, collapsed overlap, a valid zero-energy
    closed-form state (gamma at the critical value) and algebraic
    multiplicity 2 with geometric multiplicity 1.
    """
    if spec.topology is not Topology.PT:
        raise ValueError(f"expected pt topology, got {spec.topology.value}")
    kappa = spec.kappa
    phi, phi_t = ep_closed_form_states(spec)
    overlap = complex(np.vdot(phi_t, phi))
    h = build_pt_chain(spec)
    residual = float(np.linalg.norm(h.matrix @ phi) / np.linalg.norm(phi))

    eigs = np.linalg.eigvals(h.matrix)
    zero_cluster = np.abs(eigs) < ZERO_CLUSTER_TOL * kappa
    m_alg = int(np.sum(zero_cluster))
    sv = scipy.linalg.svdvals(h.matrix)
    m_geo = int(np.sum(sv < 1e-8 * kappa))

    norm_overlap = abs(overlap) / (np.linalg.norm(phi) * np.linalg.norm(phi_t))
    at_critical = residual < 1e-8 * kappa
    if (spec.n_sites % 2 == 0 and at_critical and norm_overlap < EPS_EP
            and m_alg == 2 and m_geo == 1):
        verdict = EPVerdict.EP2
    elif m_alg >= 2 and m_geo == m_alg:
        verdict = EPVerdict.DEGENERATE_DIAGONALIZABLE
    else:
        verdict = EPVerdict.NOT_EP
    return EPReport(verdict=verdict, overlap=overlap,
                    algebraic_multiplicity=m_alg, geometric_multiplicity=m_geo,
                    state=phi, left_state=phi_t, residual=residual)


@dataclass
class BiorthBasis:
    energies: np.ndarray
    right: np.ndarray     # columns: |phi_Gk>
    left: np.ndarray      # columns: |phi~_Gk>, so left^H @ right == identity
    min_overlap: float


EPS_EP_BASIS = 1e-6   # refusal threshold on raw normalized overlaps; the
                      # numerically split coalesced pair at an exceptional
                      # point shows ~2*sqrt(machine splitting) ~ 1e-8..1e-7


def biorth_basis(h: HamiltonianMatrix) -> BiorthBasis:
    """Biorthogonally renormalized eigenbasis: left^H right = I, sum |r><l| = I.

    Columns are scaled by G_k^{-1/2} (right) and conj(G_k^{1/2})^{-1} (left)
    with G_k the raw left-right overlap.  Raises NearEPError when any raw
    normalized |G_k| collapses: near an exceptional point the basis does
    not exist.  Benign degenerate clusters are re-biorthogonalized
    blockwise, and the biorthogonality / completeness post-conditions are
    verified before returning.
    """
    kappa = h.kappa
    eigs, vl, vr = scipy.linalg.eig(h.matrix, left=True, right=True)

    g_raw = np.einsum("ij,ij->j", vl.conj(), vr)
    norms = np.linalg.norm(vl, axis=0) * np.linalg.norm(vr, axis=0)
    min_overlap = float(np.min(np.abs(g_raw) / norms))
    if min_overlap < EPS_EP_BASIS:
        raise NearEPError(
            f"left-right overlap collapsed (min normalized |G_k| = {min_overlap:.3e}); "
            "biorthogonal basis does not exist near an exceptional point")

    # blockwise fix within eigenvalue clusters where geev may mix partners
    remaining = list(range(len(eigs)))
    while remaining:
        i = remaining.pop(0)
        cluster = [i]
        for j in list(remaining):
            if abs(eigs[j] - eigs[i]) < 1e-7 * kappa:
                cluster.append(j)
                remaining.remove(j)
        if len(cluster) > 1:
            idx = np.array(cluster)
            m = vl[:, idx].conj().T @ vr[:, idx]
            try:
                fix = np.linalg.inv(m).conj().T
            except np.linalg.LinAlgError:
                raise NearEPError(
                    f"degenerate cluster at E={eigs[i]:.6g} is defective")
            vl[:, idx] = vl[:, idx] @ fix

    g = np.einsum("ij,ij->j", vl.conj(), vr)
    s = np.sqrt(g)
    right = vr / s
    left = vl / np.conj(g / s)
    eye = np.eye(h.dim)
    if np.abs(left.conj().T @ right - eye).max() > 1e-8 or \
            np.abs(right @ left.conj().T - eye).max() > 1e-7:
        raise NearEPError("biorthogonal basis failed verification; "
                          "matrix is too close to an exceptional point")
    return BiorthBasis(energies=eigs, right=right, left=left,
                       min_overlap=min_overlap)
