"""Finite Hamiltonian matrices for 1D resonator arrays with a gain/loss resonator.

Three lattice configurations, all returned as dense complex matrices:

* side-coupled chain: a uniform chain (signed sites -M..M, hopping -kappa)
  with one extra resonator S attached to site 0 at strength -g and an
  imaginary on-site potential +i*gamma on S;
* folded semi-infinite chain: the half-space reduction of the side-coupled
  chain.  Two end-bond conventions exist (see :class:`EndCoupling`): the
  bare sqrt(2)*kappa termination, and the full folded structure
  ... -kappa, -sqrt(2)*kappa, -g, end resonator (+i*gamma), which is the
  half of the PT chain and the one that carries the spectral singularity
  at gamma = g^2/(2*kappa);
* PT chain: finite chain of N+2 sites with balanced -i*gamma / +i*gamma
  resonators attached at both ends through -g bonds and sqrt(2)-enhanced
  inner bonds.

A uniform background decay gamma_p is supported as a trivially factorable
-i*gamma_p shift applied to every site.  Dense storage keeps things simple
at desk scale (dims <= ~2000, O(dim^2) memory).  Site indexing is 1-based;
the side-coupled model uses signed labels -M..M plus the named side site S.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class Topology(str, Enum):
    SIDE_COUPLED = "side_coupled"
    FOLDED = "folded"
    PT = "pt"


class EndCoupling(str, Enum):
    """End-bond convention for the folded chain.

    SQRT2_KAPPA: uniform chain 1..N, single -sqrt(2)*kappa bond to the end
    resonator.  EXPLICIT_G: uniform chain, then -sqrt(2)*kappa, then -g to
    the end resonator (identical to either half of the PT chain).  Only the
    EXPLICIT_G structure is singular at gamma = g^2/(2*kappa); dynamics
    presets use it.
    """

    SQRT2_KAPPA = "sqrt2_kappa"
    EXPLICIT_G = "explicit_g"


class SymmetryTag(str, Enum):
    HERMITIAN = "hermitian"
    PT_SYMMETRIC = "pt_symmetric"
    GENERAL = "general"


@dataclass(frozen=True)
class LatticeSpec:
    """Physical parameters of one lattice realization.

    kappa: chain hopping (> 0).  g: side/end coupling (> 0).  gamma:
    gain (+) / loss (-) rate of the special resonator.  gamma_p: uniform
    background decay (>= 0), applied as -i*gamma_p on every site.
    n_sites: bulk chain length N (folded and PT topologies; the
    side-coupled builder takes its truncation half-width separately).
    """

    kappa: float
    g: float
    gamma: float
    n_sites: int
    topology: Topology
    gamma_p: float = 0.0

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.g <= 0:
            raise ValueError(f"g must be positive, got {self.g}")
        if self.gamma_p < 0:
            raise ValueError(f"gamma_p must be >= 0, got {self.gamma_p}")
        if self.n_sites < 4:
            raise ValueError(f"n_sites must be >= 4, got {self.n_sites}")

    @staticmethod
    def from_dict(d: dict) -> "LatticeSpec":
        return LatticeSpec(
            kappa=float(d["kappa"]),
            g=float(d["g"]),
            gamma=float(d["gamma"]),
            n_sites=int(d["n_sites"]),
            topology=Topology(d["topology"]),
            gamma_p=float(d.get("gamma_p", 0.0)),
        )

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "g": self.g,
            "gamma": self.gamma,
            "n_sites": self.n_sites,
            "topology": self.topology.value,
            "gamma_p": self.gamma_p,
        }


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Dense complex Hamiltonian with symmetry metadata.

    The entries array is frozen (writeable=False); treat instances as
    immutable values, safe to share across threads.
    """

    matrix: np.ndarray
    symmetry: SymmetryTag
    site_labels: tuple[str, ...]
    kappa: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def text_dump(self) -> str:
        """Diagnostic dump: one 'row col re im' line per nonzero entry (1-based)."""
        lines = ["# row col re im"]
        rows, cols = np.nonzero(self.matrix)
        for r, c in zip(rows, cols):
            v = self.matrix[r, c]
            lines.append(f"{r + 1} {c + 1} {float(v.real)!r} {float(v.imag)!r}")
        return "\n".join(lines) + "\n"


def _finalize(mat: np.ndarray, labels: tuple[str, ...], spec: LatticeSpec,
              pt_capable: bool) -> HamiltonianMatrix:
    mat = mat - 1j * spec.gamma_p * np.eye(mat.shape[0])
    if spec.gamma == 0.0 and spec.gamma_p == 0.0:
        tag = SymmetryTag.HERMITIAN
    elif pt_capable and spec.gamma_p == 0.0:
        tag = SymmetryTag.PT_SYMMETRIC
    else:
        tag = SymmetryTag.GENERAL
    mat.flags.writeable = False
    return HamiltonianMatrix(matrix=mat, symmetry=tag, site_labels=labels,
                             kappa=spec.kappa)


def build_side_coupled_chain(spec: LatticeSpec, half_width: int) -> HamiltonianMatrix:
    """Truncated side-coupled chain: sites -M..M plus side site S, dim 2M+2.

    Chain bonds -kappa, side bond -g from site 0 to S, +i*gamma on S.
    """
    if spec.topology is not Topology.SIDE_COUPLED:
        raise ValueError(f"expected side_coupled topology, got {spec.topology.value}")
    if half_width < 2:
        raise ValueError(f"half_width must be >= 2, got {half_width}")
    m = half_width
    dim = 2 * m + 2
    side = dim - 1                       # array index of S
    h = np.zeros((dim, dim), dtype=complex)
    for i in range(2 * m):               # chain sites occupy indices 0..2M
        h[i, i + 1] = h[i + 1, i] = -spec.kappa
    h[m, side] = h[side, m] = -spec.g    # site 0 sits at index M
    h[side, side] = 1j * spec.gamma
    labels = tuple(str(j) for j in range(-m, m + 1)) + ("S",)
    return _finalize(h, labels, spec, pt_capable=False)


def build_folded_chain(spec: LatticeSpec,
                       end_coupling: EndCoupling = EndCoupling.SQRT2_KAPPA
                       ) -> HamiltonianMatrix:
    """Folded semi-infinite chain truncated to N+1 sites, +i*gamma on the end.

    SQRT2_KAPPA: bonds -kappa on (1,2)..(N-1,N), -sqrt(2)*kappa on (N,N+1).
    EXPLICIT_G:  bonds -kappa on (1,2)..(N-2,N-1), -sqrt(2)*kappa on
    (N-1,N), -g on (N,N+1).
    """
    if spec.topology is not Topology.FOLDED:
        raise ValueError(f"expected folded topology, got {spec.topology.value}")
    n = spec.n_sites
    dim = n + 1
    h = np.zeros((dim, dim), dtype=complex)
    if end_coupling is EndCoupling.SQRT2_KAPPA:
        for i in range(n - 1):
            h[i, i + 1] = h[i + 1, i] = -spec.kappa
        h[n - 1, n] = h[n, n - 1] = -np.sqrt(2.0) * spec.kappa
    else:
        for i in range(n - 2):
            h[i, i + 1] = h[i + 1, i] = -spec.kappa
        h[n - 2, n - 1] = h[n - 1, n - 2] = -np.sqrt(2.0) * spec.kappa
        h[n - 1, n] = h[n, n - 1] = -spec.g
    h[n, n] = 1j * spec.gamma
    labels = tuple(str(j) for j in range(1, dim + 1))
    return _finalize(h, labels, spec, pt_capable=False)


def build_pt_chain(spec: LatticeSpec) -> HamiltonianMatrix:
    """PT chain of N+2 sites: -i*gamma on site 1, +i*gamma on site N+2.

    Bonds: -g on (1,2) and (N+1,N+2); -sqrt(2)*kappa on (2,3) and (N,N+1);
    -kappa on (3,4)..(N-1,N).
    """
    if spec.topology is not Topology.PT:
        raise ValueError(f"expected pt topology, got {spec.topology.value}")
    n = spec.n_sites
    dim = n + 2
    h = np.zeros((dim, dim), dtype=complex)
    s2k = np.sqrt(2.0) * spec.kappa
    h[0, 1] = h[1, 0] = -spec.g
    h[1, 2] = h[2, 1] = -s2k
    for i in range(2, n - 1):            # bonds (3,4)..(N-1,N)
        h[i, i + 1] = h[i + 1, i] = -spec.kappa
    h[n - 1, n] = h[n, n - 1] = -s2k
    h[n, n + 1] = h[n + 1, n] = -spec.g
    h[0, 0] = -1j * spec.gamma
    h[n + 1, n + 1] = 1j * spec.gamma
    labels = tuple(str(j) for j in range(1, dim + 1))
    return _finalize(h, labels, spec, pt_capable=True)


def builder_for(spec: LatticeSpec, *, half_width: int | None = None,
                end_coupling: EndCoupling = EndCoupling.EXPLICIT_G
                ) -> HamiltonianMatrix:
    """Dispatch to the topology-appropriate builder.

    Dynamics callers default to the EXPLICIT_G folded structure since only
    it is singular at gamma_c = g^2/(2*kappa).
    """
    if spec.topology is Topology.SIDE_COUPLED:
        if half_width is None:
            raise ValueError("side_coupled topology requires half_width")
        return build_side_coupled_chain(spec, half_width)
    if spec.topology is Topology.FOLDED:
        return build_folded_chain(spec, end_coupling)
    return build_pt_chain(spec)
