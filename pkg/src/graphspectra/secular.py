"""Bond scattering matrices, the secular function F(k) and its torus form.

Every edge contributes two directed bonds: bond 2j runs u -> v along edge j,
bond 2j+1 runs v -> u.  The secular matrix is

    M(k) = exp(-i k L / 2) I - exp(i k L / 2) S(k)

with L the 2E x 2E diagonal of bond lengths (each edge length twice) and S
the bond scattering matrix assembled from local vertex matrices

    sigma(v) = (2 / (d + i alpha / k)) J - I

(J all-ones), which reduces to (2/d) J - I at NK vertices and to the 1x1
matrix (-1) at Dirichlet leaves.  For NK/Dirichlet graphs S is real,
orthogonal and k-independent, and det M(k) is purely real or purely
imaginary; the per-graph constant C in F(k) = C det M(k) is a power of i
fixed by a small calibration scan so that F is real.  Eigenvalues k^2 of the
graph are exactly the zeros of F.

Substituting kappa_e for k * l_e turns M into a function on the torus
[0, 2*pi)^E; the resulting Phi satisfies Phi(k * lengths) = F(k) and is
2*pi-periodic in every variable (each kappa scales two rows, so the sign
ambiguity of exp(i kappa / 2) cancels in the determinant).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NonpositiveK, RobinNotSupportedOnTorus, ValidationError
from .graphs import MetricGraph, VertexCondition

_CAL_POINTS = np.linspace(0.37, 11.61, 16)


@dataclass(frozen=True)
class BondIndex:
    """Directed-bond bookkeeping for a graph (dimension 2E)."""

    n_edges: int

    @property
    def size(self) -> int:
        return 2 * self.n_edges

    def forward(self, edge_index: int) -> int:
        return 2 * edge_index

    def reverse(self, edge_index: int) -> int:
        return 2 * edge_index + 1

    def reversal(self, bond: int) -> int:
        return bond ^ 1

    def edge_of(self, bond: int) -> int:
        return bond // 2


@dataclass(frozen=True)
class SecularSystem:
    """Assembled bond matrices at one wavenumber."""

    S: np.ndarray           # 2E x 2E bond scattering matrix
    lengths: np.ndarray     # 2E bond lengths (each edge twice)
    C: complex              # normalization making F real (NK/Dirichlet)
    k: float
    k_independent: bool     # True when the graph is NK/Dirichlet only

    @property
    def L(self) -> np.ndarray:
        return np.diag(self.lengths)

    def secular_matrix(self) -> np.ndarray:
        ph = np.exp(0.5j * self.k * self.lengths)
        return np.diag(1.0 / ph) - ph[:, None] * self.S


def vertex_scattering(condition: VertexCondition, degree: int, k: float) -> np.ndarray:
    """Local vertex scattering matrix sigma(v); unitary for every k > 0."""
    if k <= 0:
        raise NonpositiveK(f"k = {k}")
    if degree < 1:
        raise ValidationError("degree must be >= 1")
    d = degree
    if condition.is_dirichlet:
        if d != 1:
            raise ValidationError("Dirichlet scattering defined at degree 1 only")
        return -np.eye(1)
    if condition.alpha == 0.0:
        return (2.0 / d) * np.ones((d, d)) - np.eye(d)
    beta = 2.0 / (d + 1j * condition.alpha / k)
    return beta * np.ones((d, d), dtype=complex) - np.eye(d)


def bond_scattering(g: MetricGraph, k: float = 1.0) -> np.ndarray:
    """Assemble the 2E x 2E bond matrix S from the vertex blocks.

    S[b_out, b_in] is nonzero only when bond b_in arrives at the vertex that
    bond b_out departs from; the entry is the corresponding element of
    sigma(v) in the edge-end basis.  Real for NK/Dirichlet graphs.
    """
    n = 2 * len(g.edges)
    S = np.zeros((n, n), dtype=complex)
    for vid, cond in g.vertices:
        ends = g.edge_ends_at(vid)
        sigma = vertex_scattering(cond, len(ends), k)
        # bond arriving at end (j, 0) is the reverse bond 2j+1; at (j, 1) the
        # forward bond 2j.  Bond departing end (j, 0) is 2j; end (j, 1) is 2j+1.
        for a, (ja, ea) in enumerate(ends):
            b_out = 2 * ja + (1 if ea == 1 else 0)
            for b, (jb, eb) in enumerate(ends):
                b_in = 2 * jb + (1 if eb == 0 else 0)
                S[b_out, b_in] += sigma[a, b]
    if g.nk_dirichlet_only():
        return S.real.copy()
    return S


@lru_cache(maxsize=256)
def _constant_S(g: MetricGraph) -> np.ndarray:
    """Cached k-independent bond matrix for NK/Dirichlet graphs (read-only)."""
    S = bond_scattering(g)
    S.flags.writeable = False
    return S


@lru_cache(maxsize=256)
def _calibration_power(g: MetricGraph) -> int:
    """Power p with i**p * det M(k) real, found by a scan over k."""
    S = _constant_S(g)
    lb = np.repeat(g.lengths, 2)
    dets = []
    for k in _CAL_POINTS:
        ph = np.exp(0.5j * k * lb)
        M = np.diag(1.0 / ph) - ph[:, None] * S
        dets.append(np.linalg.det(M))
    dets = np.array(dets)
    best_p, best_res = 0, np.inf
    for p in range(4):
        vals = (1j ** p) * dets
        res = np.max(np.abs(vals.imag) / (1.0 + np.abs(vals)))
        if res < best_res - 1e-13:
            best_res, best_p = res, p
    return best_p


def assemble_secular_system(g: MetricGraph, k: float) -> SecularSystem:
    if k <= 0:
        raise NonpositiveK(f"k = {k}")
    kind = g.nk_dirichlet_only()
    S = bond_scattering(g, k)
    C = 1j ** _calibration_power(g) if kind else 1.0 + 0.0j
    return SecularSystem(S, np.repeat(g.lengths, 2), C, float(k), kind)


def secular_value(g: MetricGraph, k: float):
    """F(k); real for NK/Dirichlet graphs, complex when Robin vertices exist."""
    sys = assemble_secular_system(g, k)
    val = sys.C * np.linalg.det(sys.secular_matrix())
    if sys.k_independent:
        return float(val.real)
    return complex(val)


def secular_values(g: MetricGraph, ks: np.ndarray) -> np.ndarray:
    """Vectorized F over a k-grid (NK/Dirichlet graphs only)."""
    if g.has_robin():
        raise RobinNotSupportedOnTorus("vectorized F needs a k-independent S")
    S = _constant_S(g)
    C = 1j ** _calibration_power(g)
    lb = np.repeat(g.lengths, 2)
    ph = np.exp(0.5j * np.asarray(ks)[:, None] * lb)
    M = (1.0 / ph)[:, :, None] * np.eye(len(lb)) - ph[:, :, None] * S
    return (C * np.linalg.det(M)).real


def torus_value(g: MetricGraph, kappa) -> float:
    """Phi at one torus point (NK/Dirichlet graphs only)."""
    return float(torus_values(g, np.asarray(kappa, dtype=float)[None, :])[0])


def torus_values(g: MetricGraph, kappas: np.ndarray) -> np.ndarray:
    """Vectorized Phi over an (n, E) array of torus points."""
    if g.has_robin():
        raise RobinNotSupportedOnTorus(
            "the torus function is defined for NK/Dirichlet graphs only"
        )
    kappas = np.asarray(kappas, dtype=float)
    if kappas.ndim != 2 or kappas.shape[1] != len(g.edges):
        raise ValidationError(f"expected (n, {len(g.edges)}) array of torus points")
    S = _constant_S(g)
    C = 1j ** _calibration_power(g)
    n = 2 * len(g.edges)
    ph = np.exp(0.5j * np.repeat(kappas, 2, axis=1))
    M = (1.0 / ph)[:, :, None] * np.eye(n) - ph[:, :, None] * S
    return (C * np.linalg.det(M)).real


def secular_smallest_singulars(g: MetricGraph, ks: np.ndarray) -> np.ndarray:
    """Two smallest singular values of M(k) over a k-grid, shape (n, 2);
    column 0 is the smallest, column 1 the second smallest."""
    ks = np.asarray(ks, dtype=float)
    lb = np.repeat(g.lengths, 2)
    n = len(lb)
    if g.nk_dirichlet_only():
        S = _constant_S(g)
        ph = np.exp(0.5j * ks[:, None] * lb)
        M = (1.0 / ph)[:, :, None] * np.eye(n) - ph[:, :, None] * S
        sv = np.linalg.svd(M, compute_uv=False)
    else:
        sv = np.empty((len(ks), n))
        for i, k in enumerate(ks):
            S = bond_scattering(g, float(k))
            ph = np.exp(0.5j * k * lb)
            M = np.diag(1.0 / ph) - ph[:, None] * S
            sv[i] = np.linalg.svd(M, compute_uv=False)
    return sv[:, -1:-3:-1]


def torus_gradient(g: MetricGraph, kappa, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of Phi at one torus point."""
    kappa = np.asarray(kappa, dtype=float)
    E = len(kappa)
    pts = np.repeat(kappa[None, :], 2 * E, axis=0)
    for j in range(E):
        pts[2 * j, j] += step
        pts[2 * j + 1, j] -= step
    vals = torus_values(g, pts)
    return (vals[0::2] - vals[1::2]) / (2.0 * step)


# -- reference closed forms ------------------------------------------------------


def star3_dirichlet_closed_form(kappa) -> float:
    """Three-term closed form for the 3-star with Dirichlet leaves."""
    k1, k2, k3 = float(kappa[0]), float(kappa[1]), float(kappa[2])
    return (
        np.sin(k1) * np.sin(k2) * np.cos(k3)
        + np.sin(k2) * np.sin(k3) * np.cos(k1)
        + np.sin(k3) * np.sin(k1) * np.cos(k2)
    )


def star3_neumann_closed_form(kappa) -> float:
    """Neumann-leaf variant; equals the Dirichlet form shifted by pi/2."""
    k1, k2, k3 = float(kappa[0]), float(kappa[1]), float(kappa[2])
    return (
        np.cos(k1) * np.cos(k2) * np.sin(k3)
        + np.cos(k2) * np.cos(k3) * np.sin(k1)
        + np.cos(k3) * np.cos(k1) * np.sin(k2)
    )


def mandarin3_closed_form(kappa) -> float:
    """Product factorization for the 3-edge mandarin graph."""
    half = np.asarray(kappa, dtype=float) / 2.0
    return star3_dirichlet_closed_form(half) * star3_neumann_closed_form(half)
