"""Eigenfunction reconstruction from the direct-system null space.

An eigenfunction is stored as per-edge coefficient pairs (a_e, b_e) in the
sign-appropriate basis (cos kx, sin kx / 1, x / cosh kx, sinh kx), oriented
along the edge's stored u -> v direction.  L2 inner products are evaluated
from closed-form antiderivatives, so normalization and orthogonality carry
no quadrature error.  The residual of -f'' = lambda f is exact by
construction; only the vertex conditions are satisfied numerically.

When the eigenvalue lies in the (2 pi n / l)^2 family of a pure loop, the
basis is canonicalized: the loop-supported state (sine wave around the loop
vanishing at the attachment point, identically zero elsewhere) is
synthesized analytically, verified against the null space, and made an
explicit basis member.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CoordinateOutOfRange,
    NullSpaceDimensionMismatch,
    ValidationError,
)
from .graphs import LoopDescriptor, MetricGraph, find_loops
from .spectral import EigenvalueRecord, direct_matrix

TAU_VANISH = 1e-7     # vertex value considered zero (unit L2 norm)
TAU_OFFLOOP = 1e-8    # off-loop coefficient bound for loop states

NONVANISHING = "NonvanishingOnVertices"
VANISHES = "VanishesAtVertices"
LOOP_SUPPORTED = "LoopSupported"


@dataclass(frozen=True)
class SupportClassification:
    kind: str
    vanishing_vertices: tuple[str, ...] = ()
    loop: LoopDescriptor | None = None
    ambiguous_loops: tuple[LoopDescriptor, ...] = ()


@dataclass(frozen=True)
class EigenFunction:
    graph: MetricGraph
    lam: float
    coefficients: np.ndarray        # shape (E, 2), L2-normalized
    index: int                      # position in the ordered spectrum

    @property
    def k(self) -> float:
        return math.sqrt(abs(self.lam))

    @property
    def basis_sign(self) -> int:
        return 0 if self.lam == 0 else (1 if self.lam > 0 else -1)


def _edge_gram(lam: float, length: float) -> np.ndarray:
    """2x2 Gram matrix of the basis pair on one edge."""
    l = length
    if lam == 0.0:
        return np.array([[l, l * l / 2.0], [l * l / 2.0, l ** 3 / 3.0]])
    k = math.sqrt(abs(lam))
    if lam > 0:
        icc = l / 2.0 + math.sin(2 * k * l) / (4 * k)
        iss = l / 2.0 - math.sin(2 * k * l) / (4 * k)
        ics = (1.0 - math.cos(2 * k * l)) / (4 * k)
    else:
        icc = l / 2.0 + math.sinh(2 * k * l) / (4 * k)
        iss = -l / 2.0 + math.sinh(2 * k * l) / (4 * k)
        ics = (math.cosh(2 * k * l) - 1.0) / (4 * k)
    return np.array([[icc, ics], [ics, iss]])


def gram_blocks(g: MetricGraph, lam: float) -> np.ndarray:
    return np.stack([_edge_gram(lam, e.length) for e in g.edges])


def l2_inner(g: MetricGraph, lam: float, c1: np.ndarray, c2: np.ndarray) -> float:
    blocks = gram_blocks(g, lam)
    return float(np.einsum("ei,eij,ej->", c1, blocks, c2))


def l2_norm(g: MetricGraph, lam: float, c: np.ndarray) -> float:
    return math.sqrt(max(l2_inner(g, lam, c, c), 0.0))


def _end_value(g: MetricGraph, lam: float, coeffs: np.ndarray, j: int, end: int) -> float:
    a, b = coeffs[j]
    if end == 0:
        return float(a)
    l = g.edges[j].length
    if lam == 0.0:
        return float(a + b * l)
    k = math.sqrt(abs(lam))
    if lam > 0:
        return float(a * math.cos(k * l) + b * math.sin(k * l))
    return float(a * math.cosh(k * l) + b * math.sinh(k * l))


def _end_derivative_into(g, lam, coeffs, j, end) -> float:
    a, b = coeffs[j]
    l = g.edges[j].length
    if lam == 0.0:
        return float(b) if end == 0 else float(-b)
    k = math.sqrt(abs(lam))
    if end == 0:
        return float(k * b)
    if lam > 0:
        return float(k * (a * math.sin(k * l) - b * math.cos(k * l)))
    return float(-k * (a * math.sinh(k * l) + b * math.cosh(k * l)))


def vertex_values(f: EigenFunction) -> dict[str, float]:
    """f(v) for every vertex, read off the first incident edge-end."""
    out = {}
    for vid, _ in f.graph.vertices:
        j, end = f.graph.edge_ends_at(vid)[0]
        out[vid] = _end_value(f.graph, f.lam, f.coefficients, j, end)
    return out


def vertex_condition_residuals(f: EigenFunction) -> dict[str, float]:
    """Continuity and flux/value residuals per vertex (max of the two)."""
    g, lam, c = f.graph, f.lam, f.coefficients
    out = {}
    for vid, cond in g.vertices:
        ends = g.edge_ends_at(vid)
        vals = [_end_value(g, lam, c, j, e) for j, e in ends]
        res = max((abs(v - vals[0]) for v in vals[1:]), default=0.0)
        if cond.is_dirichlet:
            res = max(res, abs(vals[0]))
        else:
            flux = sum(_end_derivative_into(g, lam, c, j, e) for j, e in ends)
            res = max(res, abs(flux - cond.alpha * vals[0]))
        out[vid] = res
    return out


def evaluate(f: EigenFunction, edge_id: str, x: float) -> float:
    """Pointwise value at coordinate x along the edge's u -> v direction."""
    j = f.graph.edge_index(edge_id)
    l = f.graph.edges[j].length
    if not (0.0 <= x <= l * (1 + 1e-12)):
        raise CoordinateOutOfRange(f"x = {x} outside [0, {l}]")
    a, b = f.coefficients[j]
    if f.lam == 0.0:
        return float(a + b * x)
    k = f.k
    if f.lam > 0:
        return float(a * math.cos(k * x) + b * math.sin(k * x))
    return float(a * math.cosh(k * x) + b * math.sinh(k * x))


def _loop_matches(loop: LoopDescriptor, k: float, rel: float = 1e-6) -> int:
    """Return n >= 1 when k is close to 2 pi n / loop length, else 0."""
    if k <= 0:
        return 0
    x = k * loop.total_length / (2.0 * math.pi)
    n = round(x)
    if n >= 1 and abs(x - n) <= rel * (1 + x):
        return int(n)
    return 0


def synthesize_loop_state(g: MetricGraph, loop: LoopDescriptor, k: float) -> np.ndarray:
    """Coefficient vector of sin(k s) along the loop, zero off the loop.

    s is arclength from the attachment vertex along the stored walk; the
    state vanishes at the attachment point and at every multiple of the
    loop length, which is what makes it an eigenfunction of the whole graph.
    """
    coeffs = np.zeros((len(g.edges), 2))
    s0 = 0.0
    for eid, fwd in zip(loop.edge_chain, loop.orientations):
        j = g.edge_index(eid)
        l = g.edges[j].length
        if fwd:
            coeffs[j] = (math.sin(k * s0), math.cos(k * s0))
        else:
            th = k * (s0 + l)
            coeffs[j] = (math.sin(th), -math.cos(th))
        s0 += l
    return coeffs


def _normalize_sign(g: MetricGraph, coeffs: np.ndarray) -> np.ndarray:
    """First coefficient of the lexicographically first edge above threshold
    is made positive, for reproducible output."""
    order = sorted(range(len(g.edges)), key=lambda j: g.edges[j].id)
    scale = np.abs(coeffs).max()
    for j in order:
        for comp in (0, 1):
            if abs(coeffs[j, comp]) > 1e-9 * scale:
                if coeffs[j, comp] < 0:
                    return -coeffs
                return coeffs
    return coeffs


def eigenfunctions_at(
    g: MetricGraph, record: EigenvalueRecord, nullity_rel: float = 1e-8
) -> list[EigenFunction]:
    """L2-orthonormal basis of the eigenspace, dimension = multiplicity."""
    lam = record.lam
    H = direct_matrix(g, lam)
    _, sv, vt = np.linalg.svd(H)
    tau = nullity_rel * max(float(sv[0]), 1.0)
    null = vt[sv < tau]
    if len(null) != record.multiplicity:
        # fall back to taking the m smallest directions when the record
        # (e.g. a flagged near-degenerate pair) disagrees with strict nullity
        if record.degeneracy_suspected and len(null) < record.multiplicity:
            null = vt[-record.multiplicity:]
        else:
            raise NullSpaceDimensionMismatch(
                f"nullity {len(null)} != multiplicity {record.multiplicity} "
                f"at lambda = {lam}"
            )
    basis = [v.reshape(-1, 2).copy() for v in null]

    # canonicalize loop-supported directions
    if lam > 0:
        k = record.k
        chosen: list[np.ndarray] = []
        for loop in find_loops(g):
            if not loop.pure or not _loop_matches(loop, k):
                continue
            cand = synthesize_loop_state(g, loop, k)
            resid = np.linalg.norm(H @ cand.reshape(-1)) / np.linalg.norm(cand)
            if resid < 1e-6:
                chosen.append(cand)
        if chosen:
            basis = chosen + basis

    # L2 Gram-Schmidt in deterministic order, dropping dependent directions
    ortho: list[np.ndarray] = []
    for c in basis:
        w = c.copy()
        for o in ortho:
            w -= l2_inner(g, lam, o, w) * o
        nrm = l2_norm(g, lam, w)
        if nrm > 1e-6:
            ortho.append(w / nrm)
        if len(ortho) == record.multiplicity:
            break
    if len(ortho) != record.multiplicity:
        raise NullSpaceDimensionMismatch(
            f"could not build {record.multiplicity} independent eigenfunctions"
        )
    out = []
    for i, c in enumerate(ortho):
        cc = _normalize_sign(g, c)
        out.append(EigenFunction(g, lam, cc, record.index_start + i))
    return out


def classify_support(g: MetricGraph, f: EigenFunction) -> SupportClassification:
    """Trichotomy: nonvanishing on delta vertices / loop-supported / vanishing.

    Dirichlet vertices are exempt from the nonvanishing check: f(v) = 0 there
    is imposed by the condition rather than a genericity failure.
    """
    vals = vertex_values(f)
    delta_ids = [vid for vid, c in g.vertices if not c.is_dirichlet]
    vanishing = tuple(v for v in delta_ids if abs(vals[v]) <= TAU_VANISH)
    if not vanishing:
        return SupportClassification(NONVANISHING)

    matches = []
    for loop in find_loops(g):
        if not loop.pure:
            continue
        loop_edges = {g.edge_index(e) for e in loop.edge_chain}
        off = [j for j in range(len(g.edges)) if j not in loop_edges]
        off_mass = max(
            (float(np.abs(f.coefficients[j]).max()) for j in off), default=0.0
        )
        if off_mass <= TAU_OFFLOOP and abs(vals[loop.attachment_vertex]) <= TAU_OFFLOOP:
            matches.append(loop)
    if len(matches) == 1:
        return SupportClassification(LOOP_SUPPORTED, loop=matches[0])
    return SupportClassification(
        VANISHES, vanishing_vertices=vanishing, ambiguous_loops=tuple(matches)
    )


def sample_on_edges(f: EigenFunction, points_per_edge: int = 50):
    """Rows (edge id, x, f(x)) for export; includes both edge endpoints."""
    if points_per_edge < 2:
        raise ValidationError("need at least 2 sample points per edge")
    rows = []
    for e in f.graph.edges:
        for x in np.linspace(0.0, e.length, points_per_edge):
            rows.append((e.id, float(x), evaluate(f, e.id, float(x))))
    return rows
