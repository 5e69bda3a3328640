"""Sampling and topology of the secular manifold on the torus.

The torus function Phi of an NK/Dirichlet graph is sampled on a regular
periodic grid over [0, 2 pi)^E.  Grid cells are flagged as zero cells when
their corner values change sign (or a corner sits on zero); zero cells are
classified smooth/singular from a per-cell gradient estimate; smooth zero
cells are labeled into connected components by face adjacency with torus
wraparound.

A cell counts as singular when its gradient estimate is small against both
an absolute threshold (1e-4 * max|Phi| * R / 2pi) and the local
second-difference scale 1.25 * h * ||Hess||.  The second test is what
detects isolated conical points: near a cone the cell-averaged gradient is
of order h * ||Hess|| however fine the grid, so a purely absolute threshold
would let the two sheets merge through the cone.  Cells within one cell of
a singular cell are excluded from labeling so that components cannot leak
through the conical contact points.

The gradient-sign two-coloring (every smooth point of the manifold has a
single-signed gradient) is computed independently of the labeling and must
be constant on every component; this is the cross-check used in tests.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ._mctables import EDGE_TABLE, TRI_TABLE
from .errors import (
    DimensionNot3,
    DimensionTooLarge,
    MixedSignAtSmoothCell,
    ResolutionTooSmall,
    RobinNotSupportedOnTorus,
    ValidationError,
)
from .graphs import MetricGraph
from .secular import torus_values

CONE_FACTOR = 1.25
TAU_GRAD_COEFF = 1e-4
MAX_GRID_POINTS = 16_000_000


@dataclass
class TorusField:
    """Sampled Phi grid with progressively filled classification layers."""

    graph: MetricGraph
    resolution: int
    values: np.ndarray                      # shape (R,) * E
    zero_cells: np.ndarray | None = None    # bool, cell (i1..iE) spans +1 wrap
    cell_gradients: np.ndarray | None = None  # shape (E,) + (R,) * E
    hessian_scale: np.ndarray | None = None
    singular: np.ndarray | None = None
    excluded: np.ndarray | None = None
    smooth: np.ndarray | None = None
    labels: np.ndarray | None = None        # 0 = unlabeled, 1..n components
    n_components: int | None = None
    component_sizes: tuple[int, ...] = ()
    degenerate_dimension: bool = False

    @property
    def n_axes(self) -> int:
        return self.values.ndim

    @property
    def cell_size(self) -> float:
        return 2.0 * math.pi / self.resolution

    def axis_coordinates(self) -> np.ndarray:
        return np.arange(self.resolution) * self.cell_size


def sample_field(g: MetricGraph, resolution: int) -> TorusField:
    """Evaluate Phi on the regular grid; deterministic and chunked."""
    if g.has_robin():
        raise RobinNotSupportedOnTorus("torus sampling needs an NK/Dirichlet graph")
    if resolution < 16:
        raise ResolutionTooSmall(f"resolution {resolution} < 16")
    E = len(g.edges)
    if E > 4:
        raise DimensionTooLarge(f"E = {E} > 4")
    if resolution ** E > MAX_GRID_POINTS:
        raise DimensionTooLarge(
            f"grid {resolution}^{E} exceeds {MAX_GRID_POINTS} points"
        )
    R = resolution
    h = 2.0 * math.pi / R
    n_total = R ** E
    vals = np.empty(n_total)
    chunk = 1 << 17
    strides = [R ** (E - 1 - a) for a in range(E)]
    for lo in range(0, n_total, chunk):
        idx = np.arange(lo, min(lo + chunk, n_total))
        kap = np.empty((len(idx), E))
        for a in range(E):
            kap[:, a] = ((idx // strides[a]) % R) * h
        vals[lo:lo + len(idx)] = torus_values(g, kap)
    return TorusField(g, R, vals.reshape((R,) * E))


def classify_points(fld: TorusField) -> TorusField:
    """Flag zero cells and classify them smooth/singular in place."""
    vals = fld.values
    E = fld.n_axes
    h = fld.cell_size
    axes = tuple(range(E))
    vmax = float(np.abs(vals).max())
    tau_zero = 1e-12 * vmax

    cmax = vals.copy()
    cmin = vals.copy()
    for ofs in itertools.product((0, 1), repeat=E):
        if not any(ofs):
            continue
        shifted = np.roll(vals, tuple(-o for o in ofs), axis=axes)
        np.maximum(cmax, shifted, out=cmax)
        np.minimum(cmin, shifted, out=cmin)
    zero = (cmax >= -tau_zero) & (cmin <= tau_zero)

    # point gradients, then per-cell averages and spreads over the 2^E corners
    grads = [
        (np.roll(vals, -1, axis=a) - np.roll(vals, 1, axis=a)) / (2.0 * h)
        for a in range(E)
    ]
    cell_grad = np.zeros((E,) + vals.shape)
    hess = np.zeros_like(vals)
    for a in range(E):
        gsum = np.zeros_like(vals)
        gmax = np.full_like(vals, -np.inf)
        gmin = np.full_like(vals, np.inf)
        for ofs in itertools.product((0, 1), repeat=E):
            shifted = np.roll(grads[a], tuple(-o for o in ofs), axis=axes)
            gsum += shifted
            np.maximum(gmax, shifted, out=gmax)
            np.minimum(gmin, shifted, out=gmin)
        cell_grad[a] = gsum / (1 << E)
        np.maximum(hess, (gmax - gmin) / h, out=hess)

    gnorm = np.sqrt(np.sum(cell_grad ** 2, axis=0))
    tau_grad = TAU_GRAD_COEFF * vmax * fld.resolution / (2.0 * math.pi)
    singular = zero & (gnorm < np.maximum(tau_grad, CONE_FACTOR * h * hess))

    excluded = singular.copy()
    for ofs in itertools.product((-1, 0, 1), repeat=E):
        if not any(ofs):
            continue
        excluded |= np.roll(singular, ofs, axis=axes)

    fld.zero_cells = zero
    fld.cell_gradients = cell_grad
    fld.hessian_scale = hess
    fld.singular = singular
    fld.excluded = excluded & zero
    fld.smooth = zero & ~excluded
    return fld


class UnionFind:
    """Path-compressing union-find over integer labels."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def connected_components(fld: TorusField) -> TorusField:
    """Label smooth zero cells by face adjacency with torus wraparound.

    Labels are 1..n in decreasing component size; singular and excluded
    cells stay 0.  For a one-dimensional torus the zero set is a finite
    point set and the result is flagged degenerate.
    """
    if fld.smooth is None:
        classify_points(fld)
    E = fld.n_axes
    structure = ndimage.generate_binary_structure(E, 1)
    lab, n0 = ndimage.label(fld.smooth, structure=structure)

    uf = UnionFind(n0 + 1)
    for a in range(E):
        lo = np.take(lab, 0, axis=a).ravel()
        hi = np.take(lab, -1, axis=a).ravel()
        both = (lo > 0) & (hi > 0)
        for x, y in zip(lo[both], hi[both]):
            uf.union(int(x), int(y))

    roots = np.array([uf.find(i) for i in range(n0 + 1)])
    sizes: dict[int, int] = {}
    uniq, counts = np.unique(lab[lab > 0], return_counts=True)
    for x, c in zip(uniq, counts):
        r = roots[int(x)]
        sizes[r] = sizes.get(r, 0) + int(c)
    order = sorted(sizes, key=lambda r: (-sizes[r], r))
    final = {r: i + 1 for i, r in enumerate(order)}
    remap = np.zeros(n0 + 1, dtype=np.int32)
    for x in range(1, n0 + 1):
        remap[x] = final.get(roots[x], 0)
    fld.labels = remap[lab]
    fld.n_components = len(order)
    fld.component_sizes = tuple(sizes[r] for r in order)
    fld.degenerate_dimension = E < 2
    return fld


def gradient_sign_labels(fld: TorusField, strong_factor: float = 4.0) -> np.ndarray:
    """Per-smooth-cell gradient sign in {+1, -1}; 0 elsewhere.

    Raises MixedSignAtSmoothCell when some smooth cell carries strong
    gradient components of both signs, which indicates misclassification.
    """
    if fld.smooth is None:
        classify_points(fld)
    vmax = float(np.abs(fld.values).max())
    tau_grad = TAU_GRAD_COEFF * vmax * fld.resolution / (2.0 * math.pi)
    gpos = np.max(fld.cell_gradients, axis=0)
    gneg = -np.min(fld.cell_gradients, axis=0)
    # a component's sign is only trustworthy above the discretization error
    # scale h * ||Hess||, the same scale the singularity test uses
    strong = np.maximum(
        strong_factor * tau_grad,
        strong_factor * CONE_FACTOR * fld.cell_size * fld.hessian_scale,
    )
    mixed = (
        fld.smooth
        & (gpos > strong)
        & (gneg > strong)
        & (np.minimum(gpos, gneg) > 0.3 * np.maximum(gpos, gneg))
    )
    if mixed.any():
        raise MixedSignAtSmoothCell(
            f"{int(mixed.sum())} smooth cells have strongly mixed gradient signs"
        )
    gsum = np.sum(fld.cell_gradients, axis=0)
    out = np.zeros(fld.values.shape, dtype=np.int8)
    out[fld.smooth] = np.where(gsum[fld.smooth] >= 0, 1, -1).astype(np.int8)
    return out


def two_coloring_consistent(fld: TorusField) -> tuple[bool, int]:
    """Check the gradient two-coloring is constant per component.

    Returns (consistent, number of offending cells).
    """
    if fld.labels is None:
        connected_components(fld)
    signs = gradient_sign_labels(fld)
    bad = 0
    for comp in range(1, (fld.n_components or 0) + 1):
        s = signs[fld.labels == comp]
        if len(s) == 0:
            continue
        n_pos = int(np.sum(s > 0))
        n_neg = int(np.sum(s < 0))
        bad += min(n_pos, n_neg)
    return bad == 0, bad


def component_sign(fld: TorusField, comp: int) -> int:
    signs = gradient_sign_labels(fld)
    s = signs[fld.labels == comp]
    return int(np.sign(s.sum())) if len(s) else 0


def multiplicity_crosscheck(
    fld: TorusField, n_cells: int = 8
) -> tuple[int, int]:
    """Validate the most-singular cells against degenerate eigenvalues.

    Takes the n_cells singular cells with the smallest gradient estimate
    (away from the lattice origin, which realizes lambda = 0 and is outside
    the smoothness criterion) and searches each neighbourhood for a point
    kappa whose graph realization (lengths = kappa, k = 1) carries a
    multiple eigenvalue, i.e. where the second-smallest singular value of
    the direct system vanishes.  Components near 0 are lifted by 2 pi,
    which leaves the system unchanged at k = 1.  Returns (checked,
    confirmed).  The cone-aware flagging is deliberately conservative, so
    shallow-gradient smooth cells may also be flagged; the lowest-gradient
    subsample is the part that must sit on true degeneracies.
    """
    from scipy.optimize import minimize

    from .graphs import MetricGraph
    from .spectral import direct_matrices, multiplicity_at

    if fld.singular is None:
        classify_points(fld)
    cells = np.argwhere(fld.singular)
    if len(cells) == 0:
        return (0, 0)
    g = fld.graph
    h = fld.cell_size
    two_pi = 2.0 * math.pi

    centers = (cells + 0.5) * h
    lattice_dist = np.minimum(centers % two_pi, two_pi - centers % two_pi)
    away = np.max(lattice_dist, axis=1) > 4.0 * h
    cells = cells[away]
    if len(cells) == 0:
        return (0, 0)
    gnorm = np.sqrt(np.sum(fld.cell_gradients ** 2, axis=0))
    order = np.argsort([gnorm[tuple(c)] for c in cells], kind="stable")
    picks = cells[order[: min(n_cells, len(cells))]]

    def lift(kap):
        return np.where(kap < 0.05, kap + two_pi, kap)

    def realize(kap):
        edges = [(e.id, e.u, e.v, float(l)) for e, l in zip(g.edges, lift(kap))]
        return MetricGraph.from_parts(g.vertices, edges)

    def sigma2(kap):
        H = direct_matrices(realize(np.asarray(kap)), np.array([1.0]))[0]
        sv = np.linalg.svd(H, compute_uv=False)
        return float(sv[-2])

    E = len(g.edges)
    checked = confirmed = 0
    for idx in picks:
        center = (np.asarray(idx, dtype=float) + 0.5) * h
        checked += 1
        for shift in (0.0, 0.31 * h, -0.27 * h):
            start = center + shift
            simplex = np.vstack([start] + [start + (h / 3.0) * np.eye(E)[i]
                                           for i in range(E)])
            res = minimize(
                sigma2, start, method="Nelder-Mead",
                options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 1200,
                         "initial_simplex": simplex},
            )
            near = np.abs(res.x - center).max() <= 3.0 * h
            if near and (
                float(res.fun) < 1e-7 or multiplicity_at(realize(res.x), 1.0) >= 2
            ):
                confirmed += 1
                break
    return checked, confirmed


# -- exports ------------------------------------------------------------------

_MC_CORNERS = (
    (0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0),
    (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1),
)
_MC_EDGES = (
    (0, 1), (1, 2), (2, 3), (3, 0),
    (4, 5), (5, 6), (6, 7), (7, 4),
    (0, 4), (1, 5), (2, 6), (3, 7),
)


def export_mesh(fld: TorusField, path) -> None:
    """Marching-cubes isosurface of the periodic grid, as a plain-text
    polygon file: ``v x y z`` vertices, ``f i j k`` triangles (1-based),
    ``g component_<n>`` group headers per component label (0 = unlabeled)."""
    if fld.n_axes != 3:
        raise DimensionNot3(f"mesh export needs E = 3, got E = {fld.n_axes}")
    if fld.labels is None:
        connected_components(fld)
    vals = fld.values
    R = fld.resolution
    h = fld.cell_size
    # group cells by component label; unlabeled sign-change cells go to 0
    groups: dict[int, list[tuple[int, int, int]]] = {}
    cells = np.argwhere(fld.zero_cells)
    for (i, j, k) in cells:
        groups.setdefault(int(fld.labels[i, j, k]), []).append((int(i), int(j), int(k)))

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# isosurface of Phi on [0,2pi)^3, resolution {R}\n")
        n_written = 0
        for comp in sorted(groups):
            fh.write(f"g component_{comp}\n")
            for (i, j, k) in groups[comp]:
                corner_vals = []
                corner_pts = []
                for (dx, dy, dz) in _MC_CORNERS:
                    corner_vals.append(
                        float(vals[(i + dx) % R, (j + dy) % R, (k + dz) % R])
                    )
                    corner_pts.append(((i + dx) * h, (j + dy) * h, (k + dz) * h))
                case = 0
                for c in range(8):
                    if corner_vals[c] < 0.0:
                        case |= 1 << c
                if EDGE_TABLE[case] == 0:
                    continue
                everts: dict[int, int] = {}
                local: list[tuple[float, float, float]] = []
                for e in range(12):
                    if EDGE_TABLE[case] & (1 << e):
                        a, b = _MC_EDGES[e]
                        va, vb = corner_vals[a], corner_vals[b]
                        t = 0.5 if vb == va else -va / (vb - va)
                        t = min(max(t, 0.0), 1.0)
                        pa, pb = corner_pts[a], corner_pts[b]
                        local.append(tuple(pa[d] + t * (pb[d] - pa[d]) for d in range(3)))
                        everts[e] = len(local) - 1
                tri = TRI_TABLE[case]
                for v in local:
                    fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
                for t0 in range(0, len(tri), 3):
                    ia = n_written + everts[tri[t0]] + 1
                    ib = n_written + everts[tri[t0 + 1]] + 1
                    ic = n_written + everts[tri[t0 + 2]] + 1
                    fh.write(f"f {ia} {ib} {ic}\n")
                n_written += len(local)


def export_field(fld: TorusField, path) -> None:
    """Tab-separated field dump: one row (kappa_1 .. kappa_E, Phi) per node."""
    E = fld.n_axes
    coords = fld.axis_coordinates()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(f"kappa_{a + 1}" for a in range(E)) + "\tphi\n")
        it = np.ndindex(fld.values.shape)
        for idx in it:
            row = "\t".join(f"{coords[i]:.12g}" for i in idx)
            fh.write(f"{row}\t{fld.values[idx]:.12g}\n")
