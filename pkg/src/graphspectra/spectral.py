"""Eigenvalue computation by root scanning of vertex-condition determinants.

The direct system H(lambda) encodes continuity and delta conditions in the
per-edge solution basis: (cos kx, sin kx) for lambda = k^2 > 0, (1, x) for
lambda = 0 and (cosh kx, sinh kx) for lambda = -k^2 < 0.  Each vertex of
degree d contributes d-1 continuity rows plus one condition row (flux for
delta vertices, value for Dirichlet), giving a square 2E x 2E real matrix
whose nullity at lambda equals the eigenvalue multiplicity.

Roots are localized by scanning the smallest singular value of H(k) on a
uniform grid and refined by golden-section; sign changes of det H alone
would miss even-multiplicity roots.  Flux rows are pre-scaled by 1/max(k,1)
so matrix entries stay O(1) and the nullity threshold can be uniform.

scan_spectrum returns the full spectrum with k in [0, k_max]: lambda = 0 is
special-cased with the polynomial basis, negative eigenvalues are searched
on a bracket sized by the negative delta coefficients, and the found count
is cross-checked against the Weyl estimate total_length * k_max / pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NoConvergence, ValidationError, WeylCountMismatch
from .graphs import MetricGraph
from . import secular as _secular

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class EigenvalueRecord:
    """One eigenvalue with numerically determined multiplicity."""

    lam: float
    k: float                    # lam = k**2, or lam = -k**2 when negative
    multiplicity: int
    index_start: int            # first index in the ordered spectrum (0-based)
    residual: float             # smallest singular value at the root
    negative: bool = False
    degeneracy_suspected: bool = False

    @property
    def index_range(self) -> range:
        return range(self.index_start, self.index_start + self.multiplicity)


@dataclass(frozen=True)
class ScanOptions:
    grid_step: float | None = None      # default min(pi / (4 T), 0.01)
    refine_width: float = 1e-13
    accept_sigma: float = 1e-10
    nullity_rel: float = 1e-8
    merge_tol: float = 1e-10
    matrix: str = "direct"              # "direct" or "secular"
    weyl_check: bool = True
    include_nonpositive: bool = True


@dataclass(frozen=True)
class WeylEstimate:
    expected: float
    tolerance: float


def weyl_count(g: MetricGraph, k_max: float) -> WeylEstimate:
    """Leading-order count of eigenvalues with k <= k_max, with slack V + 2."""
    if k_max <= 0:
        raise ValidationError("k_max must be positive")
    return WeylEstimate(g.total_length * k_max / math.pi, len(g.vertices) + 2)


# -- direct-system assembly -------------------------------------------------------


def direct_matrices(
    g: MetricGraph,
    ks: np.ndarray,
    sign: int = 1,
    theta_at: tuple[str, float] | None = None,
) -> np.ndarray:
    """Stack of H(k) over a k-grid for the trig (sign=+1) or hyperbolic
    (sign=-1) basis; shape (len(ks), 2E, 2E).

    ``theta_at = (vertex id, theta)`` replaces that degree-1 vertex's
    condition row with cos(theta/2) * f'(v)/k - sin(theta/2) * f(v) = 0,
    the wavenumber-normalized interpolation between Neumann (theta = 0)
    and Dirichlet (theta = pi).
    """
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    if np.any(ks <= 0):
        raise ValidationError("k values must be positive")
    E = len(g.edges)
    n = 2 * E
    H = np.zeros((len(ks), n, n))
    lengths = g.lengths
    if sign > 0:
        cl = np.cos(ks[:, None] * lengths)
        sl = np.sin(ks[:, None] * lengths)
    else:
        cl = np.cosh(ks[:, None] * lengths)
        sl = np.sinh(ks[:, None] * lengths)
    one = np.ones_like(ks)
    zero = np.zeros_like(ks)
    s = np.maximum(ks, 1.0)  # flux-row scale

    def val(j, end):
        # coefficients of (a_j, b_j) for the value at the edge-end
        if end == 0:
            return one, zero
        return cl[:, j], sl[:, j]

    def der(j, end):
        # derivative into the edge at the edge-end
        if end == 0:
            return zero, ks.copy()
        if sign > 0:
            return ks * sl[:, j], -ks * cl[:, j]
        return -ks * sl[:, j], -ks * cl[:, j]

    row = 0
    for vid, cond in g.vertices:
        ends = g.edge_ends_at(vid)
        j0, e0 = ends[0]
        v0a, v0b = val(j0, e0)
        for (j, e) in ends[1:]:
            va, vb = val(j, e)
            H[:, row, 2 * j] += va
            H[:, row, 2 * j + 1] += vb
            H[:, row, 2 * j0] -= v0a
            H[:, row, 2 * j0 + 1] -= v0b
            row += 1
        if theta_at is not None and vid == theta_at[0]:
            if len(ends) != 1:
                raise ValidationError("theta condition requires a degree-1 vertex")
            th = theta_at[1]
            da, db = der(j0, e0)
            c, si = math.cos(th / 2.0), math.sin(th / 2.0)
            H[:, row, 2 * j0] += c * da / ks - si * v0a
            H[:, row, 2 * j0 + 1] += c * db / ks - si * v0b
        elif cond.is_dirichlet:
            H[:, row, 2 * j0] += v0a
            H[:, row, 2 * j0 + 1] += v0b
        else:
            for (j, e) in ends:
                da, db = der(j, e)
                H[:, row, 2 * j] += da / s
                H[:, row, 2 * j + 1] += db / s
            H[:, row, 2 * j0] -= cond.alpha * v0a / s
            H[:, row, 2 * j0 + 1] -= cond.alpha * v0b / s
        row += 1
    return H


def _direct_matrix_zero(g: MetricGraph) -> np.ndarray:
    """H at lambda = 0 in the polynomial basis (1, x) per edge."""
    E = len(g.edges)
    n = 2 * E
    H = np.zeros((n, n))
    row = 0
    for vid, cond in g.vertices:
        ends = g.edge_ends_at(vid)
        j0, e0 = ends[0]

        def val(j, end):
            return (1.0, 0.0) if end == 0 else (1.0, g.edges[j].length)

        def der(end):
            return 1.0 if end == 0 else -1.0

        v0a, v0b = val(j0, e0)
        for (j, e) in ends[1:]:
            va, vb = val(j, e)
            H[row, 2 * j] += va
            H[row, 2 * j + 1] += vb
            H[row, 2 * j0] -= v0a
            H[row, 2 * j0 + 1] -= v0b
            row += 1
        if cond.is_dirichlet:
            H[row, 2 * j0] += v0a
            H[row, 2 * j0 + 1] += v0b
        else:
            for (j, e) in ends:
                H[row, 2 * j + 1] += der(e)
            H[row, 2 * j0] -= cond.alpha * v0a
            H[row, 2 * j0 + 1] -= cond.alpha * v0b
        row += 1
    return H


def direct_matrix(
    g: MetricGraph, lam: float, theta_at: tuple[str, float] | None = None
) -> np.ndarray:
    """H(lambda) for any real lambda (sign-appropriate basis)."""
    if lam == 0.0:
        if theta_at is not None:
            raise ValidationError("theta condition supported for lambda > 0 only")
        return _direct_matrix_zero(g)
    k = math.sqrt(abs(lam))
    return direct_matrices(g, np.array([k]), sign=1 if lam > 0 else -1,
                           theta_at=theta_at)[0]


def direct_determinant(g: MetricGraph, lam: float) -> tuple[float, tuple[float, float]]:
    """det H(lambda) and the two smallest singular values (descending)."""
    H = direct_matrix(g, lam)
    sv = np.linalg.svd(H, compute_uv=False)
    return float(np.linalg.det(H)), (float(sv[-2]), float(sv[-1]))


def nullity(H: np.ndarray, rel: float = 1e-8) -> int:
    """Number of singular values below rel * max(||H||_2, 1)."""
    sv = np.linalg.svd(H, compute_uv=False)
    tau = rel * max(float(sv[0]), 1.0)
    return int(np.sum(sv < tau))


def multiplicity_at(g: MetricGraph, lam: float, rel: float = 1e-8) -> int:
    """Eigenvalue multiplicity at lambda; 0 when lambda is not an eigenvalue."""
    return nullity(direct_matrix(g, lam), rel)


# -- root scanning -----------------------------------------------------------------


def _sigma_min_factory(g: MetricGraph, options: ScanOptions, sign: int = 1,
                       theta_at=None):
    if options.matrix == "secular":
        if sign < 0:
            raise ValidationError("secular scan covers positive eigenvalues only")

        def smin_grid(ks):
            return _secular.secular_smallest_singulars(g, ks)[:, 0]

        def smin_one(k):
            return float(
                _secular.secular_smallest_singulars(g, np.array([k]))[0, 0]
            )

        def mult_at(k):
            sys = _secular.assemble_secular_system(g, float(k))
            return nullity(sys.secular_matrix(), options.nullity_rel)

    else:

        def smin_grid(ks):
            H = direct_matrices(g, ks, sign=sign, theta_at=theta_at)
            return np.linalg.svd(H, compute_uv=False)[:, -1]

        def smin_one(k):
            H = direct_matrices(g, np.array([k]), sign=sign, theta_at=theta_at)
            return float(np.linalg.svd(H[0], compute_uv=False)[-1])

        def mult_at(k):
            H = direct_matrices(g, np.array([k]), sign=sign, theta_at=theta_at)
            return nullity(H[0], options.nullity_rel)

    return smin_grid, smin_one, mult_at


def golden_refine(f, a: float, b: float, width: float = 1e-13,
                  sigma_stop: float = 1e-11, max_iter: int = 110) -> tuple[float, float]:
    """Golden-section minimizer for the V-shaped smallest singular value."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
        if (b - a) < width:
            break
        if min(fc, fd) < sigma_stop and (b - a) < 1e-11:
            break
    x = c if fc < fd else d
    return (x, fc if fc < fd else fd)


def _local_minima(sv: np.ndarray) -> list[int]:
    idx = []
    n = len(sv)
    if n >= 2 and sv[0] <= sv[1]:
        idx.append(0)
    for i in range(1, n - 1):
        if sv[i] < sv[i - 1] and sv[i] <= sv[i + 1]:
            idx.append(i)
    if n >= 2 and sv[-1] < sv[-2]:
        idx.append(n - 1)
    return idx


def _resolve_bracket(a, b, smin_grid, smin_one, mult_at, options, depth=0):
    """Roots inside one bracket; rescans the remainder after each accepted
    root so that clusters tighter than the grid step are not lost."""
    k_star, res = golden_refine(
        smin_one, a, b, options.refine_width, options.accept_sigma / 10
    )
    m = mult_at(k_star)
    if m < 1:
        return []
    roots = [(k_star, res, m)]
    if depth >= 2:
        return roots
    w = max(1e-7, (b - a) / 64.0)
    for lo, hi in ((a, k_star - w), (k_star + w, b)):
        if hi - lo <= 4.0 * w:
            continue
        sub = np.linspace(lo, hi, 24)
        sv = smin_grid(sub)
        minima = sorted(_local_minima(sv), key=lambda j: sv[j])[:3]
        for j in minima:
            a2 = sub[j - 1] if j > 0 else lo
            b2 = sub[j + 1] if j + 1 < len(sub) else hi
            roots.extend(
                _resolve_bracket(a2, b2, smin_grid, smin_one, mult_at,
                                 options, depth + 1)
            )
    return roots


def _scan_positive_branch(g, k_lo, k_hi, options, sign=1, theta_at=None):
    """Refined roots (k, residual, multiplicity) of the chosen determinant."""
    smin_grid, smin_one, mult_at = _sigma_min_factory(g, options, sign, theta_at)
    step = options.grid_step
    if step is None:
        step = min(math.pi / (4.0 * g.total_length), 0.01)
    ks = np.arange(k_lo, k_hi + step / 2, step)
    if len(ks) < 3:
        ks = np.linspace(k_lo, k_hi, 5)
    sv = smin_grid(ks)
    roots = []
    n = len(ks)
    for i in _local_minima(sv):
        # widen to the surrounding local maxima: a dip of a nearby second
        # root can hide inside the monotone flank of a deeper root
        il, ir = i, i
        while il > 0 and sv[il - 1] > sv[il]:
            il -= 1
        while ir + 1 < n and sv[ir + 1] > sv[ir]:
            ir += 1
        a = ks[il] if il < i else max(ks[0] / 10.0, 1e-8)
        b = ks[ir] if ir > i else k_hi + step
        for k_star, res, m in _resolve_bracket(
            a, b, smin_grid, smin_one, mult_at, options
        ):
            if k_star > k_hi + 1e-9:
                continue
            roots.append((k_star, res, m))
    roots.sort()
    merged: list[list] = []
    for k_star, res, m in roots:
        if merged and abs(k_star - merged[-1][0]) < options.merge_tol:
            prev = merged[-1]
            prev[1] = min(prev[1], res)
            prev[3] = True  # two refinements inside merge_tol
            prev[2] = max(prev[2], m)
        else:
            merged.append([k_star, res, m, False])
    out = []
    for k_star, res, m, suspected in merged:
        # a pair of simple refinements closer than merge_tol whose joint
        # nullity never showed rank-2 is reported as multiplicity 2, flagged
        if suspected and m == 1:
            m, flag = 2, True
        else:
            flag = False
        out.append((k_star, res, m, flag))
    return out


def scan_spectrum(
    g: MetricGraph, k_max: float, options: ScanOptions = ScanOptions()
) -> list[EigenvalueRecord]:
    """All eigenvalues with k in [0, k_max], sorted, with multiplicities.

    Includes lambda = 0 (polynomial basis) and, when some delta coefficient
    is negative, the negative spectrum lambda = -kappa^2.  Raises
    WeylCountMismatch when the found count (with multiplicity) deviates from
    total_length * k_max / pi by more than V + 2 even after one rescan at
    half the grid step.
    """
    if k_max <= 0:
        raise ValidationError("k_max must be positive")

    def run(opts: ScanOptions) -> list[EigenvalueRecord]:
        records: list[EigenvalueRecord] = []
        if opts.include_nonpositive and opts.matrix == "direct":
            negs = [min(c.alpha, 0.0) for _, c in g.vertices if not c.is_dirichlet]
            if any(a < 0 for a in negs):
                kap_hi = 1.0 + sum(-a for a in negs)
                neg_opts = replace(opts, grid_step=min(0.01, kap_hi / 64))
                for kap, res, m, flag in _scan_positive_branch(
                    g, neg_opts.grid_step, kap_hi, neg_opts, sign=-1
                ):
                    records.append(
                        EigenvalueRecord(-kap * kap, kap, m, 0, res, True, flag)
                    )
            m0 = multiplicity_at(g, 0.0, opts.nullity_rel)
            if m0 > 0:
                H0 = _direct_matrix_zero(g)
                res0 = float(np.linalg.svd(H0, compute_uv=False)[-1])
                records.append(EigenvalueRecord(0.0, 0.0, m0, 0, res0))
        step = opts.grid_step
        if step is None:
            step = min(math.pi / (4.0 * g.total_length), 0.01)
        for k, res, m, flag in _scan_positive_branch(g, step, k_max, opts):
            records.append(EigenvalueRecord(k * k, k, m, 0, res, False, flag))
        records.sort(key=lambda r: r.lam)
        out = []
        idx = 0
        for r in records:
            out.append(replace(r, index_start=idx))
            idx += r.multiplicity
        return out

    records = run(options)
    if options.weyl_check:
        est = weyl_count(g, k_max)
        count = sum(r.multiplicity for r in records)
        if abs(count - est.expected) > est.tolerance:
            finer = replace(
                options,
                grid_step=(options.grid_step or min(math.pi / (4 * g.total_length), 0.01)) / 2,
            )
            records = run(finer)
            count = sum(r.multiplicity for r in records)
            if abs(count - est.expected) > est.tolerance:
                raise WeylCountMismatch(
                    f"found {count} eigenvalues up to k={k_max}, "
                    f"expected {est.expected:.2f} +- {est.tolerance}"
                )
    return records


def scan_up_to_count(
    g: MetricGraph, n_eigs: int, options: ScanOptions = ScanOptions()
) -> list[EigenvalueRecord]:
    """Scan far enough to capture at least n_eigs eigenvalues (with mult.)."""
    if n_eigs < 1:
        raise ValidationError("need n_eigs >= 1")
    k_max = max((n_eigs + len(g.vertices) + 3) * math.pi / g.total_length, 1.0)
    for _ in range(8):
        records = scan_spectrum(g, k_max, options)
        if sum(r.multiplicity for r in records) >= n_eigs:
            return records
        k_max *= 1.5
    raise NoConvergence(f"could not collect {n_eigs} eigenvalues")


def eigenvalue_list(records: list[EigenvalueRecord]) -> np.ndarray:
    """Flatten records to a lambda array repeated by multiplicity."""
    vals = []
    for r in records:
        vals.extend([r.lam] * r.multiplicity)
    return np.array(vals)
