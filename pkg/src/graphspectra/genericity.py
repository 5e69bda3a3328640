"""Empirical genericity verification: simplicity, vertex non-vanishing,
interlacing under vertex-coefficient changes, and the theta-continuation
that walks the spectrum down the secular manifold.

The genericity report examines the first N eigenpairs of a graph and
classifies every eigenfunction as vertex-nonvanishing, loop-supported or
vanishing; the simplicity verdict compares consecutive spectral gaps
against a threshold gap_coeff * (1 + lambda) and the numerically detected
multiplicities.  Dirichlet vertices are exempt from the vanishing check
(their zero is imposed by the condition).

Circle-equivalent graphs are refused: their double eigenvalues cannot be
resolved by any length change, so no genericity verdict is meaningful for
them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CircleExcluded,
    DirichletAtInternalVertex,
    NoConvergence,
    NoPointFound,
    PathThroughDegeneracy,
    ValidationError,
)
from .eigenmode import (
    LOOP_SUPPORTED,
    NONVANISHING,
    EigenFunction,
    classify_support,
    eigenfunctions_at,
    evaluate,
    vertex_values,
)
from .graphs import (
    LoopDescriptor,
    MetricGraph,
    VertexCondition,
    delta,
    dirichlet,
    perturb_lengths,
    canonical_signature,
)
from .secular import torus_values
from .spectral import (
    EigenvalueRecord,
    ScanOptions,
    direct_matrices,
    eigenvalue_list,
    nullity,
    scan_up_to_count,
)

GAP_COEFF = 1e-6  # default threshold: simple iff gap > GAP_COEFF * (1 + lambda)


@dataclass(frozen=True)
class EigenClassification:
    index: int
    lam: float
    multiplicity: int
    kind: str
    vanishing_vertices: tuple[str, ...] = ()
    loop: LoopDescriptor | None = None


@dataclass(frozen=True)
class GenericityReport:
    graph_signature: str
    n_examined: int
    gap_coeff: float
    min_spectral_gap: float
    min_gap_margin: float
    classifications: tuple[EigenClassification, ...]
    vanishing_incidents: tuple[tuple[int, str], ...]
    loop_states: tuple[tuple[int, LoopDescriptor], ...]
    verdict_simple: bool
    verdict_nonvanishing: bool
    verdict_loops: bool

    @property
    def passes(self) -> bool:
        return self.verdict_simple and self.verdict_nonvanishing and self.verdict_loops

    def to_rows(self) -> list[tuple]:
        rows = []
        for c in self.classifications:
            detail = ""
            if c.kind == LOOP_SUPPORTED and c.loop is not None:
                detail = "loop@" + c.loop.attachment_vertex
            elif c.vanishing_vertices:
                detail = ",".join(c.vanishing_vertices)
            rows.append((c.index, c.lam, c.multiplicity, c.kind, detail))
        return rows

    def to_text(self) -> str:
        lines = [
            f"examined {self.n_examined} eigenvalues",
            f"min spectral gap {self.min_spectral_gap:.6g} "
            f"(margin {self.min_gap_margin:.6g} at coeff {self.gap_coeff:g})",
            f"simple: {self.verdict_simple}",
            f"nonvanishing on delta vertices: {self.verdict_nonvanishing}",
            f"loop states well-formed: {self.verdict_loops}",
        ]
        if self.loop_states:
            lines.append(f"loop-supported states: {[i for i, _ in self.loop_states]}")
        if self.vanishing_incidents:
            lines.append(f"vanishing incidents: {self.vanishing_incidents}")
        return "\n".join(lines)


def genericity_report(
    g: MetricGraph, n_eigs: int, gap_coeff: float = GAP_COEFF
) -> GenericityReport:
    """Classify the first n_eigs eigenpairs against the genericity clauses."""
    if n_eigs < 1:
        raise ValidationError("need n_eigs >= 1")
    if g.is_circle():
        raise CircleExcluded("circle-equivalent graph: degeneracies are structural")
    records = scan_up_to_count(g, n_eigs)
    used: list[EigenvalueRecord] = []
    count = 0
    for r in records:
        used.append(r)
        count += r.multiplicity
        if count >= n_eigs:
            break

    lams = eigenvalue_list(used)
    gaps = np.diff(lams)
    if len(gaps):
        margins = gaps - gap_coeff * (1.0 + np.abs(lams[:-1]))
        min_gap = float(gaps.min())
        min_margin = float(margins.min())
    else:
        min_gap, min_margin = math.inf, math.inf
    all_simple = all(r.multiplicity == 1 for r in used)
    verdict_simple = all_simple and min_margin > 0.0

    classifications = []
    vanishing: list[tuple[int, str]] = []
    loop_states: list[tuple[int, LoopDescriptor]] = []
    for r in used:
        for f in eigenfunctions_at(g, r):
            cl = classify_support(g, f)
            classifications.append(
                EigenClassification(
                    f.index, r.lam, r.multiplicity, cl.kind,
                    cl.vanishing_vertices, cl.loop,
                )
            )
            if cl.kind == LOOP_SUPPORTED:
                loop_states.append((f.index, cl.loop))
            elif cl.kind != NONVANISHING:
                vanishing.extend((f.index, vid) for vid in cl.vanishing_vertices)

    # uniqueness: one loop state per (loop, eigenvalue family member)
    seen_pairs = set()
    loops_ok = True
    for idx, loop in loop_states:
        key = (loop.edge_chain, round(classifications[idx].lam, 9))
        if key in seen_pairs:
            loops_ok = False
        seen_pairs.add(key)

    return GenericityReport(
        graph_signature=canonical_signature(g),
        n_examined=int(sum(r.multiplicity for r in used)),
        gap_coeff=gap_coeff,
        min_spectral_gap=min_gap,
        min_gap_margin=min_margin,
        classifications=tuple(classifications),
        vanishing_incidents=tuple(vanishing),
        loop_states=tuple(loop_states),
        verdict_simple=verdict_simple,
        verdict_nonvanishing=not vanishing,
        verdict_loops=loops_ok,
    )


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    seed: int
    passed: bool
    verdict_simple: bool
    verdict_nonvanishing: bool
    verdict_loops: bool


@dataclass(frozen=True)
class TrialSummary:
    outcomes: tuple[TrialOutcome, ...]
    pass_fraction: float  # nan for zero trials

    @property
    def undefined(self) -> bool:
        return math.isnan(self.pass_fraction)


def randomized_genericity_trial(
    g: MetricGraph,
    trials: int,
    epsilon: float,
    n_eigs: int,
    seed: int,
    gap_coeff: float = GAP_COEFF,
) -> TrialSummary:
    """Perturb lengths per trial and aggregate genericity verdicts.

    For continuous random perturbations the expected pass fraction is 1;
    trials = 0 yields an empty summary with pass_fraction = nan.
    """
    if g.is_circle():
        raise CircleExcluded("circle-equivalent graph")
    if trials < 0:
        raise ValidationError("trials must be >= 0")
    outcomes = []
    for t in range(trials):
        gp = perturb_lengths(g, epsilon, seed + t)
        rep = genericity_report(gp, n_eigs, gap_coeff)
        outcomes.append(
            TrialOutcome(
                t, seed + t, rep.passes,
                rep.verdict_simple, rep.verdict_nonvanishing, rep.verdict_loops,
            )
        )
    frac = (
        sum(1 for o in outcomes if o.passed) / trials if trials else math.nan
    )
    return TrialSummary(tuple(outcomes), frac)


# -- interlacing --------------------------------------------------------------


@dataclass(frozen=True)
class InterlacingPairReport:
    alpha: float            # math.inf encodes Dirichlet
    alpha_prime: float
    reversed_form: bool     # True when alpha > alpha_prime
    n_checked: int
    margin: float           # most negative interlacing slack (>= -tol passes)
    strict_checked: int
    strict_margin: float    # min strict slack over eigenvalues with preconditions
    strict_violations: tuple[int, ...]


def _with_vertex_condition(g: MetricGraph, vid: str, alpha: float) -> MetricGraph:
    deg = g.degrees()[vid]
    if math.isinf(alpha):
        if deg != 1:
            raise DirichletAtInternalVertex(
                f"alpha = inf requested at {vid} of degree {deg}"
            )
        cond = dirichlet()
    else:
        cond = delta(alpha)
    verts = [(i, cond if i == vid else c) for i, c in g.vertices]
    return MetricGraph.from_parts(
        verts, [(e.id, e.u, e.v, e.length) for e in g.edges],
        allow_disconnected=not g.is_connected,
    )


def _flux_sum_at(f: EigenFunction, vid: str) -> float:
    from .eigenmode import _end_derivative_into

    g = f.graph
    return sum(
        _end_derivative_into(g, f.lam, f.coefficients, j, e)
        for j, e in g.edge_ends_at(vid)
    )


def verify_interlacing(
    g: MetricGraph,
    vid: str,
    alpha_pairs,
    n_eigs: int = 20,
    gap_coeff: float = GAP_COEFF,
) -> list[InterlacingPairReport]:
    """Check lambda_{n-1}(G_hi) <= lambda_n(G_lo) <= lambda_n(G_hi) per pair.

    Pairs with alpha > alpha' are checked in the equivalent reversed form.
    The strict version is asserted only where the middle eigenvalue is
    simple and its eigenfunction has |f(v)| + |sum f'(v)| above tolerance.
    """
    g.condition(vid)  # raises UnknownId early for a bad vertex
    reports = []
    for alpha, alpha_prime in alpha_pairs:
        a, ap = float(alpha), float(alpha_prime)
        if a == ap:
            raise ValidationError("interlacing pair needs two distinct alphas")
        lo_a, hi_a = (a, ap) if a < ap else (ap, a)
        g_lo = _with_vertex_condition(g, vid, lo_a)
        g_hi = _with_vertex_condition(g, vid, hi_a)
        rec_lo = scan_up_to_count(g_lo, n_eigs + 1)
        rec_hi = scan_up_to_count(g_hi, n_eigs + 1)
        lam_lo = eigenvalue_list(rec_lo)
        lam_hi = eigenvalue_list(rec_hi)
        n = min(n_eigs, len(lam_lo), len(lam_hi))

        margin = math.inf
        for i in range(n):
            margin = min(margin, lam_hi[i] - lam_lo[i])
            if i >= 1:
                margin = min(margin, lam_lo[i] - lam_hi[i - 1])

        strict_checked = 0
        strict_margin = math.inf
        violations = []
        flat_idx = 0
        for r in rec_lo:
            i = flat_idx
            flat_idx += r.multiplicity
            if i >= n:
                break
            if r.multiplicity != 1:
                continue
            gap_prev = lam_lo[i] - lam_lo[i - 1] if i > 0 else math.inf
            gap_next = lam_lo[i + 1] - lam_lo[i] if i + 1 < len(lam_lo) else math.inf
            if min(gap_prev, gap_next) <= gap_coeff * (1 + abs(lam_lo[i])):
                continue
            fs = eigenfunctions_at(g_lo, r)
            fv = vertex_values(fs[0])[vid]
            flux = _flux_sum_at(fs[0], vid)
            if abs(fv) + abs(flux) <= 1e-6:
                continue
            strict_checked += 1
            slack = lam_hi[i] - lam_lo[i]
            if i >= 1:
                slack = min(slack, lam_lo[i] - lam_hi[i - 1])
            strict_margin = min(strict_margin, slack)
            if slack <= 0:
                violations.append(i)
        reports.append(
            InterlacingPairReport(
                a, ap, a > ap, n, float(margin),
                strict_checked, float(strict_margin), tuple(violations),
            )
        )
    return reports


# -- point picking -------------------------------------------------------------


def pick_nonvanishing_point(
    g: MetricGraph,
    edge_id: str,
    x0: float,
    radius: float,
    n_eigs: int,
    max_candidates: int = 64,
    tau_point: float = 1e-6,
) -> float:
    """A coordinate y near x0 where none of the first n_eigs eigenfunctions
    vanish, unless they vanish identically on the edge."""
    e = g.edge(edge_id)
    if not (0.0 < x0 - radius and x0 + radius < e.length):
        raise ValidationError("window not strictly inside the edge")
    if n_eigs == 0:
        return float(x0)
    records = scan_up_to_count(g, n_eigs)
    funcs: list[EigenFunction] = []
    for r in records:
        funcs.extend(eigenfunctions_at(g, r))
        if len(funcs) >= n_eigs:
            break
    funcs = funcs[:n_eigs]
    j = g.edge_index(edge_id)
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    for i in range(max_candidates):
        # golden-ratio low-discrepancy sweep of the window
        y = x0 + radius * (2.0 * ((i * golden) % 1.0) - 1.0)
        ok = True
        for f in funcs:
            if np.abs(f.coefficients[j]).max() <= 1e-10:
                continue  # identically zero on the edge: exempt
            if abs(evaluate(f, edge_id, y)) <= tau_point:
                ok = False
                break
        if ok:
            return float(y)
    raise NoPointFound(
        f"no nonvanishing point among {max_candidates} candidates "
        f"(saturated window indicates a bug)"
    )


# -- theta continuation ----------------------------------------------------------


@dataclass(frozen=True)
class ThetaSample:
    theta: float
    lam: float
    extended_length: float
    torus_point: tuple[float, ...]
    phi_residual: float


@dataclass(frozen=True)
class ThetaPath:
    leaf: str
    n_start: int
    n_turns: int
    base_length: float
    samples: tuple[ThetaSample, ...]

    @property
    def max_phi_residual(self) -> float:
        return max(s.phi_residual for s in self.samples)


def _solve_theta_eigenvalue(g, leaf, theta, k_lo, k_hi, opts) -> tuple[float, float]:
    """Smallest-singular-value minimum of H(k; theta) inside [k_lo, k_hi]."""
    from .spectral import golden_refine

    sub = np.linspace(k_lo, k_hi, 41)
    H = direct_matrices(g, sub, sign=1, theta_at=(leaf, theta))
    sv = np.linalg.svd(H, compute_uv=False)[:, -1]
    j = int(np.argmin(sv))
    a = sub[max(j - 1, 0)]
    b = sub[min(j + 1, len(sub) - 1)]

    def smin(k):
        Hk = direct_matrices(g, np.array([k]), sign=1, theta_at=(leaf, theta))
        return float(np.linalg.svd(Hk[0], compute_uv=False)[-1])

    return golden_refine(smin, a, b, opts.refine_width, opts.accept_sigma / 10)


def trace_theta_path(
    g: MetricGraph,
    leaf: str,
    n_start: int,
    n_turns: int,
    steps_per_turn: int = 200,
    options: ScanOptions = ScanOptions(),
) -> ThetaPath:
    """Continue the n_start-th positive eigenvalue while the leaf condition
    winds down through n_turns full 2 pi turns.

    The leaf edge is virtually prolonged by (theta_v - theta) / (2 k(theta));
    the resulting torus point k * l(theta) mod 2 pi stays on the secular
    manifold, which is monitored through the recorded Phi residuals.  The
    endpoint eigenvalue is the (n_start - n_turns)-th of the original graph.
    """
    deg = g.degrees()
    if deg[leaf] != 1:
        raise ValidationError(f"{leaf} is not a degree-1 vertex")
    cond = g.condition(leaf)
    if cond.is_robin:
        raise ValidationError("theta path starts from an NK or Dirichlet leaf")
    if not g.nk_dirichlet_only():
        raise ValidationError("theta path requires an NK/Dirichlet graph")
    if n_turns < 0 or n_turns % 2 != 0:
        raise ValidationError("n_turns must be even and nonnegative")
    if n_start < 1 or (n_turns and n_start - n_turns < 1):
        raise ValidationError("path would walk below the bottom of the spectrum")

    theta_v = math.pi if cond.is_dirichlet else 0.0
    records = scan_up_to_count(g, n_start + 1)
    flat = []
    for r in records:
        if r.lam > 0:
            flat.extend([r] * r.multiplicity)
    if len(flat) < n_start:
        raise NoConvergence("not enough positive eigenvalues found")
    start_rec = flat[n_start - 1]
    if start_rec.multiplicity != 1:
        raise PathThroughDegeneracy(
            f"starting eigenvalue {start_rec.lam} is not simple"
        )

    j_leaf = g.edge_ends_at(leaf)[0][0]
    base_len = g.edges[j_leaf].length
    lengths = g.lengths.copy()

    def sample_at(theta, k):
        ell = base_len + (theta_v - theta) / (2.0 * k)
        kap = lengths * k
        kap[j_leaf] = k * ell
        kap = np.mod(kap, 2.0 * math.pi)
        resid = abs(float(torus_values(g, kap[None, :])[0]))
        return ThetaSample(theta, k * k, float(ell), tuple(kap), resid)

    k_cur = start_rec.k
    samples = [sample_at(theta_v, k_cur)]
    if n_turns == 0:
        return ThetaPath(leaf, n_start, 0, base_len, tuple(samples))

    n_steps = steps_per_turn * n_turns
    thetas = np.linspace(theta_v, theta_v - 2.0 * math.pi * n_turns, n_steps + 1)
    slope = 1.0 / (2.0 * g.total_length)  # mean |dk/dtheta| from Weyl spacing
    theta_prev = theta_v
    for theta in thetas[1:]:
        target = theta
        # adaptive sub-stepping when the solver loses the branch
        pending = [target]
        guard = 0
        while pending:
            th = pending[-1]
            dth = theta_prev - th
            w_down = max(6.0 * slope * dth, 0.03)
            k_lo = max(k_cur - w_down, 1e-4)
            k_hi = k_cur + max(0.2 * w_down, 0.005)
            k_new, res = _solve_theta_eigenvalue(g, leaf, th, k_lo, k_hi, options)
            scale_ok = res < 1e-8
            interior = k_lo + 1e-12 < k_new < k_hi - 1e-12
            if scale_ok and interior:
                if dth > 1e-12:
                    slope = max(abs(k_cur - k_new) / dth, 1e-4)
                k_cur = k_new
                theta_prev = th
                pending.pop()
            else:
                guard += 1
                if guard > 40 or dth < 1e-9:
                    raise NoConvergence(
                        f"lost the eigenvalue branch near theta = {th}"
                    )
                pending.append(theta_prev - dth / 2.0)
        # leaf-edge degeneracy check: eigenfunction must live on the leaf edge
        H = direct_matrices(g, np.array([k_cur]), sign=1, theta_at=(leaf, theta_prev))[0]
        u, sv, vt = np.linalg.svd(H)
        if nullity(H) >= 2:
            raise PathThroughDegeneracy(f"multiple eigenvalue at theta = {theta_prev}")
        vec = vt[-1].reshape(-1, 2)
        if np.abs(vec[j_leaf]).max() < 1e-8 * np.abs(vec).max():
            raise PathThroughDegeneracy(
                f"eigenfunction vanishes on the leaf edge at theta = {theta_prev}"
            )
        samples.append(sample_at(theta_prev, k_cur))
    return ThetaPath(leaf, n_start, n_turns, base_len, tuple(samples))
