"""Reference graphs used across tests, demos and acceptance checks."""

from __future__ import annotations

import math

from .graphs import MetricGraph, build_graph, delta, dirichlet, nk

TWO_PI = 2.0 * math.pi


def interval_dirichlet(length: float = math.pi) -> MetricGraph:
    """Single edge, both ends Dirichlet: lambda_n = (n pi / l)^2, n >= 1."""
    return build_graph({
        "vertices": [("u", dirichlet()), ("v", dirichlet())],
        "edges": [("e", "u", "v", length)],
    })


def interval_nk(length: float = math.pi) -> MetricGraph:
    """Single edge, both ends NK: lambda_n = (n pi / l)^2, n >= 0."""
    return build_graph({
        "vertices": [("u", nk()), ("v", nk())],
        "edges": [("e", "u", "v", length)],
    })


def interval_mixed(length: float = math.pi) -> MetricGraph:
    """NK at u, Dirichlet at v: lambda_n = ((n + 1/2) pi / l)^2."""
    return build_graph({
        "vertices": [("u", nk()), ("v", dirichlet())],
        "edges": [("e", "u", "v", length)],
    })


def circle(length: float = TWO_PI) -> MetricGraph:
    """One looping edge at one NK vertex of degree 2."""
    return build_graph({
        "vertices": [("a", nk())],
        "edges": [("loop", "a", "a", length)],
    })


def figure8(l1: float = TWO_PI, l2: float = TWO_PI * math.sqrt(2.0)) -> MetricGraph:
    """Two looping edges at one NK vertex of degree 4."""
    return build_graph({
        "vertices": [("c", nk())],
        "edges": [("l1", "c", "c", l1), ("l2", "c", "c", l2)],
    })


def star3(lengths=(1.0, 1.3, 1.7), leaves: str = "dirichlet") -> MetricGraph:
    """Three edges from an NK center; leaf condition dirichlet or nk."""
    leaf = dirichlet if leaves == "dirichlet" else nk
    return build_graph({
        "vertices": [("c", nk()), ("v1", leaf()), ("v2", leaf()), ("v3", leaf())],
        "edges": [
            ("e1", "c", "v1", lengths[0]),
            ("e2", "c", "v2", lengths[1]),
            ("e3", "c", "v3", lengths[2]),
        ],
    })


def mandarin3(lengths=(1.0, 1.3, 1.7)) -> MetricGraph:
    """Two NK vertices joined by three parallel edges."""
    return build_graph({
        "vertices": [("u", nk()), ("v", nk())],
        "edges": [
            ("e1", "u", "v", lengths[0]),
            ("e2", "u", "v", lengths[1]),
            ("e3", "u", "v", lengths[2]),
        ],
    })


def lollipop(loop_length: float = TWO_PI, tail_length: float = 1.3) -> MetricGraph:
    """A looping edge plus a pendant edge, all NK."""
    return build_graph({
        "vertices": [("a", nk()), ("p", nk())],
        "edges": [("loop", "a", "a", loop_length), ("tail", "a", "p", tail_length)],
    })


def impure_loop(total: float = TWO_PI, alpha0: float = 1.0) -> MetricGraph:
    """A loop of two equal edges with one Robin vertex and one NK vertex."""
    half = total / 2.0
    return build_graph({
        "vertices": [("w1", delta(alpha0)), ("w2", nk())],
        "edges": [("e1", "w1", "w2", half), ("e2", "w2", "w1", half)],
    })


def cycle_with_tail(cycle_lengths=(1.0, 1.0, 1.0), tail_length: float = 1.0) -> MetricGraph:
    """Triangle of NK vertices with a pendant edge to a fourth NK vertex."""
    return build_graph({
        "vertices": [("a", nk()), ("b", nk()), ("c", nk()), ("t", nk())],
        "edges": [
            ("e1", "a", "b", cycle_lengths[0]),
            ("e2", "b", "c", cycle_lengths[1]),
            ("e3", "c", "a", cycle_lengths[2]),
            ("tail", "a", "t", tail_length),
        ],
    })


def acceptance_corpus() -> dict[str, MetricGraph]:
    """The eight NK/Dirichlet graphs used for the method-agreement check."""
    return {
        "interval_dirichlet": interval_dirichlet(),
        "interval_mixed": interval_mixed(),
        "circle": circle(),
        "star3_dirichlet": star3(),
        "star3_neumann": star3(leaves="nk"),
        "mandarin3": mandarin3(),
        "figure8": figure8(),
        "lollipop": lollipop(),
    }
