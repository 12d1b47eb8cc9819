"""Composite Gauss-Legendre rules and overlap integrals of bound states."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .well import EVEN, EigenLevel, WellSpec, eval_wavefunction

INSIDE_ORDER = 64
INSIDE_PANELS = 4


@lru_cache(maxsize=16)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def panel_nodes(lo: float, hi: float, panels: int = INSIDE_PANELS, order: int = INSIDE_ORDER):
    """Nodes and weights of a composite Gauss-Legendre rule on [lo, hi]."""
    t, w = _leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate(f, lo: float, hi: float, panels: int = INSIDE_PANELS, order: int = INSIDE_ORDER) -> float:
    x, w = panel_nodes(lo, hi, panels, order)
    return float(np.dot(w, f(x)))


def tail_overlap(m: EigenLevel, n: EigenLevel) -> float:
    """Integral of phi_m phi_n over both outside regions (exact)."""
    right = m.edge * n.edge / (m.k2 + n.k2)
    sign = (1.0 if m.parity == EVEN else -1.0) * (1.0 if n.parity == EVEN else -1.0)
    return right * (1.0 + sign)


def overlap(m: EigenLevel, n: EigenLevel, well: WellSpec) -> float:
    """<phi_m, phi_n> over the real line: quadrature inside, exact tails."""
    inside = integrate(lambda x: eval_wavefunction(m, well, x) * eval_wavefunction(n, well, x), well.a, well.b)
    return inside + tail_overlap(m, n)
