"""
Adaptive panel quadrature on an interval.

Panels carry a 7-point and a 15-point Gauss-Legendre rule; their difference is
the panel error estimate. Refinement is global: the panel with the largest
estimate is bisected until the summed estimate meets the tolerance. The final
rule keeps the 15-point nodes of every panel so callers can reuse them for
several integrands sharing the same singular profile.
"""

import heapq
import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from horizonlab.errors import QuadratureAccuracyError

logger = logging.getLogger(__name__)

_LOW_X, _LOW_W = leggauss(7)
_HIGH_X, _HIGH_W = leggauss(15)

MAX_PANELS = 4000


@dataclass(frozen=True)
class PanelRule:
    """Composite rule on [a, b]: ``nodes`` and ``weights`` integrate smooth functions."""

    nodes: np.ndarray
    weights: np.ndarray
    estimate: np.ndarray
    error: np.ndarray
    panels: int


def graded_breakpoints(a: float, b: float, width: float, ratio: float = 2.0) -> np.ndarray:
    """
    Breakpoints on [a, b] graded geometrically away from ``a``.

    The first panel has length ``width``; each following panel is ``ratio``
    times longer until ``b`` is reached.
    """
    length = b - a
    if width <= 0 or width >= length:
        return np.array([a, b])
    points = [a]
    step = width
    while points[-1] + step < b:
        points.append(points[-1] + step)
        step *= ratio
    if b - points[-1] < 0.25 * (points[-1] - points[-2]) and len(points) > 2:
        points.pop()
    points.append(b)
    return np.asarray(points, dtype=float)


def _panel(integrand, lo: float, hi: float):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x_hi = mid + half * _HIGH_X
    x_lo = mid + half * _LOW_X
    f_hi = np.atleast_2d(integrand(x_hi))
    f_lo = np.atleast_2d(integrand(x_lo))
    est_hi = half * f_hi @ _HIGH_W
    est_lo = half * f_lo @ _LOW_W
    return est_hi, np.abs(est_hi - est_lo)


def adaptive_panels(
    integrand: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    rtol: float,
    atol: float = 0.0,
    max_panels: int = MAX_PANELS,
) -> PanelRule:
    """
    Globally adaptive composite Gauss-Legendre quadrature.

    Args:
        integrand: Vectorized function of the abscissae; may return shape
            (k, len(x)) to control k integrals with one rule
        breakpoints: Initial panel boundaries (sorted)
        rtol: Relative tolerance, enforced separately for each of the k integrals
        atol: Absolute floor for the tolerance
        max_panels: Panel budget

    Returns:
        PanelRule with the 15-point nodes of the final panels

    Raises:
        QuadratureAccuracyError: the panel budget was exhausted
    """
    breakpoints = np.asarray(breakpoints, dtype=float)
    initial = [
        (lo, hi) + _panel(integrand, lo, hi) for lo, hi in zip(breakpoints[:-1], breakpoints[1:])
    ]
    total = sum(item[2] for item in initial)
    err_total = sum(item[3] for item in initial)

    def priority(err):
        # errors of the k integrals are compared relative to their own totals
        return -float(np.max(err / np.maximum(np.abs(total), 1e-300)))

    heap = []
    for counter, (lo, hi, est, err) in enumerate(initial):
        heap.append((priority(err), counter, lo, hi, est, err))
    heapq.heapify(heap)
    counter = len(heap)

    def satisfied():
        return np.all(err_total <= np.maximum(rtol * np.abs(total), atol))

    while not satisfied():
        if len(heap) >= max_panels:
            raise QuadratureAccuracyError(
                f"adaptive quadrature did not reach rtol={rtol:g} within {max_panels} panels",
                estimate=float(total[0]),
                error=float(err_total[0]),
            )
        _, _, lo, hi, est, err = heapq.heappop(heap)
        total = total - est
        err_total = err_total - err
        mid = 0.5 * (lo + hi)
        for a, b in ((lo, mid), (mid, hi)):
            e, r = _panel(integrand, a, b)
            total = total + e
            err_total = err_total + r
            heapq.heappush(heap, (priority(r), counter, a, b, e, r))
            counter += 1

    panels = sorted((item[2], item[3]) for item in heap)
    lo = np.array([p[0] for p in panels])
    hi = np.array([p[1] for p in panels])
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * _HIGH_X[None, :]).ravel()
    weights = (half[:, None] * _HIGH_W[None, :]).ravel()
    logger.debug("adaptive quadrature: %d panels, estimate=%s", len(panels), total)
    return PanelRule(
        nodes=nodes, weights=weights, estimate=total, error=err_total, panels=len(panels)
    )


def fixed_panels(breakpoints: Sequence[float], order: int = 15):
    """Composite Gauss-Legendre nodes and weights on fixed panels."""
    x, w = leggauss(order)
    breakpoints = np.asarray(breakpoints, dtype=float)
    lo, hi = breakpoints[:-1], breakpoints[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def cell_integrals(power: int, edges: np.ndarray) -> np.ndarray:
    """
    Exact cell integrals of sin^power over consecutive ``edges``.

    Used for the polar weights of sphere grids; the sum over [0, pi] equals
    the corresponding beta-function value to rounding.
    """
    edges = np.asarray(edges, dtype=float)
    if power == 0:
        return np.diff(edges)
    if power == 1:
        return np.cos(edges[:-1]) - np.cos(edges[1:])
    nodes, weights = fixed_panels(edges, order=max(15, power + 2))
    values = np.sin(nodes) ** power * weights
    return values.reshape(len(edges) - 1, -1).sum(axis=1)
