"""One-dimensional and polytope minimizers

Golden-section search for unimodal functions on an interval, and the
Frank-Wolfe method with away steps for convex functions over the convex hull
of an explicit vertex list. Both are small enough to audit and deterministic.
"""

import logging
import math

import numpy as np

from .defaults import FW_GAP_TOLERANCE, FW_MAX_ITER

logger = logging.getLogger(__name__)

PHI_RATIO = 2 / (1 + math.sqrt(5))


class LineMinimum(object):
    """Result of a one-dimensional minimization

    Attributes:
        x (float): minimizer found
        value (float): objective at x
        iterations (int): number of interval reductions
    """

    def __init__(self, x, value, iterations):
        self.x = x
        self.value = value
        self.iterations = iterations

    def __repr__(self):
        return 'LineMinimum(x={!r}, value={!r}, iterations={})'.format(
            self.x, self.value, self.iterations)


def golden_section(f, lo, hi, tol=1e-8, max_iter=500):
    """Golden-section search for the minimum of f on [lo, hi]

    The endpoints are compared against the final interior estimate so that a
    minimum on the boundary is returned exactly.

    Args:
        f: callable of one float
        lo, hi (float): search interval, lo <= hi
        tol (float): absolute tolerance on the minimizer
        max_iter (int): iteration cap
    Returns:
        LineMinimum
    """
    if not lo <= hi:
        raise ValueError('golden_section: empty interval [{}, {}]'.format(lo, hi))

    a, b = lo, hi
    x1 = b - PHI_RATIO * (b - a)
    x2 = a + PHI_RATIO * (b - a)
    f1 = f(x1)
    f2 = f(x2)
    iteration = 0
    while iteration < max_iter and abs(b - a) > tol:
        if f2 > f1:
            b, x2, f2 = x2, x1, f1
            x1 = b - PHI_RATIO * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + PHI_RATIO * (b - a)
            f2 = f(x2)
        iteration += 1

    best = min(((f1, x1), (f2, x2), (f(lo), lo), (f(hi), hi)), key=lambda pair: pair[0])
    return LineMinimum(best[1], best[0], iteration)


class FrankWolfeResult(object):
    """Result of an away-step Frank-Wolfe run

    Attributes:
        x (ndarray): final iterate
        value (float): objective at x
        gap (float): Frank-Wolfe duality gap at x, an upper bound on value - optimum
        iterations (int): iterations performed
        converged (bool): True if the gap tolerance was met before the cap
        weights (ndarray): convex weights of x over the vertex list
    """

    def __init__(self, x, value, gap, iterations, converged, weights):
        self.x = x
        self.value = value
        self.gap = gap
        self.iterations = iterations
        self.converged = converged
        self.weights = weights


def away_step_frank_wolfe(objective, gradient, vertices, start=None,
                          tol=FW_GAP_TOLERANCE, max_iter=FW_MAX_ITER):
    """Minimizes a convex function over the convex hull of the given vertices

    Each iteration picks the better of the Frank-Wolfe direction (towards the
    vertex minimizing the linearization) and the away direction (from the
    worst active vertex), followed by an exact line search.

    Args:
        objective: callable on a point of dimension d
        gradient: callable returning the gradient at a point
        vertices (ndarray): V x d array of polytope vertices
        start (int): index of the starting vertex, defaults to the vertex with
            the lowest objective
        tol (float): duality gap stopping tolerance
        max_iter (int): iteration cap
    Returns:
        FrankWolfeResult
    """
    vertices = np.asarray(vertices, dtype=float)
    if vertices.ndim != 2 or len(vertices) == 0:
        raise ValueError('away_step_frank_wolfe: need a non-empty V x d vertex array')
    if start is None:
        start = int(np.argmin([objective(v) for v in vertices]))

    weights = np.zeros(len(vertices))
    weights[start] = 1.0
    x = vertices[start].copy()
    gap = np.inf

    for iteration in range(max_iter):
        g = gradient(x)
        scores = vertices @ g
        gx = float(g @ x)
        s = int(np.argmin(scores))
        gap = gx - scores[s]
        if gap <= tol:
            return FrankWolfeResult(x, objective(x), gap, iteration, True, weights)

        active = np.flatnonzero(weights > 0)
        v = int(active[np.argmax(scores[active])])
        if gap >= scores[v] - gx:
            direction = vertices[s] - x
            gamma_max = 1.0
            away = False
        else:
            direction = x - vertices[v]
            gamma_max = weights[v] / (1.0 - weights[v])
            away = True

        line = golden_section(lambda t: objective(x + t * direction), 0.0, gamma_max, tol=1e-12)
        gamma = line.x
        if gamma <= 0.0:
            logger.debug("optimize: Frank-Wolfe line search stalled at iteration %d, gap %.3g",
                         iteration, gap)
            return FrankWolfeResult(x, objective(x), gap, iteration, False, weights)

        if away:
            weights *= 1.0 + gamma
            weights[v] -= gamma
            if gamma >= gamma_max:
                weights[v] = 0.0
        else:
            weights *= 1.0 - gamma
            weights[s] += gamma
        weights[weights < 1e-15] = 0.0
        weights /= weights.sum()
        x = weights @ vertices

    logger.warning("optimize: Frank-Wolfe stopped at the iteration cap %d with gap %.3g",
                   max_iter, gap)
    return FrankWolfeResult(x, objective(x), gap, max_iter, False, weights)
