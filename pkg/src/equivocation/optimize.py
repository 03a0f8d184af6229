"""Golden-section maximisation of concave functions on a closed interval."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import IntervalError

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI2 = (3 - math.sqrt(5)) / 2


@dataclass(frozen=True)
class OptResult:
    argmax_t: float
    value: float


def _concavity_violation(f: Callable[[float], float], lo: float, hi: float, points: int = 64) -> float:
    t = np.linspace(lo, hi, points)
    y = np.array([f(x) for x in t])
    return float(np.max(y[2:] - 2 * y[1:-1] + y[:-2], initial=-math.inf))


def maximize_concave(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    check_concavity: bool = False,
) -> OptResult:
    """Maximise a concave ``f`` on ``[lo, hi]`` by golden-section search.

    The interior search is followed by a comparison with both endpoints so
    that boundary maxima are returned exactly.

    Parameters
    ----------
    f : callable
        Concave on ``[lo, hi]``; this is the caller's responsibility.
    lo, hi : float
        Interval with ``lo < hi``.
    tol : float
        Bracket width at termination.
    check_concavity : bool
        Run a 64-point second-difference spot check first.

    Raises
    ------
    IntervalError
        If ``lo >= hi`` or the bounds are not finite, or the spot check fails.
    """
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise IntervalError(f"need finite lo < hi, got [{lo!r}, {hi!r}]")
    if check_concavity:
        bump = _concavity_violation(f, lo, hi)
        if bump > 1e-9 * max(1.0, abs(f(lo)), abs(f(hi))):
            raise IntervalError(f"objective is not concave on [{lo}, {hi}] (second difference {bump:.3e})")

    a, b = lo, hi
    h = b - a
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    fc, fd = f(c), f(d)
    while h > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + INV_PHI * h
            fd = f(d)
    best_t, best = (c, fc) if fc >= fd else (d, fd)
    for t in (lo, hi):
        ft = f(t)
        if ft >= best:
            best_t, best = t, ft
    return OptResult(argmax_t=float(best_t), value=float(best))


def maximize_on(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10) -> OptResult:
    """Like :func:`maximize_concave` but a degenerate interval ``lo == hi`` is allowed."""
    if hi - lo <= 0:
        return OptResult(argmax_t=float(lo), value=float(f(lo)))
    return maximize_concave(f, lo, hi, tol)
