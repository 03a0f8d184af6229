"""Single-letter Rényi information measures of a joint source, in nats.

Every function takes the Rényi offset ``s`` (order ``1 + s``).  Offsets with
``abs(s) < S_EPS`` are routed to closed-form Shannon expressions because the
``(1/s) * log(...)`` forms lose all precision there.  Sums of the type
``sum p^(1+s) q^(-s)`` are evaluated as log-sum-exp so that the tiny atoms of
tensor powers do not underflow.  Zero-probability atoms are dropped from every
sum (the 0 log 0 = 0 convention).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .dist import S_EPS, CondView, JointSource
from .errors import DomainError, ZeroAtom

log = logging.getLogger(__name__)


def _is_zero(s: float) -> bool:
    return abs(s) < S_EPS


def _log(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(x)


def _scale(k: float, logx: np.ndarray) -> np.ndarray:
    """``k * logx`` with ``-inf`` kept on zero atoms (avoids 0 * -inf)."""
    return np.where(np.isneginf(logx), -np.inf, k * logx)


def _log_cond(source: JointSource) -> np.ndarray:
    """log P_{A|E}, with -inf on zero atoms."""
    return _log(source.p) - _log(source.p_e)[None, :]


def _check_order(s: float, lower: float = -1.0, closed: bool = True) -> None:
    if not np.isfinite(s):
        raise DomainError(f"s must be finite, got {s!r}")
    if s < lower or (not closed and s == lower):
        bracket = "[" if closed else "("
        raise DomainError(f"s={s!r} outside {bracket}{lower}, inf)")


# ---------------------------------------------------------------- divergence


def renyi_divergence(p, q, s: float) -> float:
    """Rényi divergence ``D_{1+s}(p || q)`` of a pmf from a non-negative measure.

    ``q`` need not be normalised.  Returns ``inf`` when ``p`` charges a point
    that ``q`` does not (for ``s >= 0``), or when the supports are disjoint.
    """
    _check_order(s)
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.shape != q.shape:
        raise ValueError("p and q must have the same shape")
    on = p > 0
    lp, lq = _log(p[on]), _log(q[on])
    q_pos = q[on] > 0
    if _is_zero(s):
        if not np.all(q_pos):
            return math.inf
        return float(np.sum(p[on] * (lp - lq)))
    if s > 0 and not np.all(q_pos):
        return math.inf
    if not np.any(q_pos):
        return math.inf
    terms = (1 + s) * lp[q_pos] - s * lq[q_pos]
    return float(logsumexp(terms) / s)


# ------------------------------------------------------ conditional entropies


def shannon_cond_entropy(source: JointSource) -> float:
    on = source.p > 0
    return float(-np.sum(source.p[on] * _log_cond(source)[on]))


def cond_renyi_H(source: JointSource, s: float, q_e=None) -> float:
    """Conditional Rényi entropy ``H_{1+s}(A|E)`` relative to ``q_e``.

    Defined as ``-D_{1+s}(P_AE || I_A x Q_E)`` with ``Q_E = P_E`` by default.
    """
    _check_order(s)
    q_e = source.p_e if q_e is None else np.asarray(q_e, dtype=float)
    if q_e.shape != (source.e_size,):
        raise ValueError("q_e must have one entry per E-symbol")
    q = np.broadcast_to(q_e[None, :], source.p.shape)
    return -renyi_divergence(source.p, q, s)


def _log_col_norms(source: JointSource, s: float) -> np.ndarray:
    """Per-column ``(1/(1+s)) log sum_a P_AE(a,e)^(1+s)``."""
    return logsumexp(_scale(1 + s, _log(source.p)), axis=0) / (1 + s)


def cond_renyi_H_up(source: JointSource, s: float) -> float:
    """Gallager-form conditional entropy ``H^up_{1+s}(A|E)``, for s > -1."""
    _check_order(s, closed=False)
    if _is_zero(s):
        return shannon_cond_entropy(source)
    return float(-(1 + s) / s * logsumexp(_log_col_norms(source, s)))


def two_param_H(source: JointSource, s: float, t: float) -> float:
    """Two-parameter entropy ``H_{1+s|1+t}(A|E)``; reduces to the Gallager form at t = s."""
    if _is_zero(s):
        raise DomainError("two_param_H has no s = 0 branch")
    _check_order(s)
    _check_order(t, closed=False)
    inner = logsumexp(_scale(1 + s, _log_cond(source)), axis=0)
    total = logsumexp(inner / (1 + t), b=source.p_e)
    return float(-(1 + t) / s * total)


def gallager_phi(source: JointSource, s: float) -> float:
    """Gallager's function ``log sum_e (sum_a P_AE^(1/(1-s)))^(1-s)``, for s < 1."""
    if not s < 1:
        raise DomainError(f"gallager_phi needs s < 1, got {s!r}")
    inner = logsumexp(_scale(1 / (1 - s), _log(source.p)), axis=0)
    return float(logsumexp((1 - s) * inner))


def tilted_QE(source: JointSource, s: float) -> np.ndarray:
    """Maximiser over Q_E of ``H_{1+s}(A|E || Q_E)``."""
    _check_order(s, closed=False)
    w = _log_col_norms(source, s)
    return np.exp(w - logsumexp(w))


# -------------------------------------------------------- mutual information


def _entropy(p: np.ndarray, s: float) -> float:
    p = p[p > 0]
    if _is_zero(s):
        return float(-np.sum(p * np.log(p)))
    return float(-logsumexp((1 + s) * np.log(p)) / s)


def renyi_entropy(p, s: float) -> float:
    """Unconditional Rényi entropy ``H_{1+s}(p)`` of a pmf."""
    _check_order(s)
    return _entropy(np.asarray(p, dtype=float).ravel(), s)


def mutual_information(source: JointSource) -> float:
    p = source.p
    on = p > 0
    indep = np.outer(source.p_a, source.p_e)
    return float(np.sum(p[on] * (np.log(p[on]) - np.log(indep[on]))))


def _log_sibson_g(source: JointSource, s: float) -> np.ndarray:
    """``log g_s(a) = log sum_e P_AE(a,e)^(1+s) P_E(e)^(-s)`` (``-inf`` on empty rows)."""
    return logsumexp(_scale(1 + s, _log(source.p)) - s * _log(source.p_e)[None, :], axis=1)


def sibson_tilt(source: JointSource, s: float) -> np.ndarray:
    """The pmf ``Q_A^(s)`` proportional to ``g_s^(1/(1+s))``; equals P_A at s = 0."""
    _check_order(s, closed=False)
    if _is_zero(s):
        return source.p_a.copy()
    w = _log_sibson_g(source, s) / (1 + s)
    return np.exp(w - logsumexp(w))


def sibson_mi(source: JointSource, s: float) -> float:
    """Sibson's order-(1+s) mutual information ``I(E ^ A)``."""
    _check_order(s, closed=False)
    if _is_zero(s):
        return mutual_information(source)
    return float((1 + s) / s * logsumexp(_log_sibson_g(source, s) / (1 + s)))


def arimoto_mi(source: JointSource, s: float) -> float:
    """Arimoto's mutual information ``H_{1+s}(A) - H^up_{1+s}(A|E)``."""
    _check_order(s, closed=False)
    if _is_zero(s):
        return mutual_information(source)
    return renyi_entropy(source.p_a, s) - cond_renyi_H_up(source, s)


def security_measure(source: JointSource, s: float, kind: str = "std") -> float:
    """Modified mutual information ``C_{1+s}`` (``std``) or ``C^up_{1+s}`` (``up``).

    Both are ``log|A|`` minus the matching conditional entropy and vanish
    exactly when A is uniform and independent of E.
    """
    _check_order(s, closed=False)
    if kind == "std":
        h = cond_renyi_H(source, s)
    elif kind == "up":
        h = cond_renyi_H_up(source, s)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return math.log(source.a_size) - h


# --------------------------------------------------------------- varentropy


@dataclass(frozen=True)
class Varentropies:
    """Conditional varentropy ``v`` and its split ``v = v1 + v2``.

    ``v1`` is the variance of the per-column entropies H(A|E=e) around H(A|E);
    ``v2`` is the average within-column variance of the entropy density.
    """

    v: float
    v1: float
    v2: float


def _clamp(x: float, name: str) -> float:
    if x < -1e-10:
        log.warning("%s = %.3e < 0 from round-off; clamped to 0", name, x)
    return max(x, 0.0)


def varentropies(source: JointSource) -> Varentropies:
    p, p_e = source.p, source.p_e
    on = p > 0
    dens = np.where(on, -_log_cond(source), 0.0)
    h = float(np.sum(p * dens))
    h_col = np.sum(p * dens, axis=0) / p_e  # H(A | E = e)
    v = float(np.sum(p[on] * (dens[on] - h) ** 2))
    v1 = float(np.sum(p_e * (h - h_col) ** 2))
    v2 = float(np.sum(np.where(on, p * (dens - h_col[None, :]) ** 2, 0.0)))
    return Varentropies(_clamp(v, "V"), _clamp(v1, "V1"), _clamp(v2, "V2"))


def entropy_density(cond: CondView, a: int, e: int) -> float:
    """``-log P_{A|E}(a|e)`` in nats."""
    pa = float(cond.p_a_given_e[a, e])
    if pa <= 0:
        raise ZeroAtom(f"P(a={a}|e={e}) = 0")
    return -math.log(pa)
