"""First-order equivocation limits, key rates and equivocation exponents.

All rates are in nats per source symbol.  ``form="std"`` refers to the
security measure built on ``H_{1+s}``, ``form="up"`` to the Gallager form
built on ``H^up_{1+s}``.  ``sign="plus"`` is the order ``1 + s`` measure,
``sign="minus"`` the order ``1 - s`` measure.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .dist import S_EPS, JointSource
from .errors import DomainError, HypothesisWarning
from .measures import _log, _log_cond, _scale, cond_renyi_H, cond_renyi_H_up, shannon_cond_entropy
from .optimize import OptResult, maximize_concave, maximize_on

SUP_GAP = 1e-9

__all__ = [
    "RateSpec",
    "OptResult",
    "maximize_concave",
    "scaled_entropy",
    "critical_rate",
    "equiv_limit",
    "minus_branch_max",
    "key_rate",
    "exponent",
    "exponent_zero_crossing",
]


@dataclass(frozen=True)
class RateSpec:
    r: float
    l: float = 0.0
    m: int | None = None

    def __post_init__(self):
        if self.r < 0:
            raise DomainError(f"rate must be >= 0, got {self.r!r}")


def _check_form(form: str) -> None:
    if form not in ("std", "up"):
        raise ValueError(f"form must be 'std' or 'up', got {form!r}")


def _check_sign(sign: str) -> None:
    if sign not in ("plus", "minus"):
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")


# -------------------------------------------------------- scaled entropies


def scaled_entropy(source: JointSource, t: float) -> float:
    """``t * H_{1+t}(A|E) = -log sum P_AE P_{A|E}^t``, smooth through t = 0."""
    if t < -1:
        raise DomainError(f"t={t!r} < -1")
    return float(-logsumexp(_log(source.p) + _scale(t, _log_cond(source))))


def _scaled_entropy_fn(source: JointSource) -> Callable[[float], float]:
    """:func:`scaled_entropy` with the log tables built once, for inner loops."""
    on = source.p > 0
    lp = np.log(source.p[on])
    lc = lp - np.log(np.broadcast_to(source.p_e[None, :], source.p.shape)[on])

    def f(t: float) -> float:
        x = lp + t * lc
        top = x.max()
        return float(-(top + math.log(np.exp(x - top).sum())))

    return f


def _scaled_entropy_up(source: JointSource, t: float) -> float:
    """``t * H^up_{1+t}(A|E) = -(1+t) log sum_e (sum_a P_AE^(1+t))^(1/(1+t))``."""
    if t <= -1:
        raise DomainError(f"t={t!r} <= -1")
    cols = logsumexp(_scale(1 + t, _log(source.p)), axis=0) / (1 + t)
    return float(-(1 + t) * logsumexp(cols))


def _scaled_two_param(source: JointSource, t: float, s: float) -> float:
    """``t * H_{1-t|1-s}(A|E)``, smooth through t = 0, for s < 1."""
    inner = logsumexp(_scale(1 - t, _log_cond(source)), axis=0)
    return float((1 - s) * logsumexp(inner / (1 - s), b=source.p_e))


# ----------------------------------------------------------- critical rates


def _critical_std(source: JointSource, t: float) -> float:
    lc = _log_cond(source)
    on = source.p > 0
    logw = _log(source.p) + _scale(t, lc)
    w = np.exp(logw - logsumexp(logw))
    return float(-np.sum(w[on] * lc[on]))


def _critical_up(source: JointSource, t: float) -> float:
    lp = _log(source.p)
    on = source.p > 0
    log_g = logsumexp(_scale(1 + t, lp), axis=0)  # log G_e
    cols = log_g / (1 + t)
    log_z = logsumexp(cols)
    omega = np.exp(cols - log_z)  # tilted Q_E
    nu = np.exp(_scale(1 + t, lp) - log_g[None, :])
    mean_lp = np.sum(np.where(on, nu * lp, 0.0), axis=0)
    dcols = -log_g / (1 + t) ** 2 + mean_lp / (1 + t)
    return float(-log_z - (1 + t) * np.sum(omega * dcols))


def critical_rate(source: JointSource, s: float, form: str = "std") -> float:
    """Derivative of ``t * H_{1+t}`` (or its Gallager form) at ``t = s``.

    Negative arguments give the minus-branch rates: ``critical_rate(P, -s)``
    is the derivative of ``t * H_{1-t}`` at ``t = s``.

    Parameters
    ----------
    s : float
        Derivative argument in ``[-1, 1]`` for ``std`` and ``(-1, 1]`` for ``up``.
    form : {"std", "up"}
    """
    _check_form(form)
    lo_ok = s >= -1 if form == "std" else s > -1
    if not (lo_ok and s <= 1):
        raise DomainError(f"critical rate argument {s!r} outside the {form} domain")
    if form == "std":
        return _critical_std(source, s)
    return _critical_up(source, s)


# ------------------------------------------------------- equivocation limits


def _h_plus(source: JointSource, s: float, form: str) -> float:
    return cond_renyi_H(source, s) if form == "std" else cond_renyi_H_up(source, s)


def equiv_limit(source: JointSource, s: float, r: float, sign: str = "plus", form: str = "std") -> float:
    """Limit of ``(1/n) inf C_{1 +/- s}`` at hashing rate ``r``.

    ``plus`` gives ``|r - H_{1+s}|^+``.  ``minus`` is linear above the
    critical rate and a concave maximisation over ``t in [0, s]`` below it.
    """
    _check_form(form)
    _check_sign(sign)
    if r < 0:
        raise DomainError(f"rate must be >= 0, got {r!r}")
    if sign == "plus":
        if not 0 <= s <= 1:
            raise DomainError(f"plus branch needs s in [0, 1], got {s!r}")
        return max(r - _h_plus(source, s, form), 0.0)

    if not 0 < s <= 1:
        raise DomainError(f"minus branch needs s in (0, 1], got {s!r}")
    if form == "std":
        if r >= critical_rate(source, -s, "std"):
            return r - cond_renyi_H(source, -s)
        obj = lambda t: (t * r + scaled_entropy(source, -t)) / s
    else:
        if s >= 1:
            raise DomainError("Gallager minus branch is undefined at s = 1 (order 0)")
        if r >= critical_rate(source, -s, "up"):
            return r - cond_renyi_H_up(source, -s)
        obj = lambda t: (t * r - _scaled_two_param(source, t, s)) / s
    # the t = 0 endpoint gives exactly 0; clamp round-off and -0.0
    return max(0.0, maximize_concave(obj, 0.0, s).value)


def minus_branch_max(source: JointSource, s: float, r: float, form: str = "std") -> OptResult:
    """The below-critical clause of the minus branch, evaluated at any ``r``."""
    if form == "std":
        obj = lambda t: (t * r + scaled_entropy(source, -t)) / s
    else:
        obj = lambda t: (t * r - _scaled_two_param(source, t, s)) / s
    return maximize_concave(obj, 0.0, s)


def key_rate(source: JointSource, s: float, form: str = "std") -> float:
    """Largest rate with vanishing normalised leakage under ``C_{1+s}``."""
    _check_form(form)
    if not -1 <= s <= 1:
        raise DomainError(f"s={s!r} outside [-1, 1]")
    if s <= 0 or abs(s) < S_EPS:
        return shannon_cond_entropy(source)
    return _h_plus(source, s, form)


# ----------------------------------------------------------------- exponents


def exponent(
    source: JointSource,
    s: float,
    r: float,
    sign: str = "plus",
    form: str = "std",
    check_hypothesis: bool = True,
) -> float:
    """Exponential decay rate of ``inf C_{1 +/- s}`` at hashing rate ``r``.

    The objective in every case is ``t * H_{1+t} - t * r``.  ``plus/std``
    takes its supremum over ``[s, 1)`` (evaluated on ``[s, 1 - 1e-9]``),
    ``plus/up`` over ``[s, 1]``; both are clipped at zero.  The minus branch
    maximises over ``[0, 1]``.

    The limits are proven for ``r`` at or above the critical rate at 1; below
    it a :class:`HypothesisWarning` is emitted and the formula is still
    evaluated.
    """
    _check_form(form)
    _check_sign(sign)
    if not 0 <= s <= 1:
        raise DomainError(f"s={s!r} outside [0, 1]")
    if check_hypothesis:
        r_crit = critical_rate(source, 1.0, form)
        if r < r_crit:
            warnings.warn(
                f"rate {r:.6g} below the critical rate {r_crit:.6g}; exponent formula unproven here",
                HypothesisWarning,
                stacklevel=2,
            )
    se = _scaled_entropy_fn(source)
    obj = lambda t: se(t) - t * r
    if sign == "minus":
        # t = 0 gives exactly 0; clamp round-off
        return max(maximize_concave(obj, 0.0, 1.0).value, 0.0)
    hi = 1.0 - SUP_GAP if form == "std" else 1.0
    lo = min(s, hi)
    return max(maximize_on(obj, lo, hi).value, 0.0)


def exponent_zero_crossing(
    source: JointSource,
    s: float,
    sign: str = "plus",
    form: str = "std",
    threshold: float = 1e-14,
    xtol: float = 1e-12,
) -> float:
    """Smallest rate at which :func:`exponent` drops to (numerically) zero.

    Bisection on the predicate ``exponent(r) > threshold``; the exponent is
    positive below the crossing and identically zero above it.
    """
    f = lambda r: exponent(source, s, r, sign, form, check_hypothesis=False) > threshold
    lo, hi = 0.0, math.log(source.a_size) + 1.0
    if not f(lo):
        return lo
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if f(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
