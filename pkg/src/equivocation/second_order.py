"""Second-order (sqrt(n)-scale) behaviour of the security measures.

Case A (order 1 + s, s in (0, 1]) is linear in the second-order rate L,
Case B (order 1) has a Gaussian closed form, and Case C (order 1 - s) is only
sandwiched between the Gamma/Psi bounds below.  The Case-C Gallager upper bound
uses ``2^(s + 1/(1-s))`` while Psi_1 uses ``2^(s + s/(1-s))``, so the two do not
cancel and the upper bound tends to ``log(2)/s`` rather than 0 as L -> -inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import log_ndtr, ndtr

from .dist import S_EPS, JointSource
from .errors import CaseMismatch, DomainError
from .measures import varentropies
from .optimize import maximize_concave

SQRT_2PI = math.sqrt(2 * math.pi)
DEGENERATE_VAR = 1e-14
QUAD_TOL = 1e-12
WINDOW_SIGMAS = 14.0


@dataclass(frozen=True)
class GaussianSpec:
    """Varentropy triple consumed by the Gamma/Psi quantities (nats^2)."""

    v: float
    v1: float
    v2: float

    @classmethod
    def of(cls, source: JointSource) -> "GaussianSpec":
        ve = varentropies(source)
        return cls(ve.v, ve.v1, ve.v2)


@dataclass(frozen=True)
class BoundPair:
    """Lower and upper limit bounds for Case C.

    ``lower <= upper`` is not enforced here: with these constants
    ``Gamma_1`` exceeds ``Gamma_2 / (1 - s)`` whenever
    ``(2s)^(s/(1-s)) (1-s) < 1``.  Check :attr:`consistent`.
    """

    lower: float
    upper: float

    @property
    def consistent(self) -> bool:
        return self.lower <= self.upper + 1e-9


@dataclass(frozen=True)
class LargeLApprox:
    """Quadratic large-|L| approximation; ``remainder`` names the unmodelled term."""

    value: float
    remainder: str


# ----------------------------------------------------------------- Gaussian


def gaussian_cdf(t: float) -> float:
    return float(ndtr(t))


def gaussian_pdf(t: float) -> float:
    return math.exp(-0.5 * t * t) / SQRT_2PI


def adaptive_simpson(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-10, max_depth: int = 60, panels: int = 16
) -> float:
    """Adaptive Simpson quadrature of ``f`` over ``[a, b]``.

    The interval is first cut into ``panels`` equal pieces so that narrow
    features are not missed by the coarsest rule.
    """
    if a == b:
        return 0.0
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += _simpson_panel(f, float(lo), float(hi), tol / panels, max_depth)
    return total


def _simpson_panel(f, a, b, tol, max_depth):
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6 * (fa + 4 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = 0.0
    while stack:
        a, b, fa, fm, fb, whole, tol, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6 * (fa + 4 * flm + fm)
        right = (b - m) / 6 * (fm + 4 * frm + fb)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15 * tol:
            total += left + right + delta / 15
        else:
            stack.append((a, m, fa, flm, fm, left, tol / 2, depth + 1))
            stack.append((m, b, fm, frm, fb, right, tol / 2, depth + 1))
    return total


# --------------------------------------------------------- Gamma / Psi terms


def _check_s(s: float, closed_right: bool) -> None:
    ok = 0 < s <= 1 if closed_right else 0 < s < 1
    if not ok:
        raise DomainError(f"s={s!r} outside (0, 1{']' if closed_right else ')'}")


def log_gamma_const(s: float) -> float:
    """``log(2^(s/(1-s)) s^(s/(1-s)) (1-s))``; ``+inf`` at s = 1."""
    if s >= 1:
        return math.inf
    return s / (1 - s) * math.log(2 * s) + math.log1p(-s)


def log_psi_const(s: float) -> float:
    """``log(2^(s + s/(1-s)) s^(s/(1-s)) (1-s))`` as used inside Psi_1."""
    return s * math.log(2) + log_gamma_const(s)


def log_psi_upper_const(s: float) -> float:
    """``log(2^(s + 1/(1-s)) s^(s/(1-s)) (1-s))`` as used in the Gallager upper bound."""
    return (s + 1 / (1 - s)) * math.log(2) + s / (1 - s) * math.log(s) + math.log1p(-s)


def gamma_bounds(s: float, l: float, g: GaussianSpec) -> tuple[float, float]:
    """``(Gamma_1, Gamma_2)`` at offset ``s`` and second-order rate ``l``.

    At s = 1 the constant in Gamma_1 diverges and Gamma_1 = -inf.
    """
    _check_s(s, closed_right=True)
    if not g.v > 0:
        raise DomainError("Gamma bounds need V > 0")
    lphi = float(log_ndtr(-l / math.sqrt(g.v)))
    gamma1 = -math.inf if s >= 1 else -log_gamma_const(s) / s - lphi / s
    gamma2 = -(1 - s) / s * lphi
    return gamma1, gamma2


def gamma_upper(s: float, l: float, g: GaussianSpec) -> float:
    """``Gamma_2 / (1 - s) = -(1/s) log Phi(-L/sqrt(V))``, finite at s = 1."""
    _check_s(s, closed_right=True)
    return -float(log_ndtr(-l / math.sqrt(g.v))) / s


def log_psi_integral(s: float, l: float, g: GaussianSpec) -> float:
    """``log of the integral of Phi(-(L+x)/sqrt(V2))^(1/(1-s)) N(x; 0, V1) dx``.

    The integrand is log-concave.  Its log is maximised first and the
    integral of ``exp(g - g_max)`` is taken over ``x* +/- 14 sqrt(V1)``, so
    the result stays finite where the integrand itself underflows.
    Degenerate variances take the delta-mass / step-function limits.
    """
    _check_s(s, closed_right=False)
    k = 1 / (1 - s)
    if g.v1 < DEGENERATE_VAR and g.v2 < DEGENERATE_VAR:
        raise DomainError("Psi integral needs V > 0")
    if g.v1 < DEGENERATE_VAR:
        return k * float(log_ndtr(-l / math.sqrt(g.v2)))
    if g.v2 < DEGENERATE_VAR:
        # Phi(-(L+x)/0) is the indicator of x < -L
        return float(log_ndtr(-l / math.sqrt(g.v1)))
    sd1, sd2 = math.sqrt(g.v1), math.sqrt(g.v2)

    def logf(x: float) -> float:
        return k * float(log_ndtr(-(l + x) / sd2)) - x * x / (2 * g.v1)

    reach = abs(l) + 40 * (sd1 + sd2) + 1.0
    peak = maximize_concave(logf, -reach, reach, tol=1e-12)
    x0, top = peak.argmax_t, peak.value
    half = WINDOW_SIGMAS * sd1
    body = lambda x: math.exp(logf(x) - top)
    area = adaptive_simpson(body, x0 - half, x0, QUAD_TOL) + adaptive_simpson(body, x0, x0 + half, QUAD_TOL)
    return top + math.log(area) - 0.5 * math.log(2 * math.pi * g.v1)


def psi_bounds(s: float, l: float, g: GaussianSpec) -> tuple[float, float]:
    """``(Psi_1, Psi_2)`` for s in (0, 1)."""
    _check_s(s, closed_right=False)
    psi1 = -log_psi_const(s) / s - (1 - s) / s * log_psi_integral(s, l, g)
    psi2 = -(1 - s) / s * float(log_ndtr(-l / math.sqrt(g.v)))
    return psi1, psi2


def psi_upper(s: float, l: float, g: GaussianSpec) -> float:
    psi1, _ = psi_bounds(s, l, g)
    return psi1 + log_psi_upper_const(s) / s


# ---------------------------------------------------------- limits by case


def case_b_limit(l: float, v: float) -> float:
    """Closed form ``L Phi(L/sqrt V) + sqrt(V) phi(L/sqrt V)`` of the order-1 limit."""
    if not v > 0:
        raise DomainError("Case B needs V > 0")
    sd = math.sqrt(v)
    u = l / sd
    return l * gaussian_cdf(u) + sd * gaussian_pdf(u)


def case_b_integral(l: float, v: float, lower: float = -40.0) -> float:
    """Direct quadrature of ``int_{-inf}^{L/sqrt V} (L - sqrt(V) x) phi(x) dx``."""
    sd = math.sqrt(v)
    u = l / sd
    integrand = lambda x: (l - sd * x) * gaussian_pdf(x)
    return adaptive_simpson(integrand, min(lower, u - 1.0), u, 1e-12)


CASES = ("A_pos", "A_neg", "B", "C_std", "C_up")


def second_order_limit(
    source: JointSource, s: float, l: float, case: str, form: str = "std"
) -> float | BoundPair:
    """Second-order limit (Cases A, B) or bounds (Case C).

    ``A_pos`` returns the limit of ``C / sqrt(n)`` (= L), ``A_neg`` the limit of
    ``-(1/sqrt(n)) log C`` (= -sL), ``B`` the Gaussian closed form, and the two
    C cases a :class:`BoundPair`.
    """
    if case not in CASES:
        raise CaseMismatch(f"unknown case {case!r}")
    if form not in ("std", "up"):
        raise ValueError(f"form must be 'std' or 'up', got {form!r}")
    if case in ("A_pos", "A_neg"):
        _check_case(0 < s <= 1, f"Case A needs s in (0, 1], got {s!r}")
        if case == "A_pos":
            _check_case(l >= 0, "A_pos needs L >= 0")
            return float(l)
        _check_case(l <= 0, "A_neg needs L <= 0")
        return -s * l
    g = GaussianSpec.of(source)
    if case == "B":
        _check_case(abs(s) < S_EPS, f"Case B needs s = 0, got {s!r}")
        return case_b_limit(l, g.v)
    _check_case((case == "C_std") == (form == "std"), f"{case} does not match form {form!r}")
    if case == "C_std":
        _check_case(0 < s <= 1, f"Case C needs s in (0, 1], got {s!r}")
        g1, g2 = gamma_bounds(s, l, g)
        return BoundPair(max(g1, g2), gamma_upper(s, l, g))
    _check_case(0 < s < 1, f"Case C (Gallager) needs s in (0, 1), got {s!r}")
    p1, p2 = psi_bounds(s, l, g)
    return BoundPair(max(p1, p2), p1 + log_psi_upper_const(s) / s)


def _check_case(ok: bool, msg: str) -> None:
    if not ok:
        raise CaseMismatch(msg)


def large_L_approx(source: JointSource, s: float, l: float, form: str = "std", direction: str = "pos") -> LargeLApprox:
    """Leading quadratic term of the Case-C limit as ``L -> +inf`` or ``-inf``.

    ``pos`` approximates the limit itself; ``neg`` approximates its logarithm.
    The O(log |L|) remainder is not modelled.
    """
    if not 0 < s <= 1:
        raise DomainError(f"s={s!r} outside (0, 1]")
    g = GaussianSpec.of(source)
    if direction == "pos":
        _check_case(l > 0, "pos direction needs L > 0")
        if form == "std":
            value = l * l / (2 * s * g.v)
        else:
            value = (1 - s) / (2 * s) * l * l / (g.v1 + g.v2 * (1 - s))
        return LargeLApprox(value, "O(log L)")
    if direction == "neg":
        _check_case(l < 0, "neg direction needs L < 0")
        return LargeLApprox(-l * l / (2 * g.v), "O(log |L|)")
    raise CaseMismatch(f"unknown direction {direction!r}")


def log_minus_log_phi(u: float) -> float:
    """``log(-log Phi(u))`` without underflow for large positive u."""
    lphi = float(log_ndtr(u))
    if lphi > -1e-8:
        # -log Phi(u) = -log1p(-Q) ~ Q (1 + Q/2), Q = Phi(-u)
        lq = float(log_ndtr(-u))
        return lq + math.log1p(0.5 * math.exp(lq))
    return math.log(-lphi)
