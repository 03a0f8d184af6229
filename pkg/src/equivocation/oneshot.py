"""One-shot security of hashed sources: exact values and bound verification.

Every one-shot bound compares an exactly computed left-hand side with a
closed-form right-hand side on one of four exponential scales, for a hash
output ``I = f(A)`` over ``M`` symbols:

``plus``      ``e^{s C_{1+s}}        = M^s  sum_e P_E sum_i P(i|e)^(1+s)``
``plus_up``   ``e^{s/(1+s) C^up_{1+s}} = sum_e P_E (M^s sum_i P(i|e)^(1+s))^(1/(1+s))``
``minus``     ``e^{-s C_{1-s}}       = M^-s sum_e P_E sum_i P(i|e)^(1-s)``
``minus_up``  ``e^{-s/(1-s) C^up_{1-s}} = sum_e P_E (M^-s sum_i P(i|e)^(1-s))^(1/(1-s))``

With a random hash index X adjoined, each scale is the ``P_X``-weighted
average of the per-member values.  Zero atoms are dropped from every sum,
which also fixes ``0^0 = 0`` at the order-0 endpoint.

Threshold sets such as ``{P_{A|E} >= c/M}`` are evaluated with a relative
tie tolerance of 1e-12 so that atoms sitting exactly on ``c/M`` (uniform
sources) are classified as the bound intends, not by round-off.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .dist import JointSource, load_joint
from .errors import DomainError, SizeOverflow, UncertifiedFamily
from .hashing import HashFamily
from .measures import cond_renyi_H_up, renyi_divergence

TIE_TOL = 1e-12
STATUS_TOL = 1e-12
MAX_JOINT_ATOMS = 10**7

DIRECT_KINDS = ("L1_plus", "L1_plus_up", "L1_minus", "L1_minus_up", "L2_exp_up", "L3_second_std", "L3_second_up")
CONVERSE_KINDS = (
    "L4_equiv",
    "L4_equiv_up",
    "L4_equiv_corrected",
    "L5_minus_a",
    "L5_minus_b",
    "L5_minus_up",
    "L5_plus_a",
    "L5_plus_b",
    "L5_plus_up",
    "L6_second",
)
LEMMA5_KINDS = CONVERSE_KINDS[3:9]

# kind -> (lemma number, lhs scale, orientation); "upper" means lhs <= rhs
_KIND_INFO = {
    "L1_plus": (1, "plus", "upper"),
    "L1_plus_up": (1, "plus_up", "upper"),
    "L1_minus": (1, "minus", "lower"),
    "L1_minus_up": (1, "minus_up", "lower"),
    "L2_exp_up": (2, "plus_up", "upper"),
    "L3_second_std": (3, "minus", "lower"),
    "L3_second_up": (3, "minus_up", "lower"),
    "L4_equiv": (4, "minus", "upper"),
    "L4_equiv_up": (4, "minus_up", "upper"),
    "L4_equiv_corrected": (4, "minus", "upper"),
    "L5_minus_a": (5, "minus", "upper"),
    "L5_minus_b": (5, "minus", "upper"),
    "L5_minus_up": (5, "minus_up", "upper"),
    "L5_plus_a": (5, "plus", "lower"),
    "L5_plus_b": (5, "plus", "lower"),
    "L5_plus_up": (5, "plus_up", "lower"),
    "L6_second": (6, "minus", "upper"),
}

# kinds whose expressions carry s/(1-s) and are undefined at s = 1
_OPEN_AT_ONE = {
    "L1_minus_up",
    "L3_second_up",
    "L4_equiv",
    "L4_equiv_up",
    "L4_equiv_corrected",
    "L5_minus_up",
    "L6_second",
}

# converse kinds whose failures are recorded rather than treated as errors
REPORT_MODE_LEMMAS = {4, 6}


def kind_info(kind: str) -> tuple[int, str, str]:
    """``(lemma, lhs scale, orientation)`` of a bound kind."""
    try:
        return _KIND_INFO[kind]
    except KeyError:
        raise DomainError(f"unknown bound kind {kind!r}") from None


def kind_defined_at(kind: str, s: float) -> bool:
    return 0 <= s <= 1 and not (kind in _OPEN_AT_ONE and s >= 1)


# ------------------------------------------------------------------ helpers


def _pow(x: np.ndarray, k: float) -> np.ndarray:
    """``x^k`` with zero entries mapped to 0 for every k."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] ** k
    return out


def _cond(source: JointSource) -> tuple[np.ndarray, np.ndarray]:
    p_e = source.p_e
    return source.p / p_e[None, :], p_e


def _sets(w: np.ndarray, thr: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Masks ``w >= thr``, ``w < thr`` and ``w <= thr`` with tie tolerance."""
    ge = w >= thr * (1 - TIE_TOL)
    le = w <= thr * (1 + TIE_TOL)
    return ge, ~ge, le


def _log_const(s: float) -> float:
    """``log(2^(s/(1-s)) s^(s/(1-s)))`` for s in [0, 1)."""
    if s <= 0:
        return 0.0
    return s / (1 - s) * math.log(2 * s)


def _k4(s: float) -> float:
    """``2^(s/(1-s)) s^(s/(1-s)) (1-s)``."""
    return math.exp(_log_const(s)) * (1 - s)


def _check_s(s: float, kind: str) -> None:
    if not kind_defined_at(kind, s):
        raise DomainError(f"{kind} is undefined at s={s!r}")


# ---------------------------------------------------------- exact quantities


def hashed_joints(source: JointSource, family: HashFamily) -> np.ndarray:
    """``P_{f_x(A) E}`` for every member, shape ``(k, M, |E|)``."""
    if family.a_size != source.a_size:
        raise DomainError(f"family acts on {family.a_size} symbols, source has {source.a_size}")
    k, m = len(family), family.m_size
    if k * m * source.e_size > MAX_JOINT_ATOMS:
        raise SizeOverflow("hashed joint distribution too large to materialise")
    onehot = np.zeros((k, source.a_size, m))
    np.put_along_axis(onehot, family.members[:, :, None], 1.0, axis=2)
    return np.einsum("xai,ae->xie", onehot, source.p)


def lhs_scales(source: JointSource, family: HashFamily, s: float) -> dict[str, np.ndarray]:
    """Per-member values of the four exponential scales at offset ``s``.

    ``minus_up`` is NaN at s = 1.
    """
    if not 0 <= s <= 1:
        raise DomainError(f"s={s!r} outside [0, 1]")
    q = hashed_joints(source, family)
    m = family.m_size
    p_e = source.p_e
    w = q / p_e[None, None, :]
    col_plus = m**s * np.sum(_pow(w, 1 + s), axis=1)  # (k, e)
    col_minus = m ** (-s) * np.sum(_pow(w, 1 - s), axis=1)
    out = {
        "plus": col_plus @ p_e,
        "plus_up": (col_plus ** (1 / (1 + s))) @ p_e,
        "minus": col_minus @ p_e,
    }
    out["minus_up"] = (col_minus ** (1 / (1 - s))) @ p_e if s < 1 else np.full(len(family), np.nan)
    return out


def family_lhs(source: JointSource, family: HashFamily, s: float) -> dict[str, float]:
    """The four scales with the hash index adjoined (weighted member average)."""
    return {k: float(v @ family.weights) for k, v in lhs_scales(source, family, s).items()}


def exact_security(source: JointSource, family: HashFamily, s: float, kind: str = "C") -> float:
    """Security of the hashed key given ``(E, X)``, in nats.

    ``C``: ``D_{1+s}(P_{f_X(A) E X} || P_mix x P_E x P_X)``.
    ``C_up``: ``log M - H^up_{1+s}(f_X(A) | E X)``.

    Parameters
    ----------
    s : float
        Offset in ``(-1, inf)``; negative values give order ``1 - |s|``.
    """
    if not s > -1:
        raise DomainError(f"s={s!r} must exceed -1")
    q = hashed_joints(source, family)  # (x, i, e)
    m = family.m_size
    joint = q * family.weights[:, None, None]
    joint = np.moveaxis(joint, 0, 2).reshape(m, -1)  # rows i, columns (e, x)
    if kind == "C":
        ref = np.outer(np.full(m, 1.0 / m), np.outer(source.p_e, family.weights).ravel())
        return renyi_divergence(joint, ref, s)
    if kind == "C_up":
        return math.log(m) - cond_renyi_H_up(load_joint(joint / joint.sum()), s)
    raise DomainError(f"unknown kind {kind!r}")


# ------------------------------------------------------------- right sides


def direct_rhs(
    source: JointSource, s: float, m: int, epsilon: float, c: float | None = None, kind: str = "L1_plus"
) -> float:
    """Right-hand side of a direct-part one-shot bound on its own scale.

    ``L1_plus``, ``L1_plus_up`` and ``L2_exp_up`` bound the ``plus`` /
    ``plus_up`` scale from above; the minus and ``L3`` kinds bound the
    ``minus`` / ``minus_up`` scale from below.
    """
    lemma, _, _ = kind_info(kind)
    if lemma > 3:
        raise DomainError(f"{kind} is not a direct-part bound")
    _check_s(s, kind)
    if m < 1:
        raise DomainError("M must be >= 1")
    if lemma in (1, 3) and epsilon < 1:
        raise DomainError(f"epsilon must be >= 1, got {epsilon!r}")
    if lemma == 2 and epsilon != 1:
        raise DomainError("L2_exp_up needs a universal_2 family (epsilon = 1)")
    if lemma == 3 and (c is None or not c > 0):
        raise DomainError("L3 bounds need c > 0")
    w, p_e = _cond(source)
    p = source.p

    if kind == "L1_plus":
        return epsilon**s + m**s * float(np.sum(p * _pow(w, s)))
    if kind == "L1_plus_up":
        k = s / (1 + s)
        cols = np.sum(_pow(p, 1 + s), axis=0) ** (1 / (1 + s))
        return epsilon**k + m**k * float(cols.sum())
    if kind == "L2_exp_up":
        return 1 + m**s * float(np.sum(p * _pow(w, s))) / (1 + s)
    if kind == "L1_minus":
        ge, lt, _ = _sets(w, epsilon / m)
        head = float(np.sum(np.where(ge, p * _pow(w, -s), 0.0))) * m ** (-s)
        tail = float(np.sum(p[lt])) * epsilon ** (-s)
        return 2 ** (-s) * (head + tail)
    if kind == "L1_minus_up":
        ge, lt, _ = _sets(w, epsilon / m)
        k = 1 / (1 - s)
        head = _pow(np.sum(np.where(ge, _pow(w, 1 - s), 0.0), axis=0), k) @ p_e
        tail = _pow(np.sum(np.where(lt, w, 0.0), axis=0), k) @ p_e
        return float(head / (2 * m ** (s * k)) + (2 * epsilon) ** (-s * k) * tail)
    _, _, le = _sets(w, c / m)
    if kind == "L3_second_std":
        return float(np.sum(p[le])) * (c + epsilon) ** (-s)
    k = 1 / (1 - s)  # L3_second_up
    return float((c + epsilon) ** (-s * k) * (_pow(np.sum(np.where(le, w, 0.0), axis=0), k) @ p_e))


def converse_rhs(source: JointSource, f, s: float, m: int, c: float, kind: str = "L5_minus_b") -> float:
    """Right-hand side of a converse one-shot bound for a deterministic hash.

    The expressions depend on ``f`` only through ``M``; ``f`` is validated
    against the source and otherwise unused.  ``L4_equiv_corrected`` adds
    ``1/2`` to ``L4_equiv``, which is what the underlying ``g_1`` argument
    yields once ``sum_m g_1(P(m|e), 1/M) = 2 - 2 e^{-s C}`` is carried through;
    it is a diagnostic companion to ``L4_equiv``, not a separate bound.
    """
    lemma, _, _ = kind_info(kind)
    if lemma < 4:
        raise DomainError(f"{kind} is not a converse bound")
    _check_s(s, kind)
    if not c > 1:
        raise DomainError(f"converse bounds need c > 1, got {c!r}")
    if f is not None:
        f = np.asarray(f)
        if f.shape != (source.a_size,) or f.min() < 0 or f.max() >= m:
            raise DomainError("f must map every source symbol into {0..M-1}")
    w, p_e = _cond(source)
    p = source.p
    ge, lt, le = _sets(w, c / m)
    p_ge, p_lt, p_le = float(np.sum(p[ge])), float(np.sum(p[lt])), float(np.sum(p[le]))
    col_ge = np.sum(np.where(ge, w, 0.0), axis=0)  # P_{A|E=e}{>= c/M}
    col_lt = np.sum(np.where(lt, w, 0.0), axis=0)

    if kind in ("L4_equiv", "L4_equiv_corrected"):
        head = c ** (-s) * m ** (-s) * float(np.sum(np.where(ge, p * _pow(w, -s), 0.0)))
        val = head + _k4(s) * p_le
        return val + 0.5 if kind == "L4_equiv_corrected" else val
    if kind == "L4_equiv_up":
        k = 1 / (1 - s)
        head = _pow(c ** (-s) * m ** (-s) * np.sum(np.where(ge, _pow(w, 1 - s), 0.0), axis=0), k)
        tail = _pow(_k4(s) * col_lt, k)
        return float(math.exp(_log_const(s)) * ((head + tail) @ p_e))
    if kind == "L5_minus_a":
        head = m ** (-s) * float(np.sum(np.where(ge, p * _pow(w, -s), 0.0)))
        return head + float(_pow(col_lt, 1 - s) @ p_e)
    if kind == "L5_minus_b":
        return p_ge * c ** (-s) + float(_pow(np.array(p_lt), 1 - s))
    if kind == "L5_minus_up":
        return float(_pow(col_ge * c ** (-s) + _pow(col_lt, 1 - s), 1 / (1 - s)) @ p_e)
    if kind == "L5_plus_a":
        head = m**s * float(np.sum(np.where(ge, p * _pow(w, s), 0.0)))
        return head + float(_pow(col_lt, 1 + s) @ p_e)
    if kind == "L5_plus_b":
        return p_ge * c**s + float(_pow(np.array(p_lt), 1 + s))
    if kind == "L5_plus_up":
        return float(_pow(col_ge * c**s + _pow(col_lt, 1 + s), 1 / (1 + s)) @ p_e)
    # L6_second
    return c ** (-s) * p_ge + math.exp(_log_const(s)) * p_le


# ------------------------------------------------------------- verification


@dataclass(frozen=True)
class BoundReport:
    """One bound evaluation; ``slack >= 0`` means the inequality holds."""

    lemma: int
    kind: str
    s: float
    c: float | None
    epsilon: float | None
    m: int
    lhs: float
    rhs: float
    slack: float
    status: str
    member: int | None = None


def make_report(kind: str, s: float, c, epsilon, m: int, lhs: float, rhs: float, member=None) -> BoundReport:
    lemma, _, orient = kind_info(kind)
    slack = rhs - lhs if orient == "upper" else lhs - rhs
    if slack >= -STATUS_TOL * max(1.0, abs(rhs)):
        status = "holds"
    else:
        status = "reported" if lemma in REPORT_MODE_LEMMAS else "violated"
    return BoundReport(lemma, kind, s, c, epsilon, m, lhs, rhs, slack, status, member)


def verify_direct(
    source: JointSource, family: HashFamily, s_grid: Iterable[float], c_grid: Iterable[float] = (), epsilon=None
) -> list[BoundReport]:
    """Lemmas 1-3 against the exact family average."""
    if not family.certified:
        raise UncertifiedFamily("direct-part checks need a family with a certified epsilon")
    eps = family.certified_epsilon if epsilon is None else epsilon
    m = family.m_size
    c_grid = list(c_grid)
    out = []
    for s in s_grid:
        lhs = family_lhs(source, family, s)
        for kind in ("L1_plus", "L1_plus_up", "L1_minus", "L1_minus_up", "L2_exp_up"):
            if not kind_defined_at(kind, s) or (kind == "L2_exp_up" and eps != 1):
                continue
            rhs = direct_rhs(source, s, m, eps, None, kind)
            out.append(make_report(kind, s, None, eps, m, lhs[kind_info(kind)[1]], rhs))
        for c in c_grid:
            for kind in ("L3_second_std", "L3_second_up"):
                if kind_defined_at(kind, s):
                    rhs = direct_rhs(source, s, m, eps, c, kind)
                    out.append(make_report(kind, s, c, eps, m, lhs[kind_info(kind)[1]], rhs))
    return out


def verify_converse(
    source: JointSource, family: HashFamily, s_grid: Iterable[float], c_grid: Iterable[float], kinds=CONVERSE_KINDS
) -> list[BoundReport]:
    """Lemmas 4-6 for every family member taken as a deterministic hash."""
    m = family.m_size
    c_grid = [c for c in c_grid if c > 1]
    out = []
    for s in s_grid:
        scales = lhs_scales(source, family, s)
        for c in c_grid:
            for kind in kinds:
                if not kind_defined_at(kind, s):
                    continue
                rhs = converse_rhs(source, None, s, m, c, kind)
                values = scales[kind_info(kind)[1]]
                for x, lhs in enumerate(values):
                    out.append(make_report(kind, s, c, None, m, float(lhs), rhs, member=x))
    return out


def verify(
    source: JointSource,
    family: HashFamily,
    s_grid: Sequence[float],
    c_grid: Sequence[float] = (1.01, 1.5, 3.0),
    epsilon: float | None = None,
) -> list[BoundReport]:
    """Run every one-shot bound; direct lemmas first, then converse ones."""
    s_grid = list(s_grid)
    if not s_grid:
        return []
    return verify_direct(source, family, s_grid, c_grid, epsilon) + verify_converse(source, family, s_grid, c_grid)


def summarize(reports: Iterable[BoundReport]) -> dict:
    counts: dict[int, dict[str, int]] = {}
    bad = []
    for r in reports:
        row = counts.setdefault(r.lemma, {"holds": 0, "violated": 0, "reported": 0})
        row[r.status] += 1
        if r.status != "holds":
            bad.append(asdict(r))
    return {"counts": {str(k): v for k, v in sorted(counts.items())}, "violations": bad}


REPORT_COLUMNS = ("lemma", "kind", "s", "c", "epsilon", "M", "lhs", "rhs", "slack", "status")


def reports_to_csv(reports: Iterable[BoundReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS + ("member",))
    for r in reports:
        writer.writerow(
            [r.lemma, r.kind, repr(r.s), _opt(r.c), _opt(r.epsilon), r.m, repr(r.lhs), repr(r.rhs), repr(r.slack), r.status, _opt(r.member)]
        )
    return buf.getvalue()


def reports_to_json(reports: Sequence[BoundReport]) -> str:
    return json.dumps(summarize(reports), indent=2, sort_keys=True)


def _opt(x) -> str:
    return "" if x is None else repr(x)
