"""Exact finite-n information-spectrum quantities by type enumeration.

For n i.i.d. draws from ``P_AE`` the entropy density
``-log P^n_{A|E}(a^n|e^n)`` depends only on the joint type (the occupation
counts of the ``k = |A||E|`` joint symbols), so tail probabilities reduce to
sums over the ``C(n+k-1, k-1)`` compositions of n.  Compositions are streamed
in blocks: the leading ``k-3`` counts are enumerated in Python and the last
three are vectorised, so no atom list is ever stored.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.special import gammaln, logsumexp

from .dist import JointSource
from .errors import DomainError, GrowthCapWarning, SizeOverflow
from .optimize import maximize_concave

MAX_TYPES = 10**8
CRAMER_T_CAP = 50.0
TIE_TOL = 1e-12


@dataclass(frozen=True)
class TypeAtom:
    """A joint type: counts per joint symbol, its total log-mass and density sum."""

    counts: tuple[int, ...]
    log_prob: float
    sum_density: float


def _symbols(source: JointSource) -> tuple[np.ndarray, np.ndarray]:
    """Log-probabilities and entropy densities of the joint symbols with positive mass."""
    p = source.p
    on = p > 0
    cond = p / source.p_e[None, :]
    return np.log(p[on]), -np.log(cond[on])


def type_count(n: int, k: int) -> int:
    return math.comb(n + k - 1, k - 1)


def _last_three(rem: int) -> np.ndarray:
    """All compositions of ``rem`` into three parts, shape ``(rows, 3)``."""
    sizes = np.arange(rem + 1, 0, -1)
    a = np.repeat(np.arange(rem + 1), sizes)
    starts = np.repeat(np.cumsum(sizes) - sizes, sizes)
    b = np.arange(len(a)) - starts
    return np.stack([a, b, rem - a - b], axis=1)


def _blocks(n: int, k: int) -> Iterator[np.ndarray]:
    """Compositions of n into k parts, yielded as ``(rows, k)`` integer blocks.

    The last ``min(k, 3)`` coordinates are vectorised; the leading ones are
    enumerated in Python.
    """
    if k == 1:
        yield np.array([[n]])
        return
    if k == 2:
        c = np.arange(n + 1)
        yield np.stack([c, n - c], axis=1)
        return

    def rec(prefix: list[int], rem: int):
        if len(prefix) == k - 3:
            tail = _last_three(rem)
            block = np.empty((len(tail), k), dtype=np.int64)
            block[:, : k - 3] = prefix
            block[:, k - 3 :] = tail
            yield block
            return
        for c in range(rem + 1):
            yield from rec(prefix + [c], rem - c)

    yield from rec([], n)


def _check_size(n: int, k: int) -> None:
    if n < 1:
        raise DomainError("n must be >= 1")
    if type_count(n, k) > MAX_TYPES:
        raise SizeOverflow(f"{type_count(n, k)} types for n={n}, k={k} exceeds {MAX_TYPES}")


def _type_blocks(source: JointSource, n: int):
    """Yield ``(counts, log_prob, sum_density)`` arrays block by block."""
    logp, dens = _symbols(source)
    k = len(logp)
    _check_size(n, k)
    lfact = gammaln(np.arange(n + 2) + 1.0)
    for counts in _blocks(n, k):
        log_mult = lfact[n] - lfact[counts].sum(axis=1)
        yield counts, log_mult + counts @ logp, counts @ dens


def iter_types(source: JointSource, n: int) -> Iterator[TypeAtom]:
    """All joint types of length-n sequences with their masses."""
    for counts, lp, sd in _type_blocks(source, n):
        for row, a, b in zip(counts, lp, sd):
            yield TypeAtom(tuple(int(x) for x in row), float(a), float(b))


def log_exact_tail(source: JointSource, n: int, r: float) -> float:
    """``log P^n{ -(1/n) log P^n_{A|E} >= r }``; ties on the boundary count as inside."""
    cut = n * r - TIE_TOL * max(1.0, abs(n * r))
    parts = []
    for _, lp, sd in _type_blocks(source, n):
        sel = sd >= cut
        if np.any(sel):
            parts.append(logsumexp(lp[sel]))
    return float(logsumexp(parts)) if parts else -math.inf


def exact_tail(source: JointSource, n: int, r: float) -> float:
    """Exact probability that the normalised entropy density is at least ``r``."""
    return math.exp(log_exact_tail(source, n, r))


def cramer_exponent(source: JointSource, r: float, t_cap: float = CRAMER_T_CAP) -> float:
    """``max_{0 <= t <= T} t (r - H_{1-t}(A|E))`` with the cap ``T = 50``.

    ``t H_{1-t} = -log sum P_AE P_{A|E}^(-t)`` is the cumulant generating
    function of the entropy density, so the objective is concave in ``t``.
    A maximiser on the cap means the exponent is still growing (``r`` above
    the largest density) and a :class:`GrowthCapWarning` is emitted.
    """
    if r < 0:
        raise DomainError(f"rate must be >= 0, got {r!r}")
    logp, dens = _symbols(source)
    obj = lambda t: t * r - float(logsumexp(logp + t * dens))
    res = maximize_concave(obj, 0.0, t_cap, tol=1e-11)
    if res.argmax_t >= t_cap * (1 - 1e-9):
        warnings.warn(f"exponent still growing at t = {t_cap}; value capped", GrowthCapWarning, stacklevel=2)
    return max(res.value, 0.0)


def collision_constant(source: JointSource) -> float:
    """``S = sum_e P_E(e) sum_a P_{A|E}(a|e)^2``, the single-letter collision probability."""
    cond = source.p / source.p_e[None, :]
    return float(np.sum(source.p * cond))


def collision_sum_exact(source: JointSource, n: int, m: int) -> float:
    """Expected conditional collision probability of the hashed n-block.

    Averaged over uniform random binning into ``m`` bins,
    ``sum_e P^n_E(e) [pi(e) + (1 - pi(e)) / M]`` with ``pi(e)`` the product
    of the per-letter collision probabilities, which collapses to
    ``S^n + (1 - S^n) / M``.
    """
    if n < 1 or m < 1:
        raise DomainError("n and m must be >= 1")
    sn = collision_constant(source) ** n
    return sn + (1 - sn) / m


def collision_sum_by_types(source: JointSource, n: int, m: int) -> float:
    """Same expectation aggregated over the types of the E-sequence."""
    if n < 1 or m < 1:
        raise DomainError("n and m must be >= 1")
    p_e = source.p_e
    cond = source.p / p_e[None, :]
    log_pi = np.log(np.sum(cond**2, axis=0))
    ke = len(p_e)
    _check_size(n, ke)
    lfact = gammaln(np.arange(n + 2) + 1.0)
    total = 0.0
    for counts in _blocks(n, ke):
        lw = lfact[n] - lfact[counts].sum(axis=1) + counts @ np.log(p_e)
        pi = np.exp(counts @ log_pi)
        total += float(np.sum(np.exp(lw) * (pi + (1 - pi) / m)))
    return total


SPECTRUM_COLUMNS = ("n", "r", "exact_tail", "chernoff_bound", "gap")


def spectrum_rows(source: JointSource, ns, rs) -> list[dict]:
    rows = []
    for n in ns:
        for r in rs:
            tail = exact_tail(source, n, r)
            bound = math.exp(-n * cramer_exponent(source, r))
            rows.append({"n": n, "r": r, "exact_tail": tail, "chernoff_bound": bound, "gap": bound - tail})
    return rows


def spectrum_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SPECTRUM_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()
