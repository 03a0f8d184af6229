"""Finite joint sources P_AE: validation, conditioning and i.i.d. tensoring.

Rows index the secret symbol ``a``, columns index the adversary's side
information ``e``.  All quantities downstream are in nats.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyMatrix, MassNotOne, NegativeEntry, SizeOverflow

#: Offsets with ``abs(s) < S_EPS`` take the Shannon (s -> 0) branch.
S_EPS = 1e-7

MASS_TOL = 1e-9
MAX_TENSOR_ATOMS = 2**24


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class JointSource:
    """Joint pmf over A x E, stored as a read-only ``(a_size, e_size)`` array."""

    p: np.ndarray

    @property
    def a_size(self) -> int:
        return self.p.shape[0]

    @property
    def e_size(self) -> int:
        return self.p.shape[1]

    @property
    def p_a(self) -> np.ndarray:
        return self.p.sum(axis=1)

    @property
    def p_e(self) -> np.ndarray:
        return self.p.sum(axis=0)

    def to_json(self) -> str:
        return json.dumps({"p": self.p.tolist()})

    def __repr__(self) -> str:
        return f"JointSource(a_size={self.a_size}, e_size={self.e_size})"


@dataclass(frozen=True, eq=False)
class CondView:
    """Factorisation P_AE(a, e) = P_{A|E}(a|e) P_E(e)."""

    p_e: np.ndarray
    p_a_given_e: np.ndarray


def load_joint(matrix: Sequence[Sequence[float]] | np.ndarray) -> JointSource:
    """Validate a rectangular matrix of probabilities and wrap it.

    Sums within ``MASS_TOL`` of one are renormalised to exactly one.
    E-columns with zero total mass are dropped.

    Raises
    ------
    EmptyMatrix
        If the matrix has no entries or is ragged.
    NegativeEntry
        If any entry is negative.
    MassNotOne
        If the entries do not sum to one within ``MASS_TOL``.
    """
    try:
        p = np.array(matrix, dtype=float)
    except ValueError as exc:  # ragged rows
        raise EmptyMatrix(f"matrix is not rectangular: {exc}") from None
    if p.ndim == 1:
        p = p[:, None]
    if p.ndim != 2 or p.size == 0:
        raise EmptyMatrix("joint source needs a non-empty 2-D matrix")
    if not np.all(np.isfinite(p)):
        raise NegativeEntry("entries must be finite")
    if np.any(p < 0):
        raise NegativeEntry(f"negative entry {p.min()!r}")
    total = p.sum()
    if abs(total - 1.0) > MASS_TOL:
        raise MassNotOne(f"entries sum to {total!r}")
    p = p / total
    p = p[:, p.sum(axis=0) > 0]
    return JointSource(_frozen(p))


def load_source_file(path: str | Path) -> JointSource:
    """Read a source from JSON (``{"p": [[...], ...]}``) or CSV."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        rows = [[float(x) for x in row] for row in csv.reader(text.splitlines()) if row]
        return load_joint(rows)
    data = json.loads(text)
    if isinstance(data, dict):
        data = data["p"]
    return load_joint(data)


def condition(source: JointSource) -> CondView:
    p_e = source.p_e
    return CondView(p_e=_frozen(p_e), p_a_given_e=_frozen(source.p / p_e))


def tensor_power(source: JointSource, n: int) -> JointSource:
    """Joint pmf of n i.i.d. copies, symbols flattened row-major.

    The composite A-symbol ``(a_1, ..., a_n)`` has index
    ``a_1 * |A|^(n-1) + ... + a_n``, likewise for E.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if (source.a_size * source.e_size) ** n > MAX_TENSOR_ATOMS:
        raise SizeOverflow(
            f"{source.a_size}x{source.e_size} source to the power {n} exceeds {MAX_TENSOR_ATOMS} atoms"
        )
    p = source.p
    out = p
    for _ in range(n - 1):
        # (A1, E1) x (A2, E2) -> (A1 A2, E1 E2)
        out = np.einsum("ij,kl->ikjl", out, p).reshape(out.shape[0] * p.shape[0], out.shape[1] * p.shape[1])
    return JointSource(_frozen(out))


def random_joint(seed: int, a_size: int, e_size: int) -> JointSource:
    """Deterministic random source: normalised i.i.d. exponentials (flat Dirichlet)."""
    if a_size < 1 or e_size < 1:
        raise ValueError("sizes must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.exponential(size=(a_size, e_size))
    return load_joint(x / x.sum())


def uniform_source(a_size: int, e_size: int = 1) -> JointSource:
    return load_joint(np.full((a_size, e_size), 1.0 / (a_size * e_size)))


def product_source(p_a: Sequence[float], p_e: Sequence[float]) -> JointSource:
    return load_joint(np.outer(np.asarray(p_a, float), np.asarray(p_e, float)))


#: The running example source: P(0,0) = 0.7, all other atoms 0.1.
CANON = load_joint([[0.7, 0.1], [0.1, 0.1]])
