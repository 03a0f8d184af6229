"""Finite weighted hash families and exact collision certification.

A family is an explicit ``(k, |A|)`` integer table: row ``x`` lists the hash
values ``f_x(0), ..., f_x(|A|-1)`` in ``{0, ..., M-1}``, drawn with
probability ``weights[x]``.  Keeping the family finite makes every average over
the hash index an exact weighted sum.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, SizeOverflow

log = logging.getLogger(__name__)

MAX_ALL_FUNCTIONS = 10**6
MAX_EXACT_PAIR_WORK = 10**9
MAX_TOEPLITZ_DOMAIN_BITS = 20
WEIGHT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class HashFamily:
    """Weighted family of maps ``{0..a_size-1} -> {0..m_size-1}``.

    ``certified_epsilon`` is set only for families whose collision bound is
    known exactly (full enumerations); sampled families leave it ``None``.
    """

    a_size: int
    m_size: int
    members: np.ndarray
    weights: np.ndarray
    certified_epsilon: float | None = None
    label: str = field(default="custom")

    def __post_init__(self):
        members = np.array(self.members, dtype=np.int64)
        weights = np.array(self.weights, dtype=float)
        if members.ndim != 2 or members.shape[1] != self.a_size:
            raise DomainError(f"members must have shape (k, {self.a_size})")
        if members.shape[0] == 0:
            raise DomainError("family has no members")
        if self.m_size < 1:
            raise DomainError("M must be >= 1")
        if members.min() < 0 or members.max() >= self.m_size:
            raise DomainError(f"hash values must lie in [0, {self.m_size})")
        if weights.shape != (members.shape[0],) or np.any(weights < 0):
            raise DomainError("weights must be a non-negative vector, one per member")
        if abs(weights.sum() - 1) > WEIGHT_TOL:
            raise DomainError(f"weights sum to {weights.sum()!r}")
        members.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.members.shape[0]

    @property
    def certified(self) -> bool:
        return self.certified_epsilon is not None

    def apply(self, x: int, a):
        """Hash value(s) of ``a`` under member ``x``."""
        return self.members[x][a]

    def to_json(self) -> str:
        data = {"m": self.m_size, "members": self.members.tolist(), "weights": self.weights.tolist()}
        if self.certified_epsilon is not None:
            data["certified_epsilon"] = self.certified_epsilon
        return json.dumps(data)

    @classmethod
    def from_json(cls, text: str) -> "HashFamily":
        data = json.loads(text)
        members = np.array(data["members"], dtype=np.int64)
        return cls(
            a_size=members.shape[1],
            m_size=int(data["m"]),
            members=members,
            weights=np.array(data["weights"], dtype=float),
            certified_epsilon=data.get("certified_epsilon"),
            label="json",
        )


def load_family_file(path: str | Path) -> HashFamily:
    return HashFamily.from_json(Path(path).read_text())


def single_map(f, m_size: int) -> HashFamily:
    """A deterministic hash as a one-member family."""
    f = np.asarray(f, dtype=np.int64)
    return HashFamily(len(f), m_size, f[None, :], np.ones(1), label="single")


def all_functions_family(a_size: int, m: int) -> HashFamily:
    """Uniform random binning: every map ``A -> {0..M-1}``, equally weighted.

    Distinct inputs collide with probability exactly ``1/M``, so the family
    is universal_2 with ``epsilon = 1``.
    """
    if a_size < 1 or m < 1:
        raise DomainError("a_size and m must be >= 1")
    if m**a_size > MAX_ALL_FUNCTIONS:
        raise SizeOverflow(f"{m}^{a_size} functions exceeds {MAX_ALL_FUNCTIONS}")
    members = np.array(list(itertools.product(range(m), repeat=a_size)), dtype=np.int64)
    k = members.shape[0]
    return HashFamily(a_size, m, members, np.full(k, 1.0 / k), certified_epsilon=1.0, label=f"all:{m}")


def _toeplitz_table(diagonals: np.ndarray, in_bits: int, out_bits: int) -> np.ndarray:
    """Hash tables of the GF(2) Toeplitz matrices given by their diagonal bits.

    ``diagonals`` has shape ``(k, in_bits + out_bits - 1)``; entry ``(i, j)``
    of the matrix is ``diagonals[i - j + in_bits - 1]``.  Bit ``j`` of an
    input is ``(a >> j) & 1``, likewise for the output.
    """
    i = np.arange(out_bits)[:, None]
    j = np.arange(in_bits)[None, :]
    mats = diagonals[:, i - j + in_bits - 1]  # (k, out, in)
    a = np.arange(2**in_bits)
    bits = (a[:, None] >> np.arange(in_bits)[None, :]) & 1  # (2^in, in)
    out = np.einsum("koi,ai->kao", mats, bits) & 1
    return out @ (1 << np.arange(out_bits))


def toeplitz_family(in_bits: int, out_bits: int, seed: int | None = None, sample_count: int | None = None) -> HashFamily:
    """Binary Toeplitz hashing ``{0,1}^in -> {0,1}^out`` over GF(2).

    With ``sample_count=None`` all ``2^(in+out-1)`` matrices are enumerated
    and the family is certified universal_2.  Otherwise ``sample_count``
    matrices are drawn with ``seed`` and the family is left uncertified.
    """
    if not 1 <= out_bits <= in_bits:
        raise DomainError(f"need 1 <= out_bits <= in_bits, got {out_bits}, {in_bits}")
    if in_bits > MAX_TOEPLITZ_DOMAIN_BITS:
        raise SizeOverflow(f"domain 2^{in_bits} too large to materialise")
    width = in_bits + out_bits - 1
    if sample_count is None:
        if 2**width * 2**in_bits > 10**8:
            raise SizeOverflow(f"full Toeplitz family 2^{width} too large; pass sample_count")
        codes = np.arange(2**width)
        diagonals = (codes[:, None] >> np.arange(width)[None, :]) & 1
        certified, label = 1.0, f"toeplitz:{in_bits}:{out_bits}"
    else:
        if sample_count < 1:
            raise DomainError("sample_count must be >= 1")
        if sample_count * 2**in_bits > 10**8:
            raise SizeOverflow(f"{sample_count} tables over 2^{in_bits} inputs too large to materialise")
        rng = np.random.default_rng(seed)
        diagonals = rng.integers(0, 2, size=(sample_count, width))
        certified, label = None, f"toeplitz:{in_bits}:{out_bits}:{sample_count}"
    members = _toeplitz_table(diagonals, in_bits, out_bits)
    k = members.shape[0]
    return HashFamily(2**in_bits, 2**out_bits, members, np.full(k, 1.0 / k), certified_epsilon=certified, label=label)


def collision_matrix(family: HashFamily) -> np.ndarray:
    """``Pr_X[f_X(a1) = f_X(a2)]`` for every pair; the diagonal is 1."""
    a = family.a_size
    out = np.zeros((a, a))
    for row, w in zip(family.members, family.weights):
        out += w * (row[:, None] == row[None, :])
    return out


def verify_epsilon(family: HashFamily, sample_pairs: int = 100_000, seed: int = 0) -> float:
    """``M * max_{a1 != a2} Pr[f_X(a1) = f_X(a2)]``.

    Exact when ``a_size^2 * len(family) <= 1e9``; otherwise the maximum is
    taken over ``sample_pairs`` random pairs and is only a lower estimate.
    """
    a = family.a_size
    if a < 2:
        return 0.0
    if a * a * len(family) <= MAX_EXACT_PAIR_WORK:
        coll = collision_matrix(family)
        np.fill_diagonal(coll, 0.0)
        return float(family.m_size * coll.max())
    rng = np.random.default_rng(seed)
    a1 = rng.integers(0, a, sample_pairs)
    a2 = (a1 + rng.integers(1, a, sample_pairs)) % a
    hits = family.members[:, a1] == family.members[:, a2]
    est = float(family.m_size * np.max(family.weights @ hits))
    log.warning("epsilon estimated from %d sampled pairs (lower estimate): %.6g", sample_pairs, est)
    return est
