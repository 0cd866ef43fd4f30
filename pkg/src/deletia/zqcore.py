"""Exact arithmetic over Z_q: vectors, matrices, centered norms, Gaussian
weight tables, gadget matrices, and ISIS certificate verification.

Entries are stored canonically in [0, q); all geometry (norms, Gaussian
weights) is computed on centered representatives in (-q/2, q/2].
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

ENUM_GUARD = 1 << 22  # largest table / state size we agree to enumerate


class EnumerationTooLarge(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


def centered(x: int, q: int) -> int:
    """Representative of x mod q in the interval (-q/2, q/2]."""
    x = x % q
    return x - q if 2 * x > q else x


def centered_array(a: np.ndarray, q: int) -> np.ndarray:
    a = np.asarray(a) % q
    return np.where(2 * a > q, a - q, a)


def _as_entries(x) -> np.ndarray:
    if isinstance(x, (ZqVector, ZqMatrix)):
        return x.entries
    return np.asarray(x, dtype=np.int64)


@dataclass(frozen=True)
class ZqVector:
    """Integer vector with entries canonically reduced mod q."""

    entries: np.ndarray
    q: int

    def __post_init__(self):
        if self.q < 2:
            raise ValueError(f"modulus must be >= 2, got {self.q}")
        e = np.asarray(self.entries, dtype=np.int64) % self.q
        if e.ndim != 1 or e.size == 0:
            raise ValueError("ZqVector needs a nonempty 1-d entry list")
        object.__setattr__(self, "entries", e)

    def __len__(self) -> int:
        return self.entries.size

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ZqVector)
            and self.q == other.q
            and np.array_equal(self.entries, other.entries)
        )

    def centered(self) -> np.ndarray:
        return centered_array(self.entries, self.q)

    def norm_sq(self) -> int:
        """Exact squared Euclidean norm of the centered representative."""
        c = self.centered()
        return int(np.dot(c, c))

    def __add__(self, other: "ZqVector") -> "ZqVector":
        self._check(other)
        return ZqVector((self.entries + other.entries) % self.q, self.q)

    def __sub__(self, other: "ZqVector") -> "ZqVector":
        self._check(other)
        return ZqVector((self.entries - other.entries) % self.q, self.q)

    def __neg__(self) -> "ZqVector":
        return ZqVector((-self.entries) % self.q, self.q)

    def dot(self, other: "ZqVector") -> int:
        self._check(other)
        return int(np.dot(self.entries, other.entries) % self.q)

    def _check(self, other: "ZqVector"):
        if self.q != other.q or len(self) != len(other):
            raise DimensionMismatch("vector shape/modulus mismatch")


@dataclass(frozen=True)
class ZqMatrix:
    """Row-major integer matrix with entries canonically reduced mod q."""

    entries: np.ndarray
    q: int

    def __post_init__(self):
        if self.q < 2:
            raise ValueError(f"modulus must be >= 2, got {self.q}")
        e = np.asarray(self.entries, dtype=np.int64) % self.q
        if e.ndim != 2:
            raise ValueError("ZqMatrix needs a 2-d entry array")
        object.__setattr__(self, "entries", e)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ZqMatrix)
            and self.q == other.q
            and np.array_equal(self.entries, other.entries)
        )

    def transpose(self) -> "ZqMatrix":
        return ZqMatrix(self.entries.T.copy(), self.q)

    def __add__(self, other: "ZqMatrix") -> "ZqMatrix":
        if self.q != other.q or self.entries.shape != other.entries.shape:
            raise DimensionMismatch("matrix shape/modulus mismatch")
        return ZqMatrix((self.entries + other.entries) % self.q, self.q)

    def __matmul__(self, other):
        if isinstance(other, ZqVector):
            if other.q != self.q or self.cols != len(other):
                raise DimensionMismatch(
                    f"cannot multiply {self.rows}x{self.cols} by vector of length {len(other)}"
                )
            out = matmul_mod(self.entries, other.entries[:, None], self.q)
            return ZqVector(out[:, 0], self.q)
        if isinstance(other, ZqMatrix):
            if other.q != self.q or self.cols != other.rows:
                raise DimensionMismatch(
                    f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
                )
            return ZqMatrix(matmul_mod(self.entries, other.entries, self.q), self.q)
        return NotImplemented

    def column(self, j: int) -> ZqVector:
        return ZqVector(self.entries[:, j].copy(), self.q)


def matmul_mod(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """a @ b mod q without int64 overflow, chunking the inner dimension."""
    a = np.asarray(a, dtype=np.int64) % q
    b = np.asarray(b, dtype=np.int64) % q
    inner = a.shape[1]
    # products are < q^2; keep chunk * q^2 below 2^62
    chunk = max(1, (1 << 62) // max(1, (q - 1) ** 2))
    if inner <= chunk:
        return (a @ b) % q
    acc = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for lo in range(0, inner, chunk):
        hi = min(inner, lo + chunk)
        acc = (acc + a[:, lo:hi] @ b[lo:hi, :]) % q
    return acc


# ---------------------------------------------------------------------------
# Gaussian weights
# ---------------------------------------------------------------------------

@dataclass
class GaussianParams:
    """Width sigma, modulus q, and dimension m for Gaussian weight tables.

    ``interval_ok`` records whether sigma lies in (sqrt(8m), q/sqrt(8m)); the
    looser (sqrt(2m), q/sqrt(2m)) variant is recorded separately since both
    appear as stated requirements in different places.
    """

    sigma: float
    q: int
    m: int
    interval_ok: bool = field(init=False)
    interval_ok_loose: bool = field(init=False)

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        s, q, m = float(self.sigma), self.q, self.m
        self.interval_ok = math.sqrt(8 * m) < s < q / math.sqrt(8 * m)
        self.interval_ok_loose = math.sqrt(2 * m) < s < q / math.sqrt(2 * m)


def rho_sigma(x, sigma: float, q: int | None = None) -> float:
    """Gaussian weight exp(-pi * ||x||^2 / sigma^2) on centered representatives."""
    if isinstance(x, ZqVector):
        nsq = x.norm_sq()
    else:
        if q is None:
            raise ValueError("q required when x is a bare sequence")
        nsq = int(np.sum(centered_array(np.asarray(x, dtype=np.int64), q) ** 2))
    return math.exp(-math.pi * nsq / float(sigma) ** 2)


def zq_box(q: int, m: int) -> Iterator[tuple[int, ...]]:
    """All of Z_q^m in row-major (mixed-radix) order."""
    return itertools.product(range(q), repeat=m)


def box_index(x: Iterable[int], q: int) -> int:
    idx = 0
    for c in x:
        idx = idx * q + (c % q)
    return idx


def truncated_gaussian_pmf(params: GaussianParams) -> np.ndarray:
    """Probability table of D_{Z_q^m, sigma} over Z_q^m, row-major.

    Support is the ball ||centered(x)|| <= sigma * sqrt(m); weights are
    rho_sigma on centered representatives, normalized over the support.
    """
    q, m, sigma = params.q, params.m, float(params.sigma)
    if q**m > ENUM_GUARD:
        raise EnumerationTooLarge(f"q^m = {q**m} exceeds {ENUM_GUARD}")
    digits = centered_array(np.arange(q, dtype=np.int64), q).astype(float)
    nsq = np.zeros(1)
    for _ in range(m):
        nsq = (nsq[:, None] + (digits**2)[None, :]).reshape(-1)
    w = np.exp(-math.pi * nsq / sigma**2)
    w[nsq > sigma**2 * m] = 0.0
    total = w.sum()
    if total <= 0:
        raise ValueError("empty Gaussian support")
    return w / total


def gaussian_pmf_1d(sigma: float, q: int) -> tuple[np.ndarray, np.ndarray]:
    """(values, probs) of D_{Z_q, sigma}, windowed so large q stays cheap.

    Support is |x| <= sigma (same truncation rule as truncated_gaussian_pmf
    at m = 1); values are centered representatives.
    """
    half = min(q // 2, int(math.floor(sigma)))
    vals = np.arange(-half, half + 1, dtype=np.int64)
    if q % 2 == 0 and half == q // 2:
        vals = vals[vals != -half]  # (-q/2, q/2] excludes -q/2
    w = np.exp(-math.pi * vals.astype(float) ** 2 / float(sigma) ** 2)
    return vals, w / w.sum()


# ---------------------------------------------------------------------------
# Gadget machinery
# ---------------------------------------------------------------------------

def gadget_width(q: int) -> int:
    return max(1, math.ceil(math.log2(q)))


def gadget_matrix(q: int, d: int) -> ZqMatrix:
    """G = [I | 2I | ... | 2^(K-1) I] with K = ceil(log2 q), shape d x dK."""
    k = gadget_width(q)
    blocks = [np.eye(d, dtype=np.int64) * (1 << j) for j in range(k)]
    return ZqMatrix(np.concatenate(blocks, axis=1) % q, q)


def gadget_inverse(v, q: int, d: int) -> np.ndarray:
    """Binary decomposition u with G @ u = v (mod q).

    Accepts a length-d vector (returns shape (dK,)) or a d x N matrix
    (returns shape (dK, N)); output entries are in {0, 1}.
    """
    k = gadget_width(q)
    a = _as_entries(v) % q
    vec = a.ndim == 1
    if vec:
        a = a[:, None]
    if a.shape[0] != d:
        raise DimensionMismatch(f"expected {d} rows, got {a.shape[0]}")
    out = np.zeros((d * k, a.shape[1]), dtype=np.int64)
    for j in range(k):
        out[j * d : (j + 1) * d, :] = (a >> j) & 1
    return out[:, 0] if vec else out


def isis_verify(A: ZqMatrix, y: ZqVector, pi: ZqVector, norm_bound=None,
                *, norm_bound_sq=None) -> bool:
    """Check A @ pi == y (mod q) and ||centered(pi)||^2 <= norm_bound^2.

    The norm comparison is exact on squared rationals so float ties cannot
    flip a verdict; pass ``norm_bound_sq`` as an exact Fraction when the
    bound itself is irrational.
    """
    if A.q != y.q or A.q != pi.q:
        raise DimensionMismatch("modulus mismatch")
    if A.cols != len(pi) or A.rows != len(y):
        raise DimensionMismatch("shape mismatch in isis_verify")
    if (A @ pi) != y:
        return False
    if norm_bound_sq is None:
        if norm_bound is None:
            raise ValueError("need norm_bound or norm_bound_sq")
        norm_bound_sq = Fraction(norm_bound) ** 2
    return Fraction(pi.norm_sq()) <= Fraction(norm_bound_sq)


# ---------------------------------------------------------------------------
# Serialization (decimal, row-major, header "zq <q> <rows> <cols>")
# ---------------------------------------------------------------------------

def serialize_zq(obj) -> str:
    if isinstance(obj, ZqVector):
        rows, cols = len(obj), 1
        body = "\n".join(str(int(e)) for e in obj.entries)
    elif isinstance(obj, ZqMatrix):
        rows, cols = obj.rows, obj.cols
        body = "\n".join(" ".join(str(int(e)) for e in row) for row in obj.entries)
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")
    return f"zq {obj.q} {rows} {cols}\n{body}\n"


def parse_zq(text: str):
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    tag, q, rows, cols = lines[0].split()
    if tag != "zq":
        raise ValueError(f"bad header {lines[0]!r}")
    q, rows, cols = int(q), int(rows), int(cols)
    flat = [int(tok) for ln in lines[1:] for tok in ln.split()]
    if len(flat) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, got {len(flat)}")
    arr = np.array(flat, dtype=np.int64).reshape(rows, cols)
    if cols == 1:
        return ZqVector(arr[:, 0], q)
    return ZqMatrix(arr, q)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all n < 3.3e24."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True
