"""Exact linear algebra over the rationals and over prime fields.

Matrices are numpy arrays: Fraction entries (dtype=object) for Q, int64
residues for F_p (object for very large p so products cannot overflow).
Everything downstream (representations, covers, syzygies) is built on the
handful of primitives here: rref, nullspace, solve, and echelon spans.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "FieldSpec",
    "ExactField",
    "Rationals",
    "PrimeField",
    "EchelonSpan",
    "QQ",
    "GF",
    "make_field",
    "parse_field_label",
]


@dataclass(frozen=True)
class FieldSpec:
    """Descriptor for the coefficient field: exact rationals or F_p."""

    kind: str  # "rational" | "prime"
    p: int | None = None

    def __post_init__(self):
        if self.kind not in ("rational", "prime"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.kind == "prime":
            if self.p is None or self.p < 2 or self.p > 2**31:
                raise ValueError("prime field needs 2 <= p <= 2**31")
            if not _is_prime(self.p):
                raise ValueError(f"{self.p} is not prime")

    @property
    def label(self) -> str:
        return "Q" if self.kind == "rational" else f"F{self.p}"


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class ExactField:
    """Common matrix toolkit; subclasses fix the scalar arithmetic."""

    spec: FieldSpec
    dtype: type

    # -- scalars ------------------------------------------------------------

    def coerce(self, x):
        raise NotImplementedError

    def inv(self, x):
        raise NotImplementedError

    def random_scalar(self, rng):
        raise NotImplementedError

    @property
    def zero(self):
        return self.coerce(0)

    @property
    def one(self):
        return self.coerce(1)

    # -- matrix construction --------------------------------------------------

    def reduce(self, a: np.ndarray) -> np.ndarray:
        """Normalize entries in place-compatible fashion (mod p; no-op on Q)."""
        return a

    def zeros(self, m: int, n: int) -> np.ndarray:
        a = np.zeros((m, n), dtype=self.dtype)
        if self.dtype is object:
            a[...] = self.zero
        return a

    def zeros_vec(self, n: int) -> np.ndarray:
        a = np.zeros(n, dtype=self.dtype)
        if self.dtype is object:
            a[...] = self.zero
        return a

    def eye(self, n: int) -> np.ndarray:
        a = self.zeros(n, n)
        for i in range(n):
            a[i, i] = self.one
        return a

    def mat(self, rows) -> np.ndarray:
        rows = list(rows)
        if not rows:
            return self.zeros(0, 0)
        n = len(rows[0])
        a = self.zeros(len(rows), n)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise ValueError("ragged matrix")
            for j, x in enumerate(row):
                a[i, j] = self.coerce(x)
        return a

    def vec(self, entries) -> np.ndarray:
        entries = list(entries)
        a = self.zeros_vec(len(entries))
        for i, x in enumerate(entries):
            a[i] = self.coerce(x)
        return a

    # -- matrix arithmetic ----------------------------------------------------

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.shape[1] != b.shape[0]:
            raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
        if a.shape[0] == 0 or b.shape[1] == 0 or a.shape[1] == 0:
            return self.zeros(a.shape[0], b.shape[1])
        return self.reduce(a.dot(b))

    def matvec(self, a: np.ndarray, v: np.ndarray) -> np.ndarray:
        if a.shape[1] != v.shape[0]:
            raise ValueError(f"shape mismatch {a.shape} @ {v.shape}")
        if a.shape[0] == 0:
            return self.zeros_vec(0)
        if a.shape[1] == 0:
            return self.zeros_vec(a.shape[0])
        return self.reduce(a.dot(v))

    def add(self, a, b):
        return self.reduce(a + b)

    def sub(self, a, b):
        return self.reduce(a - b)

    def scale(self, c, a):
        return self.reduce(a * c)

    def is_zero(self, a: np.ndarray) -> bool:
        return a.size == 0 or not np.any(a != 0)

    def eq(self, a: np.ndarray, b: np.ndarray) -> bool:
        return a.shape == b.shape and self.is_zero(self.sub(a, b))

    # -- elimination ------------------------------------------------------------

    def rref(self, a: np.ndarray) -> tuple[np.ndarray, list[int]]:
        """Reduced row echelon form; returns (R, pivot column list)."""
        a = self.reduce(np.array(a, dtype=self.dtype, copy=True))
        m, n = a.shape
        pivots: list[int] = []
        r = 0
        for c in range(n):
            if r == m:
                break
            nz = np.flatnonzero(a[r:, c] != 0)
            if nz.size == 0:
                continue
            i = r + int(nz[0])
            if i != r:
                a[[r, i]] = a[[i, r]]
            a[r] = self.reduce(a[r] * self.inv(a[r, c]))
            col = np.array(a[:, c], copy=True)
            col[r] = self.zero
            if np.any(col != 0):
                a = self.reduce(a - np.outer(col, a[r]))
            pivots.append(c)
            r += 1
        return a, pivots

    def rank(self, a: np.ndarray) -> int:
        if a.size == 0:
            return 0
        return len(self.rref(a)[1])

    def nullspace(self, a: np.ndarray) -> np.ndarray:
        """Columns form a basis of {x : a @ x = 0}; deterministic order."""
        m, n = a.shape
        if n == 0:
            return self.zeros(0, 0)
        if m == 0:
            return self.eye(n)
        r, pivots = self.rref(a)
        pivot_set = set(pivots)
        free = [j for j in range(n) if j not in pivot_set]
        basis = self.zeros(n, len(free))
        if free:
            for k, f in enumerate(free):
                basis[f, k] = self.one
            if pivots:
                basis[pivots, :] = self.reduce(-r[:len(pivots), :][:, free])
        return basis

    def solve(self, a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
        """Exact solution X of a @ X = b (b a matrix or vector), or None."""
        vec = b.ndim == 1
        bm = b.reshape(-1, 1) if vec else b
        m, n = a.shape
        if bm.shape[0] != m:
            raise ValueError("rhs shape mismatch")
        aug = self.zeros(m, n + bm.shape[1])
        aug[:, :n] = a
        aug[:, n:] = bm
        r, pivots = self.rref(aug)
        if any(p >= n for p in pivots):
            return None
        x = self.zeros(n, bm.shape[1])
        for i, p in enumerate(pivots):
            x[p, :] = r[i, n:]
        x = self.reduce(x)
        return x[:, 0] if vec else x

    def column_span_basis(self, a: np.ndarray) -> np.ndarray:
        """Canonical basis (as columns) of the column space of a."""
        r, pivots = self.rref(a.T)
        return r[: len(pivots)].T.copy()


class Rationals(ExactField):
    dtype = object

    def __init__(self):
        self.spec = FieldSpec("rational")

    def coerce(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, (int, np.integer)):
            return Fraction(int(x))
        if isinstance(x, str):
            return Fraction(x)
        raise TypeError(f"cannot coerce {x!r} into Q")

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("inverse of 0")
        return Fraction(1) / Fraction(x)

    def random_scalar(self, rng):
        return Fraction(rng.randint(-3, 3))

    def __repr__(self):
        return "Q"


class PrimeField(ExactField):
    def __init__(self, p: int):
        self.spec = FieldSpec("prime", p)
        self.p = p
        # int64 products stay exact only while k*(p-1)^2 < 2^63
        self.dtype = np.int64 if p < 2**20 else object

    def coerce(self, x):
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ZeroDivisionError("denominator divisible by p")
            x = x.numerator * pow(x.denominator, -1, self.p)
        v = int(x) % self.p
        return np.int64(v) if self.dtype is np.int64 else v

    def inv(self, x):
        v = int(x) % self.p
        if v == 0:
            raise ZeroDivisionError("inverse of 0")
        r = pow(v, self.p - 2, self.p)
        return np.int64(r) if self.dtype is np.int64 else r

    def random_scalar(self, rng):
        return self.coerce(rng.randrange(self.p))

    def reduce(self, a):
        return a % self.p

    def random_nonzero(self, rng):
        return self.coerce(rng.randrange(1, self.p))

    def __repr__(self):
        return f"F{self.p}"


_QQ = Rationals()
_GF_CACHE: dict[int, PrimeField] = {}


def QQ() -> Rationals:
    return _QQ


def GF(p: int) -> PrimeField:
    if p not in _GF_CACHE:
        _GF_CACHE[p] = PrimeField(p)
    return _GF_CACHE[p]


def make_field(spec: FieldSpec | ExactField | str) -> ExactField:
    if isinstance(spec, ExactField):
        return spec
    if isinstance(spec, str):
        spec = parse_field_label(spec)
    return _QQ if spec.kind == "rational" else GF(spec.p)


def parse_field_label(label: str) -> FieldSpec:
    label = label.strip()
    if label in ("Q", "QQ", "rational"):
        return FieldSpec("rational")
    if label.upper().startswith("F"):
        return FieldSpec("prime", int(label[1:]))
    raise ValueError(f"cannot parse field label {label!r}")


class EchelonSpan:
    """A subspace of K^dim kept in reduced row echelon form, supporting
    incremental inserts.  The workhorse behind radical spans, generated
    submodules, and quotient constructions.  Reduction against the span is
    a single fancy-indexed matrix product, so ranks stay cheap."""

    __slots__ = ("field", "dim", "mat", "pivots")

    def __init__(self, field: ExactField, dim: int):
        self.field = field
        self.dim = dim
        self.mat = field.zeros(0, dim)
        self.pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def rows(self):
        return [self.mat[i] for i in range(self.mat.shape[0])]

    def reduce_vec(self, v: np.ndarray) -> np.ndarray:
        f = self.field
        if not self.pivots:
            return f.reduce(np.array(v, dtype=f.dtype, copy=True))
        coeffs = np.asarray(v, dtype=f.dtype)[self.pivots]
        if not np.any(coeffs != 0):
            return f.reduce(np.array(v, dtype=f.dtype, copy=True))
        return f.reduce(v - coeffs.dot(self.mat))

    def contains(self, v: np.ndarray) -> bool:
        return self.field.is_zero(self.reduce_vec(v))

    def add(self, v: np.ndarray) -> bool:
        """Insert v; returns True if the span grew."""
        f = self.field
        v = self.reduce_vec(v)
        nz = np.flatnonzero(v != 0)
        if nz.size == 0:
            return False
        p = int(nz[0])
        v = f.reduce(v * f.inv(v[p]))
        import bisect

        where = bisect.bisect(self.pivots, p)
        if self.pivots:
            col = np.array(self.mat[:, p], copy=True)
            if np.any(col != 0):
                self.mat = f.reduce(self.mat - np.outer(col, v))
        self.mat = np.insert(self.mat, where, v, axis=0)
        self.pivots.insert(where, p)
        return True

    def add_many(self, vectors) -> None:
        for v in vectors:
            self.add(v)

    @staticmethod
    def from_rref(field: "ExactField", mat: np.ndarray, pivots: list[int]) -> "EchelonSpan":
        """Wrap rows already in reduced echelon form (no copies, no work)."""
        out = EchelonSpan(field, mat.shape[1])
        out.mat = mat
        out.pivots = list(pivots)
        return out

    @staticmethod
    def from_rows(field: "ExactField", rows: np.ndarray) -> "EchelonSpan":
        """Echelonize a stack of row vectors in one elimination pass."""
        red, pivots = field.rref(rows)
        return EchelonSpan.from_rref(field, red[: len(pivots)], pivots)

    def matrix(self) -> np.ndarray:
        """Rows = rref basis (rank x dim)."""
        return self.mat

    def basis_columns(self) -> np.ndarray:
        """Columns = rref basis (dim x rank)."""
        return self.mat.T.copy()

    def complement_indices(self) -> list[int]:
        piv = set(self.pivots)
        return [j for j in range(self.dim) if j not in piv]

    def copy(self) -> "EchelonSpan":
        out = EchelonSpan(self.field, self.dim)
        out.mat = np.array(self.mat, copy=True)
        out.pivots = list(self.pivots)
        return out

    def project_coords(self, v: np.ndarray) -> np.ndarray:
        """Coordinates of v + span in the complement basis (unit vectors at
        non-pivot indices)."""
        res = self.reduce_vec(v)
        comp = self.complement_indices()
        out = self.field.zeros_vec(len(comp))
        for k, j in enumerate(comp):
            out[k] = res[j]
        return out
