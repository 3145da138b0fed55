"""Exact linear algebra over prime fields.

Matrices are numpy int64 arrays with entries in [0, p).  All routines are
exact (no floats) and deterministic.  Subspaces are represented by their
reduced-row-echelon basis, so two Subspace objects are equal iff they describe
the same set of vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def check_prime(p: int) -> int:
    if not is_prime(p):
        raise ValueError(f"modulus must be prime, got {p}")
    return p


def as_fp_matrix(rows, p: int) -> np.ndarray:
    m = np.atleast_2d(np.asarray(rows, dtype=np.int64))
    return m % p


def rref(mat: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns, mod p."""
    m = as_fp_matrix(mat, p).copy()
    nrows, ncols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            m[[r, pr]] = m[[pr, r]]
        inv = pow(int(m[r, c]), -1, p)
        m[r] = m[r] * inv % p
        col = m[:, c].copy()
        col[r] = 0
        m = (m - np.outer(col, m[r])) % p
        pivots.append(c)
        r += 1
    return m, pivots


def rref_rank_null(mat, p: int) -> tuple[np.ndarray, int, np.ndarray]:
    """(rref, rank, null-space basis) of a matrix over F_p.

    The null basis rows are the standard special solutions: one per free
    column, ordered by free column, with a 1 in that column.  For a rank-rk
    matrix with k columns the basis has k - rk rows.
    """
    m = as_fp_matrix(mat, p)
    red, pivots = rref(m, p)
    k = m.shape[1]
    free = [c for c in range(k) if c not in pivots]
    basis = np.zeros((len(free), k), dtype=np.int64)
    for i, j in enumerate(free):
        basis[i, j] = 1
        for r, c in enumerate(pivots):
            basis[i, c] = (-red[r, j]) % p
    return red, len(pivots), basis


def rank(mat, p: int) -> int:
    return rref_rank_null(mat, p)[1]


def null_space(mat, p: int) -> np.ndarray:
    return rref_rank_null(mat, p)[2]


def rowspace_basis(rows, p: int) -> np.ndarray:
    """Canonical (RREF) basis of the row space; zero rows dropped."""
    red, pivots = rref(as_fp_matrix(rows, p), p)
    return red[: len(pivots)]


def annihilator(rows, p: int) -> np.ndarray:
    """Canonical basis of {y : s . y = 0 for all s in rowspace(rows)}."""
    return rowspace_basis(null_space(rows, p), p)


def solve(a, b, p: int) -> np.ndarray | None:
    """One solution x of A x = b over F_p, or None when inconsistent."""
    a = as_fp_matrix(a, p)
    bv = np.asarray(b, dtype=np.int64).reshape(-1) % p
    if a.shape[0] != bv.shape[0]:
        raise ValueError("shape mismatch")
    aug = np.concatenate([a, bv[:, None]], axis=1)
    red, pivots = rref(aug, p)
    if a.shape[1] in pivots:
        return None
    x = np.zeros(a.shape[1], dtype=np.int64)
    for r, c in enumerate(pivots):
        x[c] = red[r, a.shape[1]]
    return x


def matmul(a, b, p: int) -> np.ndarray:
    return as_fp_matrix(a, p) @ as_fp_matrix(b, p) % p


@dataclass(frozen=True)
class Subspace:
    """A subspace of F_p^n, stored by its canonical RREF basis.

    basis has shape (dim, n); dim may be 0.  Equality and hashing use the
    canonical basis, so they agree with set equality of the subspaces.
    """

    p: int
    n: int
    basis: np.ndarray = field(compare=False)
    _key: bytes = field(init=False, repr=False, compare=True)

    def __post_init__(self):
        check_prime(self.p)
        b = rowspace_basis(self.basis, self.p) if self.basis.size else np.zeros((0, self.n), dtype=np.int64)
        if b.shape[1] != self.n and b.shape[0] > 0:
            raise ValueError("basis width does not match ambient dimension")
        b = b.reshape(b.shape[0], self.n)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "_key", b.tobytes() + self.p.to_bytes(8, "big") + self.n.to_bytes(8, "big"))

    @classmethod
    def from_rows(cls, p: int, n: int, rows) -> "Subspace":
        r = as_fp_matrix(rows, p) if np.asarray(rows).size else np.zeros((0, n), dtype=np.int64)
        return cls(p, n, r.reshape(-1, n) if r.size else np.zeros((0, n), dtype=np.int64))

    @classmethod
    def full(cls, p: int, n: int) -> "Subspace":
        return cls(p, n, np.eye(n, dtype=np.int64))

    @classmethod
    def zero(cls, p: int, n: int) -> "Subspace":
        return cls(p, n, np.zeros((0, n), dtype=np.int64))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def codim(self) -> int:
        return self.n - self.dim

    def pivots(self) -> list[int]:
        return [int(np.nonzero(row)[0][0]) for row in self.basis]

    def contains(self, vec) -> bool:
        v = np.asarray(vec, dtype=np.int64).reshape(-1) % self.p
        for row in self.basis:
            c = int(np.nonzero(row)[0][0])
            v = (v - v[c] * row) % self.p
        return not v.any()

    def leq(self, other: "Subspace") -> bool:
        return all(other.contains(row) for row in self.basis)

    def meet(self, other: "Subspace") -> "Subspace":
        if (self.p, self.n) != (other.p, other.n):
            raise ValueError("ambient mismatch")
        stacked = np.concatenate([self.annihilator_matrix(), other.annihilator_matrix()], axis=0)
        return Subspace.from_rows(self.p, self.n, null_space(stacked, self.p))

    def join(self, other: "Subspace") -> "Subspace":
        return Subspace.from_rows(self.p, self.n, np.concatenate([self.basis, other.basis], axis=0))

    def annihilator_matrix(self) -> np.ndarray:
        """Rows y with self = {x : y . x = 0 for all rows y}; shape (codim, n)."""
        if self.dim == 0:
            return np.eye(self.n, dtype=np.int64)
        return annihilator(self.basis, self.p)

    def complement(self, seed: int | None = None) -> "Subspace":
        """A direct complement T (self + T = F_p^n, intersection 0).

        Deterministic mode (seed None) takes the standard basis vectors at the
        non-pivot coordinates.  Seeded mode draws uniformly among *all*
        complements: each complement is the graph of a unique linear map from
        the deterministic complement into self, so sampling the map's matrix
        uniformly samples complements uniformly.
        """
        pivs = set(self.pivots())
        det_rows = np.eye(self.n, dtype=np.int64)[[c for c in range(self.n) if c not in pivs]]
        if seed is None or self.dim == 0 or det_rows.shape[0] == 0:
            return Subspace.from_rows(self.p, self.n, det_rows)
        rng = np.random.default_rng(seed)
        m = rng.integers(0, self.p, size=(det_rows.shape[0], self.dim), dtype=np.int64)
        return Subspace.from_rows(self.p, self.n, (det_rows + m @ self.basis) % self.p)


# --- extension fields ------------------------------------------------------


def _poly_divmod(num: list[int], den: list[int], p: int) -> tuple[list[int], list[int]]:
    # little-endian coefficient lists; den must be monic
    num = list(num)
    dd = len(den) - 1
    q = [0] * max(len(num) - dd, 0)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i] % p
        if c:
            q[i - dd] = c
            for j, dc in enumerate(den):
                num[i - dd + j] = (num[i - dd + j] - c * dc) % p
    while num and num[-1] % p == 0:
        num.pop()
    return q, [c % p for c in num]


def _is_irreducible(modulus: list[int], p: int) -> bool:
    # modulus monic, little-endian.  Trial division by all monic polynomials of
    # degree up to deg/2 (fields here are tiny).
    deg = len(modulus) - 1
    for d in range(1, deg // 2 + 1):
        for code in range(p**d):
            den = [(code // p**i) % p for i in range(d)] + [1]
            _, rem = _poly_divmod(modulus, den, p)
            if not rem:
                return False
    return True


@lru_cache(maxsize=None)
def ext_field(p: int, m: int) -> "ExtField":
    return ExtField(p, m)


class ExtField:
    """F_{p^m} with elements coded as integers in [0, p^m).

    The code is the little-endian base-p reading of the coefficient vector.
    The modulus is the irreducible monic x^m + c_{m-1} x^{m-1} + ... + c_0
    whose coefficient code sum(c_i p^i) is smallest; for m = 1 this is x
    itself and arithmetic is plain mod-p arithmetic.
    """

    def __init__(self, p: int, m: int):
        check_prime(p)
        if m < 1:
            raise ValueError("degree must be >= 1")
        self.p = p
        self.m = m
        self.size = p**m
        self.modulus = self._find_modulus(p, m)

    @staticmethod
    def _find_modulus(p: int, m: int) -> list[int]:
        for code in range(p**m):
            cand = [(code // p**i) % p for i in range(m)] + [1]
            if _is_irreducible(cand, p):
                return cand
        raise AssertionError("no irreducible polynomial found")  # unreachable

    def digits(self, a: int) -> list[int]:
        return [(a // self.p**i) % self.p for i in range(self.m)]

    def code(self, digits: list[int]) -> int:
        return sum((d % self.p) * self.p**i for i, d in enumerate(digits[: self.m]))

    def add(self, a: int, b: int) -> int:
        return self.code([(x + y) % self.p for x, y in zip(self.digits(a), self.digits(b))])

    def mul(self, a: int, b: int) -> int:
        da, db = self.digits(a), self.digits(b)
        prod = [0] * (2 * self.m - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % self.p
        _, rem = _poly_divmod(prod, self.modulus, self.p)
        rem += [0] * (self.m - len(rem))
        return self.code(rem)

    def elements(self) -> range:
        return range(self.size)
