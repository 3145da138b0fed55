"""Colored linear patterns and exact instance counting.

A pattern is a pair (A, psi): an l x k coefficient matrix over F_p together
with a color requirement psi(i) for each of the k variables.  Solution tuples
x in V^k of A x = 0 are enumerated through the null-space parametrization
x = sum_j t_j N_j with t in V^m, m = k - rank A, which hits every solution
exactly once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import ResourceCapError, UnsupportedCharacteristicError
from .fields import annihilator, as_fp_matrix, check_prime, null_space, rank, rowspace_basis
from .space import Space

ENUMERATION_CAP = 10**8


@dataclass(frozen=True)
class Pattern:
    """An r-colored pattern (A, psi) over F_p.

    rows may have zero rows (no constraints); psi entries are colors in 1..r.
    """

    p: int
    r: int
    rows: np.ndarray
    psi: tuple[int, ...]

    def __post_init__(self):
        check_prime(self.p)
        k = len(self.psi)
        if k < 1:
            raise ValueError("pattern needs at least one variable")
        m = np.asarray(self.rows, dtype=np.int64) % self.p
        m = m.reshape(-1, k) if m.size else np.zeros((0, k), dtype=np.int64)
        m.setflags(write=False)
        object.__setattr__(self, "rows", m)
        object.__setattr__(self, "psi", tuple(int(c) for c in self.psi))
        if any(not 1 <= c <= self.r for c in self.psi):
            raise ValueError("psi colors must lie in 1..r")

    @property
    def k(self) -> int:
        return len(self.psi)

    @property
    def rank(self) -> int:
        return rank(self.rows, self.p)

    @property
    def num_free(self) -> int:
        """m = k - rank A, the dimension of the solution parametrization."""
        return self.k - self.rank

    def null_basis(self) -> np.ndarray:
        return null_space(self.rows, self.p)

    def canonical_key(self) -> tuple:
        """Dedup key: (canonical row-space basis, psi)."""
        return (self.p, self.r, rowspace_basis(self.rows, self.p).tobytes(), self.rows.shape[1], self.psi)

    def __eq__(self, other):
        return isinstance(other, Pattern) and self.canonical_key() == other.canonical_key()

    def __hash__(self):
        return hash(self.canonical_key())

    def to_dict(self) -> dict:
        return {"p": self.p, "r": self.r, "rows": [[int(v) for v in row] for row in self.rows], "psi": list(self.psi)}

    @staticmethod
    def from_dict(d: dict) -> "Pattern":
        for key in ("p", "r", "rows", "psi"):
            if key not in d:
                raise ValueError(f"pattern object missing {key!r}")
        rows = np.asarray(d["rows"], dtype=np.int64)
        if rows.size == 0:
            rows = np.zeros((0, len(d["psi"])), dtype=np.int64)
        return Pattern(int(d["p"]), int(d["r"]), rows, tuple(int(c) for c in d["psi"]))


def write_pattern(path, pattern: Pattern):
    with open(path, "w") as fh:
        json.dump(pattern.to_dict(), fh, sort_keys=True)
        fh.write("\n")


def read_pattern(path) -> Pattern:
    with open(path) as fh:
        return Pattern.from_dict(json.load(fh))


def write_family(path, family: Sequence[Pattern]):
    with open(path, "w") as fh:
        json.dump([h.to_dict() for h in family], fh, sort_keys=True)
        fh.write("\n")


def read_family(path) -> list[Pattern]:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ValueError("family file must hold a JSON list")
    return [Pattern.from_dict(d) for d in data]


# --- solution enumeration -------------------------------------------------


def solution_count(rows, space: Space) -> int:
    """Number of solution tuples of A x = 0 in V^k (= |V|^(k - rank A))."""
    m = as_fp_matrix(rows, space.p)
    return space.size ** (m.shape[1] - rank(m, space.p))


def iter_solution_chunks(rows, space: Space, *, chunk: int = 1 << 17, cap: int | None = None) -> Iterator[np.ndarray]:
    """Yield (batch, k) arrays of point indices covering every solution once.

    Order is little-endian over the parameter tuple (t_1, ..., t_m), t_1 least
    significant; within a pattern this order is what "first instance" means
    everywhere in this package.
    """
    a = as_fp_matrix(rows, space.p)
    basis = null_space(a, space.p)
    m, k = basis.shape
    total = space.size**m
    limit = ENUMERATION_CAP if cap is None else cap
    if total > limit:
        raise ResourceCapError(
            f"solution enumeration needs {total} tuples, cap is {limit}",
            requested=total,
            cap=limit,
        )
    digits = space.digits
    for start in range(0, total, chunk):
        u = np.arange(start, min(start + chunk, total), dtype=np.int64)
        xs = np.empty((u.size, k), dtype=np.int64)
        tparts = [(u // space.size**j) % space.size for j in range(m)]
        for i in range(k):
            acc = np.zeros((u.size, space.n), dtype=np.int64)
            for j in range(m):
                c = int(basis[j, i])
                if c:
                    acc += c * digits[tparts[j]]
            xs[:, i] = space.encode(acc)
        yield xs


def solutions(rows, space: Space, *, cap: int | None = None) -> np.ndarray:
    """All solution tuples as one (count, k) array (desk scale only)."""
    chunks = list(iter_solution_chunks(rows, space, cap=cap))
    return np.concatenate(chunks, axis=0)


# --- lambda counts ----------------------------------------------------------


@dataclass(frozen=True)
class LambdaValue:
    value: float
    exact: Fraction | None

    def __float__(self):
        return self.value


def _is_indicator(arr: np.ndarray) -> bool:
    return bool(np.isin(arr, (0.0, 1.0)).all())


def lam(rows, fs: Sequence[np.ndarray], space: Space) -> LambdaValue:
    """Lambda_A(f_1, ..., f_k) = E_{x: Ax=0} prod_i f_i(x_i).

    When every f_i is {0,1}-valued the result also carries the exact rational
    count / |V|^m; otherwise exact is None.
    """
    a = as_fp_matrix(rows, space.p)
    k = a.shape[1]
    if len(fs) != k:
        raise ValueError(f"need {k} functions, got {len(fs)}")
    fs = [np.asarray(f, dtype=np.float64) for f in fs]
    for f in fs:
        if f.shape != (space.size,):
            raise ValueError("function table has wrong length")
    all_ind = all(_is_indicator(f) for f in fs)
    total = solution_count(a, space)
    if all_ind:
        bools = [f > 0.5 for f in fs]
        count = 0
        for xs in iter_solution_chunks(a, space):
            hit = bools[0][xs[:, 0]]
            for i in range(1, k):
                hit &= bools[i][xs[:, i]]
            count += int(np.count_nonzero(hit))
        exact = Fraction(count, total)
        return LambdaValue(float(exact), exact)
    acc = 0.0
    for xs in iter_solution_chunks(a, space):
        prod = fs[0][xs[:, 0]].copy()
        for i in range(1, k):
            prod *= fs[i][xs[:, i]]
        acc += float(prod.sum())
    return LambdaValue(acc / total, None)


# --- statistics against a coloring ------------------------------------------


def batch_rank(mats: np.ndarray, p: int) -> np.ndarray:
    """Ranks of a batch of small matrices over F_p; mats has shape (B, R, C)."""
    m = (np.asarray(mats, dtype=np.int64) % p).copy()
    nb, nrows, ncols = m.shape
    inv = np.zeros(p, dtype=np.int64)
    for v in range(1, p):
        inv[v] = pow(v, -1, p)
    row = np.zeros(nb, dtype=np.int64)
    rows_idx = np.arange(nrows)[None, :]
    for c in range(ncols):
        col = m[:, :, c]
        eligible = (rows_idx >= row[:, None]) & (col != 0)
        has = eligible.any(axis=1)
        b = np.nonzero(has)[0]
        if b.size == 0:
            continue
        pr = np.argmax(eligible[b], axis=1)
        rr = row[b]
        # swap pivot row into place, normalize, eliminate the rest of the column
        tmp = m[b, pr].copy()
        m[b, pr] = m[b, rr]
        m[b, rr] = tmp
        pivrow = m[b, rr] * inv[m[b, rr, c]][:, None] % p
        m[b, rr] = pivrow
        colvals = m[b, :, c]
        m[b] = (m[b] - colvals[:, :, None] * pivrow[:, None, :]) % p
        m[b, rr] = pivrow
        row[b] += 1
        if (row == nrows).all():
            break
    return row


@dataclass(frozen=True)
class PatternStats:
    instance_count: int
    total_solutions: int
    density: Fraction
    nonzero_instance_count: int
    generic_count: int
    is_free: bool


def pattern_stats(pattern: Pattern, coloring, *, cap: int | None = None) -> PatternStats:
    """Exhaustive instance statistics for one pattern against one coloring.

    instance_count uses the stored color at 0, so zero-touching solutions
    count toward the density (the density normalization is |V|^(k - rank A)).
    Freeness and the generic count look only at tuples with every coordinate
    nonzero; generic additionally requires the coordinates to span a space of
    dimension k - rank A.
    """
    space = coloring.space
    if pattern.p != space.p:
        raise ValueError("pattern and coloring field mismatch")
    if coloring.r != pattern.r:
        raise ValueError("pattern and coloring color count mismatch")
    want = np.array(pattern.psi, dtype=np.int64)
    m = pattern.num_free
    count = 0
    nonzero = 0
    generic = 0
    for xs in iter_solution_chunks(pattern.rows, space, cap=cap):
        match = (coloring.values[xs] == want[None, :]).all(axis=1)
        count += int(np.count_nonzero(match))
        nz = match & (xs != 0).all(axis=1)
        nonzero += int(np.count_nonzero(nz))
        sel = xs[nz]
        for start in range(0, sel.shape[0], 1 << 13):
            block = sel[start : start + (1 << 13)]
            ranks = batch_rank(space.decode(block.reshape(-1)).reshape(block.shape[0], pattern.k, space.n), space.p)
            generic += int(np.count_nonzero(ranks == m))
    total = solution_count(pattern.rows, space)
    return PatternStats(
        instance_count=count,
        total_solutions=total,
        density=Fraction(count, total),
        nonzero_instance_count=nonzero,
        generic_count=generic,
        is_free=(nonzero == 0),
    )


def first_instance(pattern: Pattern, coloring, *, require_nonzero: bool = True) -> np.ndarray | None:
    """First instance in enumeration order, or None; used for certificates."""
    space = coloring.space
    want = np.array(pattern.psi, dtype=np.int64)
    for xs in iter_solution_chunks(pattern.rows, space):
        ok = (coloring.values[xs] == want[None, :]).all(axis=1)
        if require_nonzero:
            ok &= (xs != 0).all(axis=1)
        hits = np.nonzero(ok)[0]
        if hits.size:
            return xs[hits[0]].copy()
    return None


# --- subpatterns -------------------------------------------------------------


def subpattern(pattern: Pattern, indices: Sequence[int]) -> Pattern:
    """The induced pattern on a subset of variables (1-based indices).

    The solution set of A x = 0 projects onto the selected coordinates to the
    row space of the corresponding null-basis columns; the returned matrix is
    the canonical annihilator of that projection, so a tuple satisfies it iff
    it extends to a full solution.
    """
    idx = sorted(set(int(i) for i in indices))
    if not idx:
        raise ValueError("need at least one variable")
    if idx[0] < 1 or idx[-1] > pattern.k:
        raise ValueError(f"indices must lie in 1..{pattern.k}")
    cols = [i - 1 for i in idx]
    proj = pattern.null_basis()[:, cols]
    arows = annihilator(proj, pattern.p)
    if arows.size == 0:
        arows = np.zeros((0, len(cols)), dtype=np.int64)
    return Pattern(pattern.p, pattern.r, arows, tuple(pattern.psi[i] for i in cols))


def subpattern_closure(family: Sequence[Pattern]) -> list[Pattern]:
    """One representative of every subpattern of every member, deduplicated.

    Only nonempty index sets are used.  Dedup key is the canonical row space
    together with psi, so equivalent presentations collapse.
    """
    seen: dict[tuple, Pattern] = {}
    for h in family:
        for mask in range(1, 1 << h.k):
            idx = [i + 1 for i in range(h.k) if mask >> i & 1]
            sub = subpattern(h, idx)
            seen.setdefault(sub.canonical_key(), sub)
    return list(seen.values())


# --- complexity --------------------------------------------------------------


def complexity1_check(rows, p: int) -> bool:
    """Decide whether the system has complexity 1 (odd p only).

    Writes the solution space as x = t N and tests whether the squared linear
    forms (t . L_i)^2, L_i the i-th null-basis column, are linearly independent
    as quadratic forms — equivalently whether the flattened outer products
    L_i L_i^T span a k-dimensional space over F_p.
    """
    check_prime(p)
    if p == 2:
        raise UnsupportedCharacteristicError(
            "the squared-form criterion requires odd characteristic"
        )
    a = as_fp_matrix(rows, p)
    basis = null_space(a, p)
    m, k = basis.shape
    flat = np.empty((k, m * m), dtype=np.int64)
    for i in range(k):
        col = basis[:, i]
        flat[i] = np.outer(col, col).reshape(-1) % p
    return rank(flat, p) == k
