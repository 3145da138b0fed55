"""Dense point spaces F_p^n, colorings, and real-valued tables on them.

Points are integers in [0, p^n): the point with coordinates (x_0, ..., x_{n-1})
has index sum(x_i * p^i), i.e. coordinate 0 is the least significant digit.
Everything downstream (transforms, file formats, witnesses) uses this one
indexing convention.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ResourceCapError
from .fields import Subspace, check_prime

CAP_ENV_VAR = "REMOVAL_LAB_CAP"
DEFAULT_POINT_CAP = 2**20


def point_cap() -> int:
    raw = os.environ.get(CAP_ENV_VAR)
    if raw is None:
        return DEFAULT_POINT_CAP
    cap = int(raw)
    if cap < 1:
        raise ValueError(f"{CAP_ENV_VAR} must be positive")
    return cap


def _digit_table(p: int, n: int) -> np.ndarray:
    idx = np.arange(p**n, dtype=np.int64)
    out = np.empty((p**n, n), dtype=np.int64)
    for i in range(n):
        out[:, i] = (idx // p**i) % p
    return out


class Space:
    """The ambient space F_p^n with cached encode/decode tables."""

    def __init__(self, p: int, n: int):
        check_prime(p)
        if n < 0:
            raise ValueError("dimension must be >= 0")
        self.p = p
        self.n = n
        self.size = p**n
        cap = point_cap()
        if self.size > cap:
            raise ResourceCapError(
                f"|F_{p}^{n}| = {self.size} exceeds the point cap {cap} "
                f"(override with {CAP_ENV_VAR})",
                requested=self.size,
                cap=cap,
            )

    def __repr__(self):
        return f"Space(p={self.p}, n={self.n})"

    def __eq__(self, other):
        return isinstance(other, Space) and (self.p, self.n) == (other.p, other.n)

    def __hash__(self):
        return hash((self.p, self.n))

    @cached_property
    def digits(self) -> np.ndarray:
        """(size, n) table: row i holds the coordinates of point i."""
        d = _digit_table(self.p, self.n)
        d.setflags(write=False)
        return d

    @cached_property
    def powers(self) -> np.ndarray:
        return self.p ** np.arange(self.n, dtype=np.int64)

    def encode(self, coords) -> np.ndarray:
        c = np.asarray(coords, dtype=np.int64) % self.p
        return c @ self.powers

    def decode(self, idx) -> np.ndarray:
        return self.digits[np.asarray(idx, dtype=np.int64)]

    def add_points(self, a, b) -> np.ndarray:
        return self.encode(self.decode(a) + self.decode(b))

    def neg_points(self, a) -> np.ndarray:
        return self.encode(-self.decode(a))

    def scale_points(self, c: int, a) -> np.ndarray:
        return self.encode(c * self.decode(a))

    # --- subspaces and cosets ------------------------------------------

    def full_subspace(self) -> Subspace:
        return Subspace.full(self.p, self.n)

    def zero_subspace(self) -> Subspace:
        return Subspace.zero(self.p, self.n)

    def subspace_points(self, sub: Subspace, *, t_order: bool = False) -> np.ndarray:
        """Indices of the points of sub.

        Default order is ascending index.  With t_order=True the order is the
        little-endian enumeration of coefficient tuples against the canonical
        basis; this is the order coset restrictions use.
        """
        self._check_sub(sub)
        if sub.dim == 0:
            return np.zeros(1, dtype=np.int64)
        grid = _digit_table(self.p, sub.dim)
        pts = self.encode(grid @ sub.basis)
        return pts if t_order else np.sort(pts)

    def coset_points(self, rep: int, sub: Subspace) -> np.ndarray:
        """Points of rep + sub, in t-order of the canonical basis."""
        self._check_sub(sub)
        if sub.dim == 0:
            return np.array([rep], dtype=np.int64)
        grid = _digit_table(self.p, sub.dim)
        return self.encode(grid @ sub.basis % self.p + self.decode(rep))

    def coset_ids(self, sub: Subspace) -> tuple[np.ndarray, np.ndarray]:
        """(ids, reps): ids[x] identifies the coset x + sub, reps[id] is one point.

        Ids are the little-endian codes of the annihilator functionals, so they
        range over [0, p^codim) and are stable across calls.
        """
        self._check_sub(sub)
        y = sub.annihilator_matrix()
        c = y.shape[0]
        pows = self.p ** np.arange(c, dtype=np.int64)
        ids = (self.digits @ y.T % self.p) @ pows
        reps = np.full(self.p**c, -1, dtype=np.int64)
        comp_pts = self.subspace_points(sub.complement())
        reps[ids[comp_pts]] = comp_pts
        assert (reps >= 0).all()
        return ids, reps

    def _check_sub(self, sub: Subspace):
        if (sub.p, sub.n) != (self.p, self.n):
            raise ValueError(f"subspace of F_{sub.p}^{sub.n} used in {self!r}")


def coset_restrict(values: np.ndarray, space: Space, rep: int, sub: Subspace) -> tuple[np.ndarray, Space]:
    """Restrict a table on V to the coset rep + sub, as a table on F_p^dim(sub).

    Entry t of the result is the value at rep + sum_j t_j b_j where b_j are the
    canonical basis rows of sub; this fixes the indexing of restrictions once
    and for all.
    """
    pts = space.coset_points(rep, sub)
    return np.asarray(values)[pts], Space(space.p, sub.dim)


@dataclass(frozen=True)
class Coloring:
    """An r-coloring of F_p^n, stored densely (a color is kept at 0 too)."""

    space: Space
    r: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int64)
        if v.shape != (self.space.size,):
            raise ValueError("color table has wrong length")
        if v.size and (v.min() < 1 or v.max() > self.r):
            raise ValueError("colors must lie in 1..r")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def indicator(self, color: int) -> np.ndarray:
        return (self.values == color).astype(np.float64)

    def indicators(self) -> list[np.ndarray]:
        return [self.indicator(c) for c in range(1, self.r + 1)]

    def with_values(self, values) -> "Coloring":
        return Coloring(self.space, self.r, values)

    def restrict(self, rep: int, sub: Subspace) -> "Coloring":
        vals, sp = coset_restrict(self.values, self.space, rep, sub)
        return Coloring(sp, self.r, vals)

    def changed_from(self, other: "Coloring") -> int:
        return int(np.count_nonzero(self.values != other.values))

    def to_file(self, path):
        write_coloring(path, self)

    @staticmethod
    def from_file(path) -> "Coloring":
        return read_coloring(path)


# --- file formats ------------------------------------------------------
#
# Colorings: a one-line JSON header {"p":..,"n":..,"r":..} followed by p^n
# lines of integers, point order.  Real tables: header {"p":..,"n":..} and
# decimal values.  Writers are exact mirrors of readers.


def write_coloring(path, coloring: Coloring):
    with open(path, "w") as fh:
        fh.write(json.dumps({"p": coloring.space.p, "n": coloring.space.n, "r": coloring.r}, sort_keys=True))
        fh.write("\n")
        fh.writelines(f"{int(v)}\n" for v in coloring.values)


def read_coloring(path) -> Coloring:
    with open(path) as fh:
        header = json.loads(fh.readline())
        for key in ("p", "n", "r"):
            if key not in header:
                raise ValueError(f"coloring header missing {key!r}")
        space = Space(int(header["p"]), int(header["n"]))
        vals = [int(line) for line in fh if line.strip()]
    if len(vals) != space.size:
        raise ValueError(f"expected {space.size} colors, found {len(vals)}")
    return Coloring(space, int(header["r"]), np.array(vals, dtype=np.int64))


def write_table(path, space: Space, values: np.ndarray):
    vals = np.asarray(values, dtype=np.float64)
    if vals.shape != (space.size,):
        raise ValueError("table has wrong length")
    with open(path, "w") as fh:
        fh.write(json.dumps({"n": space.n, "p": space.p}, sort_keys=True))
        fh.write("\n")
        fh.writelines(f"{float(v)!r}\n" for v in vals)


def read_table(path) -> tuple[np.ndarray, Space]:
    with open(path) as fh:
        header = json.loads(fh.readline())
        for key in ("p", "n"):
            if key not in header:
                raise ValueError(f"table header missing {key!r}")
        space = Space(int(header["p"]), int(header["n"]))
        vals = [float(line) for line in fh if line.strip()]
    if len(vals) != space.size:
        raise ValueError(f"expected {space.size} values, found {len(vals)}")
    return np.array(vals, dtype=np.float64), space
