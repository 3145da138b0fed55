"""The induced removal pipeline, its counting certificate, and the
inhomogeneous-to-homogeneous reduction.

induced_removal recolors a small fraction of points so the result has no
all-nonzero instance of any pattern in the given family, or aborts with a
Case-A certificate showing that every canonical recoloring of the sparse
subpatterns is obstructed.  Freeness of the output is always established by
exhaustive enumeration, never inferred from the construction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CaseAAbort, ResourceCapError, VerificationError
from .fields import Subspace, rank, solve
from .patterns import (
    ENUMERATION_CAP,
    Pattern,
    complexity1_check,
    first_instance,
    iter_solution_chunks,
    lam,
    pattern_stats,
    solution_count,
    subpattern,
    subpattern_closure,
)
from .ramsey import Dichotomy, canonical_coloring, decide_dichotomy
from .regularize import RecolorReport, regularity_recolor
from .space import Coloring, Space


@dataclass(frozen=True)
class RemovalReport:
    coloring: Coloring
    original: Coloring
    recolor: RecolorReport
    dichotomy: Dichotomy
    closure_size: int
    sparse_indices: tuple[int, ...]
    closure_densities: tuple[float, ...]
    changed_count: int
    eps: float
    eps_rado: float
    theoretical_constants: dict
    complexity_checked: bool
    verified_free: bool

    def as_dict(self) -> dict:
        return {
            "eps": self.eps,
            "eps_rado": self.eps_rado,
            "changed_count": self.changed_count,
            "changed_fraction": self.changed_count / self.coloring.space.size,
            "closure_size": self.closure_size,
            "sparse_indices": list(self.sparse_indices),
            "closure_densities": list(self.closure_densities),
            "codim_v1": self.recolor.model.v1.codim,
            "codim_v2": self.recolor.model.v2.codim,
            "case": self.dichotomy.case,
            "chi": list(self.dichotomy.chi) if self.dichotomy.chi else None,
            "recolor": self.recolor.as_dict(),
            "theoretical_constants": self.theoretical_constants,
            "complexity_checked": self.complexity_checked,
            "verified_free": self.verified_free,
        }


def _theoretical_constants(eps: float, eps_rado: float, r: int, k_max: int, family_size: int, codim_v1: int) -> dict:
    """Worst-case theoretical constants, recorded for the report but never asserted.

    The density floor for the counting step is computable from the run's own
    parameters; the removal delta additionally uses the achieved codimension.
    The recommended eps_rado needs Ramsey numbers far outside enumeration
    range, so only its shape is recorded.
    """
    eps_count = (1.0 / (2 * k_max)) * (eps / (4 * r)) ** k_max * eps_rado
    return {
        "eps_count_formula": "(1/(2*k_max)) * (eps/(4*r))**k_max * eps_rado",
        "eps_count_value": eps_count,
        "delta_formula": "min((1/4) * p**(-k_max*codim_v1) * (eps/(4*r))**k_max * eps_rado, p**(-n0*k_max))",
        "eps_rado_formula": "(1/(10*family_size)) * p**(-n_rado*k_max)  [n_rado not computed]",
        "k_max": k_max,
        "family_size": family_size,
        "codim_v1": codim_v1,
    }


def induced_removal(
    phi: Coloring,
    family,
    eps: float,
    *,
    eps_rado: float = 0.1,
    eps_reg: float = 0.05,
    backend: str = "strong",
    seed: int = 0,
    acknowledge_complexity: bool = False,
) -> RemovalReport:
    """Recolor at most eps|V| points of phi to make it family-free, or abort.

    Pipeline: (i) regularize-and-recolor phi at eps/2 so every color surviving
    in a V_1-coset is dense in the central V_2-coset; (ii) collect the
    subpattern closure and keep the members of density < eps_rado in the
    restriction phi|_{V_2}; (iii) decide the canonical dichotomy for that
    sparse subfamily.  Case A raises CaseAAbort carrying the certificates.
    Case B patches V_1 \\ {0} with the witness canonical coloring and then
    proves the output family-free by exhaustive enumeration (raising
    VerificationError with a counterexample instance otherwise).

    Every family member must pass the complexity-1 criterion unless
    acknowledge_complexity is set (required at p = 2, where the criterion is
    undecidable by the squared-forms test).
    """
    family = list(family)
    if not family:
        raise ValueError("need at least one pattern")
    space = phi.space
    for h in family:
        if h.p != space.p or h.r != phi.r:
            raise ValueError("family and coloring disagree on (p, r)")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    complexity_checked = not acknowledge_complexity
    if complexity_checked:
        for h in family:
            if not complexity1_check(h.rows, h.p):
                raise ValueError(
                    "family member fails the complexity-1 criterion; "
                    "pass acknowledge_complexity=True to run regardless"
                )

    recolor = regularity_recolor(phi, eps / 2, eps_reg, backend=backend, seed=seed)
    phi1 = recolor.coloring
    v1, v2 = recolor.model.v1, recolor.model.v2

    closure = subpattern_closure(family)
    restricted = phi.restrict(0, v2)
    densities = []
    sparse = []
    for idx, h in enumerate(closure):
        d = pattern_stats(h, restricted).density
        densities.append(float(d))
        if d < eps_rado:
            sparse.append(idx)
    sub_family = [closure[i] for i in sparse]

    dichotomy = decide_dichotomy(sub_family, p=space.p, r=phi.r)
    if dichotomy.case == "A":
        raise CaseAAbort(
            "every canonical recoloring admits a sparse-subpattern instance",
            dichotomy=dichotomy,
            phase="dichotomy",
        )

    values = phi1.values.copy()
    if v1.dim > 0:
        pts = space.subspace_points(v1, t_order=True)
        patch = canonical_coloring(Space(space.p, v1.dim), dichotomy.chi, phi.r)
        values[pts[1:]] = patch.values[1:]
    out = phi1.with_values(values)

    changed = out.changed_from(phi)
    budget = Fraction(eps) / 2 + Fraction(1, space.p**v1.codim)
    assert Fraction(changed, space.size) <= budget, (
        f"changed {changed} points, budget (eps/2 + p^-codim)|V| = {float(budget) * space.size}"
    )

    for h in family:
        stats = pattern_stats(h, out)
        if not stats.is_free:
            raise VerificationError(
                "patched coloring still has a family instance",
                evidence={
                    "pattern_psi": list(h.psi),
                    "instance": [int(x) for x in first_instance(h, out)],
                },
            )

    k_max = max(h.k for h in family)
    return RemovalReport(
        coloring=out,
        original=phi,
        recolor=recolor,
        dichotomy=dichotomy,
        closure_size=len(closure),
        sparse_indices=tuple(sparse),
        closure_densities=tuple(densities),
        changed_count=changed,
        eps=eps,
        eps_rado=eps_rado,
        theoretical_constants=_theoretical_constants(
            eps, eps_rado, phi.r, k_max, len(family), v1.codim
        ),
        complexity_checked=complexity_checked,
        verified_free=True,
    )


# --- counting certificate -----------------------------------------------------


@dataclass(frozen=True)
class CountingCertificate:
    lam_full: Fraction
    lam_restricted: Fraction
    restriction_factor: Fraction
    lam_zero_part: Fraction
    free_densities: tuple[Fraction, ...]
    num_zero_coords: int

    def as_dict(self) -> dict:
        return {
            "lam_full": str(self.lam_full),
            "lam_restricted": str(self.lam_restricted),
            "restriction_factor": str(self.restriction_factor),
            "first_line_holds": True,
            "lam_zero_part": str(self.lam_zero_part),
            "free_densities": [str(d) for d in self.free_densities],
            "num_zero_coords": self.num_zero_coords,
        }


def certify_counting(phi: Coloring, pattern: Pattern, u, v2: Subspace) -> CountingCertificate:
    """Exact first step of the counting argument at an instance u.

    u must solve the linear system with its zero coordinates listed first.
    The asserted line is Lambda_A(f) >= p^(-m codim V_2) Lambda_A(g), with
    f_i the color indicators on V and g_i their restrictions to u_i + V_2;
    that inequality is pure inclusion and is checked in exact arithmetic.
    The subsequent chain (splitting off the nonzero coordinates against the
    subpattern of the zero block) is recorded for the report only — its error
    terms carry the regularity constants, which are out of numeric range.
    """
    space = phi.space
    u = np.asarray(u, dtype=np.int64)
    if u.shape != (pattern.k,):
        raise ValueError("u must have one point per pattern variable")
    coords = space.decode(u)
    if pattern.rows.shape[0] and np.any(pattern.rows @ coords % space.p):
        raise ValueError("u does not solve the linear system")
    zero = np.nonzero(u == 0)[0]
    j = int(zero.size)
    if not np.all(u[:j] == 0):
        raise ValueError("zero coordinates of u must come first")

    fs = [phi.indicator(c) for c in pattern.psi]
    lam_full = lam(pattern.rows, fs, space)
    assert lam_full.exact is not None
    sub_space = Space(space.p, v2.dim)
    gs = []
    for i in range(pattern.k):
        vals = phi.restrict(int(u[i]), v2).indicator(pattern.psi[i])
        gs.append(vals)
    lam_res = lam(pattern.rows, gs, sub_space)
    assert lam_res.exact is not None
    m = pattern.num_free
    factor = Fraction(1, space.p ** (m * v2.codim))
    assert lam_full.exact >= factor * lam_res.exact, (
        "restriction inequality failed: full count below the coset's contribution"
    )

    if j:
        zero_sub = subpattern(pattern, range(1, j + 1))
        lam_zero = lam(zero_sub.rows, gs[:j], sub_space)
        assert lam_zero.exact is not None
        lam_zero = lam_zero.exact
    else:
        lam_zero = Fraction(1)
    free = tuple(Fraction(int(gs[i].sum()), sub_space.size) for i in range(j, pattern.k))
    return CountingCertificate(
        lam_full=lam_full.exact,
        lam_restricted=lam_res.exact,
        restriction_factor=factor,
        lam_zero_part=lam_zero,
        free_densities=free,
        num_zero_coords=j,
    )


# --- inhomogeneous reduction ----------------------------------------------------


@dataclass(frozen=True)
class ExpandedPattern:
    u_tuple: tuple[int, ...]
    pattern: Pattern


@dataclass(frozen=True)
class InhomReduction:
    space: Space
    b_subspace: Subspace
    b_points: np.ndarray
    tilde_basis: np.ndarray
    tilde_space: Space
    coloring: Coloring
    pairs: tuple[tuple[Pattern, tuple[int, ...]], ...]
    expansions: tuple[tuple[ExpandedPattern, ...], ...]

    def encode_color(self, colors) -> int:
        """Tuple of per-offset colors (t-order over B) -> one color in 1..r^|B|."""
        r = self.pairs[0][0].r if self.pairs else 1
        out = 0
        for j, c in enumerate(reversed(list(colors))):
            out = out * r + (int(c) - 1)
        return out + 1

    def lift_point(self, tilde_x: int, u: int) -> int:
        """A point of the quotient space plus an offset in B -> a point of V."""
        coords = self.tilde_space.decode(np.array([tilde_x]))[0] @ self.tilde_basis % self.space.p
        lifted = (coords + self.space.decode(np.array([u]))[0]) % self.space.p
        return int(self.space.encode(lifted[None, :])[0])

    def project_point(self, x: int) -> tuple[int, int]:
        """Inverse of lift_point: a point of V -> (quotient point, offset in B)."""
        coords = self.space.decode(np.array([x]))[0]
        stacked = np.vstack([self.tilde_basis, self.b_subspace.basis])
        t = solve(stacked.T, coords, self.space.p)
        assert t is not None, "tilde basis and B must span V"
        d = self.tilde_basis.shape[0]
        tilde_x = int(self.tilde_space.encode(t[None, :d])[0])
        u = int(self.space.encode((t[d:] @ self.b_subspace.basis % self.space.p)[None, :])[0])
        return tilde_x, u

    def instance_map(self, pair_index: int, expansion_index: int, tilde_instance) -> np.ndarray:
        """An instance of one expanded pattern -> the ambient instance it encodes."""
        exp = self.expansions[pair_index][expansion_index]
        xs = np.asarray(tilde_instance, dtype=np.int64)
        return np.array(
            [self.lift_point(int(xs[i]), exp.u_tuple[i]) for i in range(xs.size)], dtype=np.int64
        )


def _solve_offset_tuples(pattern: Pattern, b_sub: Subspace, b_offsets: np.ndarray, space: Space) -> list[tuple[int, ...]]:
    """All u in B^k with A u = b, as tuples of point codes (possibly empty)."""
    p = space.p
    d = b_sub.dim
    if d == 0:
        if np.any(b_offsets):
            return []
        return [(0,) * pattern.k]
    # write b rows in B-coordinates; solve the scalar system once per axis
    b_coords = np.zeros((b_offsets.shape[0], d), dtype=np.int64)
    for s, b_pt in enumerate(b_offsets):
        t = solve(b_sub.basis.T, space.decode(np.array([b_pt]))[0], p)
        if t is None:
            raise ValueError("offsets must lie in their own span")
        b_coords[s] = t
    per_axis: list[list[np.ndarray]] = []
    for axis in range(d):
        part = solve(pattern.rows, b_coords[:, axis], p) if pattern.rows.shape[0] else np.zeros(pattern.k, dtype=np.int64)
        if part is None:
            return []
        from .fields import null_space as _ns

        basis = _ns(pattern.rows, p) if pattern.rows.shape[0] else np.eye(pattern.k, dtype=np.int64)
        sols = []
        tsp = Space(p, basis.shape[0]) if basis.shape[0] else None
        count = p ** basis.shape[0]
        for t_code in range(count):
            t = tsp.decode(np.array([t_code]))[0] if tsp else np.zeros(0, dtype=np.int64)
            sols.append((part + t @ basis) % p)
        per_axis.append(sols)
    out = []
    for combo in itertools.product(*per_axis):
        # combo[axis][i] is the B-coordinate of u_i along that axis
        mat = np.stack(combo, axis=1)  # (k, d)
        pts = space.encode(mat @ b_sub.basis % p)
        out.append(tuple(int(x) for x in pts))
    return out


def inhomogeneous_reduce(phi: Coloring, pairs, *, cap: int | None = None) -> InhomReduction:
    """Encode inhomogeneous pattern problems as homogeneous ones on a quotient.

    pairs is a sequence of (pattern, offsets) with offsets a tuple of point
    codes, one per matrix row, giving the system A x = b.  B is the span of
    all offsets; the quotient coloring on a complement of B assigns each point
    the tuple of phi-colors along its B-coset (encoded little-endian in the
    t-order of B), and every pair expands into patterns over the quotient
    whose instances correspond bijectively to the original inhomogeneous
    instances.  The expected expansion count |B|^(k - rank A) * r^(k(|B|-1))
    is asserted whenever the offset system is consistent.
    """
    space = phi.space
    r = phi.r
    pairs = [(h, tuple(int(x) for x in b)) for h, b in pairs]
    for h, b in pairs:
        if h.p != space.p or h.r != r:
            raise ValueError("pattern and coloring disagree on (p, r)")
        if len(b) != h.rows.shape[0]:
            raise ValueError("need one offset per matrix row")
    all_offsets = [x for _, b in pairs for x in b]
    b_rows = space.decode(np.array(all_offsets, dtype=np.int64)) if all_offsets else np.zeros((0, space.n), dtype=np.int64)
    b_sub = Subspace.from_rows(space.p, space.n, b_rows)
    b_pts = space.subspace_points(b_sub, t_order=True)
    comp = b_sub.complement()
    tilde_basis = comp.basis
    tilde_space = Space(space.p, comp.dim)

    limit = cap if cap is not None else ENUMERATION_CAP
    n_colors = r ** int(b_pts.size)
    if n_colors > limit:
        raise ResourceCapError("encoded color count exceeds the cap", requested=n_colors, cap=limit)

    # quotient coloring: little-endian base-r digits over the B-coset colors
    tilde_pts = tilde_space.digits @ tilde_basis % space.p
    codes = np.zeros(tilde_space.size, dtype=np.int64)
    base = space.encode(tilde_pts)
    for j in reversed(range(b_pts.size)):
        shifted = space.add_points(base, int(b_pts[j]))
        codes = codes * r + (phi.values[shifted] - 1)
    tilde_phi = Coloring(tilde_space, n_colors, codes + 1)

    expansions = []
    for h, b in pairs:
        u_tuples = _solve_offset_tuples(h, b_sub, np.array(b, dtype=np.int64), space)
        n_expected = len(u_tuples) * r ** (h.k * (int(b_pts.size) - 1))
        if n_expected > limit:
            raise ResourceCapError("expansion count exceeds the cap", requested=n_expected, cap=limit)
        pos = {int(pt): idx for idx, pt in enumerate(b_pts)}
        strides = r ** np.arange(b_pts.size)
        exp_list = []
        for u in u_tuples:
            # per variable: encoded colors whose digit at u_i equals psi(i)
            per_var = []
            for i in range(h.k):
                digit_pos = pos[u[i]]
                choices = []
                for code in range(n_colors):
                    digits = (code // strides) % r
                    if digits[digit_pos] == h.psi[i] - 1:
                        choices.append(code + 1)
                per_var.append(choices)
            for combo in itertools.product(*per_var):
                exp_list.append(ExpandedPattern(u, Pattern(space.p, n_colors, h.rows, tuple(combo))))
        if u_tuples:
            expected = (
                space.p ** (b_sub.dim * (h.k - rank(h.rows, space.p)))
                * r ** (h.k * (int(b_pts.size) - 1))
            )
            assert len(exp_list) == expected, "expansion count mismatch"
        expansions.append(tuple(exp_list))
    return InhomReduction(
        space=space,
        b_subspace=b_sub,
        b_points=b_pts,
        tilde_basis=tilde_basis,
        tilde_space=tilde_space,
        coloring=tilde_phi,
        pairs=tuple(pairs),
        expansions=tuple(expansions),
    )


def count_inhomogeneous(phi: Coloring, pattern: Pattern, offsets) -> int:
    """Direct count of x with A x = b and matching colors, for cross-checks."""
    space = phi.space
    b = np.array([space.decode(np.array([int(o)]))[0] for o in offsets], dtype=np.int64).reshape(
        len(tuple(offsets)), space.n
    )
    part = None
    if pattern.rows.shape[0]:
        # particular solution per coordinate axis of V
        parts = []
        for axis in range(space.n):
            sol = solve(pattern.rows, b[:, axis], space.p)
            if sol is None:
                return 0
            parts.append(sol)
        part = np.stack(parts, axis=1)  # (k, n)
    else:
        if np.any(b):
            return 0
        part = np.zeros((pattern.k, space.n), dtype=np.int64)
    shift = space.encode(part)
    want = np.array(pattern.psi, dtype=np.int64)
    total = 0
    for xs in iter_solution_chunks(pattern.rows, space):
        moved = np.stack([space.add_points(xs[:, i], int(shift[i])) for i in range(pattern.k)], axis=1)
        total += int(np.count_nonzero((phi.values[moved] == want[None, :]).all(axis=1)))
    return total
