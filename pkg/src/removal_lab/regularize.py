"""Regularity decompositions with mechanical self-certification.

Each algorithm here follows an energy-increment proof directly: refine while
some function is irregular on too many cosets, and assert the measured energy
gain that the argument promises on every round.  The returned report objects
carry the *re-measured* conclusions — nothing is trusted from the loop
structure itself, and verifiers re-derive every claim from the published
subspaces alone.

Decision thresholds are strict (a coset is refined iff its norm exceeds eps),
verifier thresholds allow FLOAT_TOL of slack; see fourier.is_regular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .energy import (
    Decomposition,
    Partition,
    _complement_within,
    decomp_refine,
    project_energy,
    trivial_decomposition,
)
from .errors import DimensionPreconditionError, RetryCapError, SpaceExhaustedError, VerificationError
from .fields import Subspace, null_space
from .fourier import FLOAT_TOL, batch_coset_norms
from .space import Coloring, Space


def _check_tables(fs: Sequence[np.ndarray], space: Space) -> list[np.ndarray]:
    out = []
    for f in fs:
        a = np.asarray(f, dtype=np.float64)
        if a.shape != (space.size,):
            raise ValueError("function table has wrong length")
        out.append(a)
    if not out:
        raise ValueError("need at least one function")
    return out


def _coset_energy(fs: Sequence[np.ndarray], space: Space, sub: Subspace) -> float:
    return project_energy(Partition.from_cosets(space, sub), fs)[1]


def _shrink_to_codim(space: Space, sub: Subspace, codim: int) -> Subspace:
    """Deterministic subspace of sub with codimension exactly `codim` in V."""
    if sub.codim >= codim:
        return sub
    keep = space.n - codim
    return Subspace.from_rows(space.p, space.n, sub.basis[sub.dim - keep :])


def _min_codim_for(space: Space, eps: float) -> int:
    # smallest d with p^d >= 4/eps, i.e. |V_0| <= (eps/4)|V|
    d = 0
    while space.p**d * eps < 4 and d <= space.n:
        d += 1
    return d


# --- Green-style regularization ---------------------------------------------


@dataclass(frozen=True)
class GreenRound:
    index: int
    codim_before: int
    codim_after: int
    worst_function: int
    bad_fractions: tuple[float, ...]
    num_cuts: int
    energy_before: float
    energy_after: float

    @property
    def gain(self) -> float:
        return self.energy_after - self.energy_before


@dataclass(frozen=True)
class GreenReport:
    v1: Subspace
    eps: float
    rounds: tuple[GreenRound, ...]
    final_bad_fractions: tuple[float, ...]
    verified: bool

    def as_dict(self) -> dict:
        return {
            "codim_v1": self.v1.codim,
            "eps": self.eps,
            "rounds": [
                {
                    "index": r.index,
                    "codim_before": r.codim_before,
                    "codim_after": r.codim_after,
                    "worst_function": r.worst_function,
                    "bad_fractions": list(r.bad_fractions),
                    "num_cuts": r.num_cuts,
                    "energy_gain": r.gain,
                }
                for r in self.rounds
            ],
            "final_bad_fractions": list(self.final_bad_fractions),
            "verified": self.verified,
        }


def _coset_irregularity(fs, space, sub, eps):
    """Per function: (bad rep positions, witnesses, fraction) over a transversal."""
    reps = space.subspace_points(sub.complement())
    out = []
    for f in fs:
        norms, wits = batch_coset_norms(f, space, sub, reps)
        bad = np.nonzero(norms > eps)[0]
        out.append((reps[bad], wits[bad], Fraction(int(bad.size), int(reps.size))))
    return out


def green_regularize(fs: Sequence[np.ndarray], space: Space, v0: Subspace, eps: float) -> GreenReport:
    """Refine v0 until every f_i is eps-regular on all but an eps-fraction of cosets.

    One function is treated per round (the smallest index over budget); the cut
    intersects the witness hyperplanes of all of its bad cosets at once, and the
    measured energy gain of each round must exceed eps^3.  Terminates
    unconditionally: each round strictly drops dim V_m, and at dim 0 every
    restriction is a constant.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    fs = _check_tables(fs, space)
    v = v0
    rounds: list[GreenRound] = []
    eps_frac = Fraction(eps)
    energy = _coset_energy(fs, space, v)
    while True:
        scan = _coset_irregularity(fs, space, v, eps)
        fractions = tuple(float(s[2]) for s in scan)
        worst = next((i for i, s in enumerate(scan) if s[2] > eps_frac), None)
        if worst is None:
            break
        bad_reps, bad_wits, _ = scan[worst]
        tspace = Space(space.p, v.dim)
        zrows = tspace.decode(bad_wits)
        cut_t = null_space(zrows, space.p)
        v_next = Subspace.from_rows(space.p, space.n, cut_t @ v.basis % space.p)
        assert v_next.dim < v.dim, "cut must strictly shrink the subspace"
        energy_next = _coset_energy(fs, space, v_next)
        assert energy_next - energy > eps**3 - FLOAT_TOL, (
            f"round gain {energy_next - energy} below eps^3 = {eps**3}"
        )
        rounds.append(
            GreenRound(
                index=len(rounds),
                codim_before=v.codim,
                codim_after=v_next.codim,
                worst_function=worst,
                bad_fractions=fractions,
                num_cuts=int(bad_reps.size),
                energy_before=energy,
                energy_after=energy_next,
            )
        )
        v, energy = v_next, energy_next
        assert len(rounds) <= space.n + 1, "more rounds than dimensions"
    final = tuple(float(s[2]) for s in scan)
    verified = all(s[2] <= eps_frac for s in scan)
    if not verified:
        raise VerificationError("green conclusion failed re-measurement", evidence=final)
    return GreenReport(v1=v, eps=eps, rounds=tuple(rounds), final_bad_fractions=final, verified=True)


@dataclass(frozen=True)
class StrongStage:
    index: int
    eps_used: float
    codim: int
    energy: float


@dataclass(frozen=True)
class StrongReport:
    v1: Subspace
    v2: Subspace
    delta: float
    stages: tuple[StrongStage, ...]
    final_gap: float
    bad_fractions: tuple[float, ...]
    eps_final: float
    verified: bool

    def as_dict(self) -> dict:
        return {
            "codim_v1": self.v1.codim,
            "codim_v2": self.v2.codim,
            "delta": self.delta,
            "stages": [
                {
                    "index": s.index,
                    "eps": None if math.isnan(s.eps_used) else s.eps_used,
                    "codim": s.codim,
                    "energy": s.energy,
                }
                for s in self.stages
            ],
            "final_energy_gap": self.final_gap,
            "bad_fractions": list(self.bad_fractions),
            "eps_final": self.eps_final,
            "verified": self.verified,
        }


def strong_regularize(
    fs: Sequence[np.ndarray],
    space: Space,
    v0: Subspace,
    delta: float,
    eps_seq: Callable[[int], float],
) -> StrongReport:
    """Iterate green_regularize until one pass gains at most delta energy.

    eps_seq maps the current codimension to the regularity parameter of the
    next pass.  Returns the last two subspaces (V_1, V_2); conclusion (2)
    (energy gap <= delta) and conclusion (3) (regularity of V_2-restrictions
    at parameter eps_seq(codim V_1), measured over cosets) are re-verified.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    fs = _check_tables(fs, space)
    k = len(fs)
    stages = [StrongStage(0, float("nan"), v0.codim, _coset_energy(fs, space, v0))]
    vs = [v0]
    cap = math.ceil(k / delta) + 2
    for m in range(cap):
        eps_m = eps_seq(vs[-1].codim)
        g = green_regularize(fs, space, vs[-1], eps_m)
        vs.append(g.v1)
        stages.append(StrongStage(m + 1, eps_m, g.v1.codim, _coset_energy(fs, space, g.v1)))
        if stages[-1].energy - stages[-2].energy <= delta:
            break
    else:
        raise AssertionError("energy increment exceeded its k/delta budget")
    v1, v2 = vs[-2], vs[-1]
    gap = stages[-1].energy - stages[-2].energy
    eps_final = eps_seq(v1.codim)
    scan = _coset_irregularity(fs, space, v2, eps_final + FLOAT_TOL)
    fractions = tuple(float(s[2]) for s in scan)
    ok = gap <= delta + FLOAT_TOL and all(s[2] <= Fraction(eps_final) + Fraction(FLOAT_TOL) for s in scan)
    if not ok:
        raise VerificationError("strong regularity conclusions failed", evidence={"gap": gap, "fractions": fractions})
    return StrongReport(
        v1=v1,
        v2=v2,
        delta=delta,
        stages=tuple(stages),
        final_gap=gap,
        bad_fractions=fractions,
        eps_final=eps_final,
        verified=True,
    )


# --- decomposition route ------------------------------------------------------


@dataclass(frozen=True)
class WeakRound:
    index: int
    decomp_codim_before: int
    worst_function: int
    bad_fractions: tuple[float, ...]
    num_targets: int
    energy_before: float
    energy_after: float


@dataclass(frozen=True)
class WeakReport:
    decomposition: Decomposition
    eps: float
    rounds: tuple[WeakRound, ...]
    final_bad_fractions: tuple[float, ...]
    verified: bool

    def as_dict(self) -> dict:
        return {
            "codim_u": self.decomposition.space.n - self.decomposition.U.dim,
            "decomp_codim": self.decomposition.codim,
            "num_parts": len(self.decomposition.parts),
            "eps": self.eps,
            "rounds": [
                {
                    "index": r.index,
                    "decomp_codim_before": r.decomp_codim_before,
                    "worst_function": r.worst_function,
                    "bad_fractions": list(r.bad_fractions),
                    "num_targets": r.num_targets,
                    "energy_gain": r.energy_after - r.energy_before,
                }
                for r in self.rounds
            ],
            "final_bad_fractions": list(self.final_bad_fractions),
            "verified": self.verified,
        }


def _scan_decomposition(fs, space, decomp, eps):
    """Per function: (bad part indices, first bad coset data, fraction)."""
    per_part_cosets = [decomp.slice_cosets(i) for i in range(len(decomp.parts))]
    out = []
    for f in fs:
        bad_parts = []
        first_bad = {}
        for w_idx, (reps, s) in enumerate(per_part_cosets):
            norms, wits = batch_coset_norms(f, space, s, reps)
            over = np.nonzero(norms > eps)[0]
            if over.size:
                bad_parts.append(w_idx)
                first_bad[w_idx] = (int(reps[over[0]]), int(wits[over[0]]), s)
        out.append((bad_parts, first_bad, Fraction(len(bad_parts), len(decomp.parts))))
    return out


def weak_decomp_regularize(fs: Sequence[np.ndarray], space: Space, u: Subspace, eps: float) -> WeakReport:
    """Decompose V with respect to U until slice cosets are mostly regular.

    Starts from the trivial decomposition {V} and refines; a part W is bad for
    f_i when some coset x + (W cap U) with x in W \\ U has norm > eps.  Each
    round treats the lowest over-budget function, targets every bad part at its
    first bad coset's witness hyperplane, and must gain > eps^3 p^{-codim U}
    energy on the slice partition.  Raises DimensionPreconditionError when a
    refinement would need more dimensions than the parts have.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    fs = _check_tables(fs, space)
    k = len(fs)
    decomp = trivial_decomposition(space, u)
    if u.dim == space.n:
        # V \ U is empty: nothing to certify, the trivial decomposition stands
        return WeakReport(decomp, eps, (), tuple(0.0 for _ in fs), True)
    c = space.n - u.dim
    eps_frac = Fraction(eps)
    rounds: list[WeakRound] = []
    cap = math.ceil(space.p**c * k / eps**3) + 2
    energy = project_energy(decomp.slice_partition(), fs)[1]
    while True:
        scan = _scan_decomposition(fs, space, decomp, eps)
        fractions = tuple(float(s[2]) for s in scan)
        worst = next((i for i, s in enumerate(scan) if s[2] > eps_frac), None)
        if worst is None:
            break
        bad_parts, first_bad, _ = scan[worst]
        targets = {}
        for w_idx in bad_parts:
            rep, wit, s = first_bad[w_idx]
            tspace = Space(space.p, s.dim)
            zrow = tspace.decode(wit).reshape(1, -1)
            cut_t = null_space(zrow, space.p)
            targets[w_idx] = Subspace.from_rows(space.p, space.n, cut_t @ s.basis % space.p)
        decomp_next = decomp_refine(decomp, targets)
        energy_next = project_energy(decomp_next.slice_partition(), fs)[1]
        bound = eps**3 * space.p ** (-c)
        assert energy_next - energy > bound - FLOAT_TOL, (
            f"round gain {energy_next - energy} below eps^3 p^-codim = {bound}"
        )
        rounds.append(
            WeakRound(
                index=len(rounds),
                decomp_codim_before=decomp.codim,
                worst_function=worst,
                bad_fractions=fractions,
                num_targets=len(targets),
                energy_before=energy,
                energy_after=energy_next,
            )
        )
        decomp, energy = decomp_next, energy_next
        assert len(rounds) <= cap, "weak regularization exceeded its round budget"
    final_scan = _scan_decomposition(fs, space, decomp, eps + FLOAT_TOL)
    final = tuple(float(s[2]) for s in final_scan)
    if not all(s[2] <= eps_frac + Fraction(FLOAT_TOL) for s in final_scan):
        raise VerificationError("weak decomposition conclusion failed", evidence=final)
    return WeakReport(decomp, eps, tuple(rounds), final, True)


@dataclass(frozen=True)
class StrongDecompReport:
    v1: Subspace
    decomposition: Decomposition
    eps: float
    fallback: bool
    stage_energies: tuple[float, ...]
    slice_gap: float
    bad_fractions: tuple[float, ...]
    verified: bool

    def as_dict(self) -> dict:
        return {
            "codim_v1": self.v1.codim,
            "decomp_codim": self.decomposition.codim,
            "num_parts": len(self.decomposition.parts),
            "eps": self.eps,
            "fallback": self.fallback,
            "stage_energies": list(self.stage_energies),
            "slice_energy_gap": self.slice_gap,
            "bad_fractions": list(self.bad_fractions),
            "verified": self.verified,
        }


def _verify_strong_decomp(fs, space, v1, decomp, eps) -> tuple[float, tuple[Fraction, ...]]:
    """Measure Thm-style conclusions: slice-energy gap and per-f bad-part fractions."""
    if v1.dim == space.n:
        return 0.0, tuple(Fraction(0) for _ in fs)
    v1_pts = space.subspace_points(v1)
    mask = np.ones(space.size, dtype=bool)
    mask[v1_pts] = False
    carrier = np.nonzero(mask)[0]
    coarse = Partition.from_cosets(space, v1, carrier=carrier)
    e_coarse = project_energy(coarse, fs)[1]
    e_decomp = project_energy(decomp.slice_partition(), fs)[1]
    scan = _scan_decomposition(fs, space, decomp, eps + FLOAT_TOL)
    return e_coarse - e_decomp, tuple(s[2] for s in scan)


def strong_decomp_regularize(
    fs: Sequence[np.ndarray], space: Space, v0: Subspace, eps: float
) -> StrongDecompReport:
    """Iterate weak_decomp_regularize on V(D_m) until the energy gain stalls.

    Returns (V_1, D) = (V(D_{M-1}), D_M) for the first M with
    E(P(V_M)) <= E(P(V_{M-1})) + eps/2.  Whenever the ambient dimension cannot
    support a step (the initial line decomposition or a weak refinement), the
    trivially-true fallback V_1 = {0}, D = {V} is returned instead; either way
    the conclusions are re-measured before returning.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    fs = _check_tables(fs, space)
    k = len(fs)
    v0 = _shrink_to_codim(space, v0, min(_min_codim_for(space, eps), space.n))

    def finish(v1, decomp, energies, fallback):
        gap, fracs = _verify_strong_decomp(fs, space, v1, decomp, eps)
        ok = gap <= eps + FLOAT_TOL and all(f <= Fraction(eps) + Fraction(FLOAT_TOL) for f in fracs)
        if not ok:
            raise VerificationError(
                "strong decomposition conclusions failed",
                evidence={"gap": gap, "fractions": [float(f) for f in fracs]},
            )
        return StrongDecompReport(
            v1=v1,
            decomposition=decomp,
            eps=eps,
            fallback=fallback,
            stage_energies=tuple(energies),
            slice_gap=gap,
            bad_fractions=tuple(float(f) for f in fracs),
            verified=True,
        )

    zero = Subspace.zero(space.p, space.n)
    if _min_codim_for(space, eps) > space.n:
        return finish(zero, trivial_decomposition(space, zero), (), True)
    from .energy import decomp_initial

    try:
        decomp = decomp_initial(space, v0)
    except DimensionPreconditionError:
        return finish(zero, trivial_decomposition(space, zero), (), True)
    v_m = decomp.common_subspace()
    energies = [_coset_energy(fs, space, v_m)]
    cap = math.ceil(2 * k / eps) + 2
    for _ in range(cap):
        try:
            weak = weak_decomp_regularize(fs, space, v_m, eps)
        except DimensionPreconditionError:
            return finish(zero, trivial_decomposition(space, zero), tuple(energies), True)
        v_next = weak.decomposition.common_subspace()
        energies.append(_coset_energy(fs, space, v_next))
        if energies[-1] <= energies[-2] + eps / 2:
            return finish(v_m, weak.decomposition, tuple(energies), False)
        v_m = v_next
    raise AssertionError("energy increment exceeded its 2k/eps budget")


# --- the regular model ---------------------------------------------------------


@dataclass(frozen=True)
class RegularModel:
    v0: Subspace
    v1: Subspace
    v2: Subspace
    u: Subspace
    eps: float
    backend: str
    seed: int
    attempts: int
    details: dict
    inner: object = field(repr=False, default=None)

    def as_dict(self) -> dict:
        d = {
            "backend": self.backend,
            "seed": self.seed,
            "attempts": self.attempts,
            "eps": self.eps,
            "codim_v0": self.v0.codim,
            "codim_v1": self.v1.codim,
            "codim_v2": self.v2.codim,
            "dim_u": self.u.dim,
        }
        d.update(self.details)
        return d


def verify_model(fs: Sequence[np.ndarray], space: Space, v1: Subspace, v2: Subspace, u: Subspace, eps: float) -> dict:
    """Re-measure the three regular-model conclusions from scratch.

    (1) is structural (V_2 <= V_1, U + V_1 = V direct); (2) bounds the fraction
    of x in U whose V_1- and V_2-coset means differ by more than eps for some
    f; (3) demands eps-regularity of every f on x + V_2 for every nonzero x in
    U.  Returns a dict with an overall "ok" plus the measurements.
    """
    fs = _check_tables(fs, space)
    structural = (
        v2.leq(v1)
        and u.meet(v1).dim == 0
        and u.join(v1).dim == space.n
    )
    ids1, _ = space.coset_ids(v1)
    ids2, _ = space.coset_ids(v2)
    u_pts = space.subspace_points(u)
    worst_gap = 0.0
    bad = np.zeros(u_pts.size, dtype=bool)
    for f in fs:
        m1 = np.bincount(ids1, weights=f) / np.bincount(ids1)
        m2 = np.bincount(ids2, weights=f) / np.bincount(ids2)
        gap = np.abs(m1[ids1[u_pts]] - m2[ids2[u_pts]])
        worst_gap = max(worst_gap, float(gap.max()))
        bad |= gap > eps + FLOAT_TOL
    frac_bad = Fraction(int(np.count_nonzero(bad)), int(u_pts.size))
    nonzero = u_pts[u_pts != 0]
    max_norm = 0.0
    for f in fs:
        norms, _ = batch_coset_norms(f, space, v2, nonzero)
        if norms.size:
            max_norm = max(max_norm, float(norms.max()))
    ok = (
        structural
        and frac_bad <= Fraction(eps) + Fraction(FLOAT_TOL)
        and max_norm <= eps + FLOAT_TOL
    )
    return {
        "ok": bool(ok),
        "structural_ok": bool(structural),
        "density_gap_bad_fraction": float(frac_bad),
        "worst_density_gap": worst_gap,
        "max_restriction_norm": max_norm,
    }


def _derived_seed(seed: int, attempt: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(attempt,)).generate_state(1)[0])


def regular_model(
    fs: Sequence[np.ndarray],
    space: Space,
    v0: Subspace,
    eps: float,
    *,
    backend: str = "strong",
    seed: int = 0,
    max_attempts: int = 64,
) -> RegularModel:
    """Produce verified (V_2 <= V_1 <= V_0, U) with U + V_1 = V direct.

    backend "strong" runs strong_regularize and draws seeded uniform random
    complements U of V_1 until the verifier passes; backend "decomp" runs
    strong_decomp_regularize and draws seeded parts W (V_2 = V_1 cap W, U a
    complement of V_2 inside W).  Both retry up to max_attempts and raise
    RetryCapError with per-attempt stats if nothing verifies.
    """
    if backend not in ("strong", "decomp"):
        raise ValueError(f"unknown backend {backend!r}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    fs = _check_tables(fs, space)
    k = len(fs)
    need = _min_codim_for(space, eps)
    if need > space.n:
        zero = Subspace.zero(space.p, space.n)
        full = Subspace.full(space.p, space.n)
        details = verify_model(fs, space, zero, zero, full, eps)
        details["trivial_fallback"] = True
        if not details["ok"]:
            raise VerificationError("trivial model failed verification", evidence=details)
        return RegularModel(v0, zero, zero, full, eps, backend, seed, 1, details)
    v0 = _shrink_to_codim(space, v0, need)
    stats: list[dict] = []
    if backend == "strong":
        inner = strong_regularize(
            fs, space, v0, eps**3 / 4, lambda c: min(eps, space.p ** (-c) / (2 * k))
        )
        v1, v2 = inner.v1, inner.v2
        for attempt in range(max_attempts):
            u = v1.complement(seed=_derived_seed(seed, attempt))
            details = verify_model(fs, space, v1, v2, u, eps)
            stats.append({"attempt": attempt, **details})
            if details["ok"]:
                return RegularModel(v0, v1, v2, u, eps, backend, seed, attempt + 1, details, inner)
        raise RetryCapError("no random complement verified", attempts=max_attempts, stats=stats)
    inner = strong_decomp_regularize(fs, space, v0, min(eps**3 / 4, 1 / (4 * k)))
    v1 = inner.v1
    parts = inner.decomposition.parts
    for attempt in range(max_attempts):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(attempt,)))
        w = parts[int(rng.integers(len(parts)))]
        v2 = v1.meet(w)
        u = _complement_within(w, v2)
        details = verify_model(fs, space, v1, v2, u, eps)
        stats.append({"attempt": attempt, "part_dim": w.dim, **details})
        if details["ok"]:
            return RegularModel(v0, v1, v2, u, eps, backend, seed, attempt + 1, details, inner)
    raise RetryCapError("no decomposition part verified", attempts=max_attempts, stats=stats)


# --- regularity recoloring ------------------------------------------------------


@dataclass(frozen=True)
class RecolorReport:
    coloring: Coloring
    original: Coloring
    model: RegularModel
    eps: float
    eps_prime_final: float
    changed_count: int
    mode: str
    conditions: dict

    def as_dict(self) -> dict:
        return {
            "eps": self.eps,
            "eps_prime_final": self.eps_prime_final,
            "changed_count": self.changed_count,
            "changed_fraction": self.changed_count / self.coloring.space.size,
            "mode": self.mode,
            "model": self.model.as_dict(),
            "conditions": self.conditions,
        }


def _leading_kill_subspace(space: Space, codim: int) -> Subspace:
    """The deterministic codim-d subspace {x : x_0 = ... = x_{d-1} = 0}."""
    rows = np.eye(space.n, dtype=np.int64)[codim:]
    return Subspace.from_rows(space.p, space.n, rows if rows.size else np.zeros((0, space.n), dtype=np.int64))


def regularity_recolor(
    coloring: Coloring,
    eps: float,
    eps_prime,
    *,
    backend: str = "strong",
    seed: int = 0,
) -> RecolorReport:
    """Recolor <= eps|V| points so colors surviving in a V_1-coset are dense in V_2.

    eps_prime may be a float (plain mode) or a nonincreasing callable of the
    codimension (sequence mode, where the regularity achieved in conclusion
    (3) is allowed to depend on codim V_1; realized as a fixpoint loop over the
    codimension guess).  The three conclusions are re-measured exactly and the
    change budget is asserted.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    space = coloring.space
    r = coloring.r
    fs = coloring.indicators()
    d0 = math.ceil(1 / eps)
    if d0 > space.n:
        raise SpaceExhaustedError(
            f"conclusion codim V_1 >= 1/eps needs dimension >= {d0}, have {space.n}"
        )
    sequence_mode = callable(eps_prime)
    if sequence_mode:
        d = d0
        while True:
            target = float(eps_prime(d))
            eps2 = min(eps / (4 * r), target)
            model = regular_model(fs, space, _leading_kill_subspace(space, d), eps2, backend=backend, seed=seed)
            d_new = model.v1.codim
            if eps2 <= float(eps_prime(d_new)):
                eps_prime_final = float(eps_prime(d_new))
                break
            assert d_new > d, "codimension guess must strictly increase"
            d = d_new
    else:
        eps_prime_final = float(eps_prime)
        eps2 = min(eps / (4 * r), eps_prime_final)
        model = regular_model(fs, space, _leading_kill_subspace(space, d0), eps2, backend=backend, seed=seed)

    v1, v2, u = model.v1, model.v2, model.u
    u_pts = space.subspace_points(u)
    size2 = space.p**v2.dim
    thresh = Fraction(eps) / (2 * r)
    new_values = coloring.values.copy()
    for x in u_pts:
        pts2 = space.coset_points(int(x), v2)
        counts = np.bincount(coloring.values[pts2], minlength=r + 1)
        dense = [c for c in range(1, r + 1) if Fraction(int(counts[c]), size2) >= thresh]
        assert dense, "pigeonhole guarantees a dense color for eps <= 1"
        i_x = dense[0]
        low = np.zeros(r + 1, dtype=bool)
        low[1:] = True
        low[dense] = False
        pts1 = space.coset_points(int(x), v1)
        vals1 = new_values[pts1]
        vals1[low[coloring.values[pts1]]] = i_x
        new_values[pts1] = vals1
    recolored = Coloring(space, r, new_values)
    changed = recolored.changed_from(coloring)
    assert Fraction(changed, space.size) <= Fraction(eps), (
        f"recolored {changed} points, budget {eps}|V|"
    )

    # conclusion (2): every surviving color is dense in the V_2-coset, exactly
    cond2 = True
    for x in u_pts:
        pts1 = space.coset_points(int(x), v1)
        pts2 = space.coset_points(int(x), v2)
        counts = np.bincount(coloring.values[pts2], minlength=r + 1)
        appearing = np.unique(recolored.values[pts1])
        for c in appearing:
            if Fraction(int(counts[c]), size2) < thresh:
                cond2 = False
    # conclusion (3): regularity of the *original* indicators on x + V_2, x != 0
    nonzero = u_pts[u_pts != 0]
    max_norm = 0.0
    for f in fs:
        norms, _ = batch_coset_norms(f, space, v2, nonzero)
        if norms.size:
            max_norm = max(max_norm, float(norms.max()))
    cond1 = d0 <= v1.codim <= v2.codim
    cond3 = max_norm <= eps_prime_final + FLOAT_TOL
    conditions = {
        "codim_bound_ok": bool(cond1),
        "survivor_density_ok": bool(cond2),
        "restriction_regularity_ok": bool(cond3),
        "max_restriction_norm": max_norm,
        "ok": bool(cond1 and cond2 and cond3),
    }
    if not conditions["ok"]:
        raise VerificationError("recoloring conclusions failed", evidence=conditions)
    return RecolorReport(
        coloring=recolored,
        original=coloring,
        model=model,
        eps=eps,
        eps_prime_final=eps_prime_final,
        changed_count=changed,
        mode="sequence" if sequence_mode else "plain",
        conditions=conditions,
    )
