"""Canonical colorings and the finite pattern-family dichotomy.

The canonical coloring assigns each point the color its first nonzero
coordinate gets under a map chi: {1..p-1} -> {1..r} (0 gets stored color 1).
For a finite family of patterns sharing (p, r), exactly one of two things
happens on the decision space F_p^{k_max}:

  Case A: every chi admits an all-nonzero instance of some family member
          (certified per chi by the pattern index and the instance tuple), or
  Case B: some chi yields a family-free canonical coloring (certified by an
          exhaustive freeness check, never by the search's early exit).

Enumeration of chi is lexicographic over (chi(1), ..., chi(p-1)), and the
returned Case-B witness is the first failing chi in that order.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import VerificationError
from .patterns import Pattern, first_instance, pattern_stats
from .space import Coloring, Space


def canonical_coloring(space: Space, chi, r: int | None = None) -> Coloring:
    """Color each point by chi(first nonzero coordinate); 0 gets color 1."""
    chi = tuple(int(c) for c in chi)
    if len(chi) != space.p - 1:
        raise ValueError(f"chi must assign all {space.p - 1} nonzero field values")
    r = max(chi) if r is None else r
    if min(chi) < 1 or max(chi) > r:
        raise ValueError(f"chi colors must lie in 1..{r}")
    digits = space.digits
    nz = digits != 0
    first = np.argmax(nz, axis=1)
    lead = digits[np.arange(space.size), first]
    table = np.concatenate(([1], np.array(chi, dtype=np.int64)))
    values = table[lead]
    return Coloring(space, r, values)


@dataclass(frozen=True)
class ChiCertificate:
    chi: tuple[int, ...]
    pattern_index: int
    instance: tuple[int, ...]


@dataclass(frozen=True)
class Dichotomy:
    case: str
    p: int
    r: int
    n: int
    certificates: tuple[ChiCertificate, ...]
    chi: tuple[int, ...] | None
    verified: bool

    def as_dict(self) -> dict:
        d = {"case": self.case, "p": self.p, "r": self.r, "n": self.n, "verified": self.verified}
        if self.case == "A":
            d["certificates"] = [
                {"chi": list(c.chi), "pattern_index": c.pattern_index, "instance": list(c.instance)}
                for c in self.certificates
            ]
        else:
            d["chi"] = list(self.chi)
        return d


def _check_certificate(pattern: Pattern, coloring: Coloring, instance: tuple[int, ...]) -> None:
    """Direct re-check of one instance: linear relations, nonzero, colors."""
    space = coloring.space
    xs = np.array(instance, dtype=np.int64)
    coords = space.decode(xs)
    if pattern.rows.shape[0] and np.any(pattern.rows @ coords % space.p):
        raise VerificationError("certificate violates the linear relations", evidence=instance)
    if np.any(xs == 0):
        raise VerificationError("certificate touches zero", evidence=instance)
    if np.any(coloring.values[xs] != np.array(pattern.psi)):
        raise VerificationError("certificate colors do not match", evidence=instance)


def decide_dichotomy(family, *, p: int | None = None, r: int | None = None) -> Dichotomy:
    """Decide Case A / Case B for a pattern family on F_p^{k_max}.

    For an empty family p and r must be given explicitly and the outcome is
    Case B with the all-1s chi.  Certificates on both sides are re-verified:
    each Case-A instance directly, the Case-B coloring by exhaustive freeness
    for every family member.
    """
    family = list(family)
    if family:
        p = family[0].p
        r = family[0].r
        for h in family:
            if (h.p, h.r) != (p, r):
                raise ValueError("family members disagree on (p, r)")
        n = max(h.k for h in family)
    else:
        if p is None or r is None:
            raise ValueError("empty family needs explicit p and r")
        n = 1
    space = Space(p, max(n, 1))
    certificates: list[ChiCertificate] = []
    for chi in product(range(1, r + 1), repeat=p - 1):
        coloring = canonical_coloring(space, chi, r)
        hit = None
        for idx, h in enumerate(family):
            inst = first_instance(h, coloring)
            if inst is not None:
                hit = ChiCertificate(chi, idx, tuple(int(x) for x in inst))
                break
        if hit is None:
            for h in family:
                if not pattern_stats(h, coloring).is_free:
                    raise VerificationError(
                        "search claimed freeness but exhaustive recount disagrees", evidence=chi
                    )
            return Dichotomy("B", p, r, space.n, (), chi, True)
        certificates.append(hit)
    for cert in certificates:
        _check_certificate(family[cert.pattern_index], canonical_coloring(space, cert.chi, r), cert.instance)
    return Dichotomy("A", p, r, space.n, tuple(certificates), None, True)
