import numpy as np
import pytest

from removal_lab.energy import (
    Decomposition,
    Partition,
    decomp_initial,
    decomp_refine,
    increment_subspace,
    project,
    project_energy,
    trivial_decomposition,
)
from removal_lab.errors import DimensionPreconditionError, VerificationError
from removal_lab.fields import Subspace
from removal_lab.space import Space

TOL = 1e-9


def random_subspace(rng, p, n, dim):
    while True:
        sub = Subspace.from_rows(p, n, rng.integers(0, p, size=(dim, n)).astype(np.int64))
        if sub.dim == dim:
            return sub


# --- partitions ---------------------------------------------------------------


def test_partition_labels_are_canonical():
    sp = Space(2, 2)
    a = Partition(sp, np.array([5, 5, 9, 9]))
    b = Partition(sp, np.array([0, 0, 1, 1]))
    assert np.array_equal(a.labels, b.labels)
    assert a.num_parts == 2


def test_partition_carrier_and_validation():
    sp = Space(2, 2)
    part = Partition(sp, np.array([-1, 0, 0, 3]))
    assert np.array_equal(part.carrier, [1, 2, 3])
    with pytest.raises(ValueError):
        Partition(sp, np.full(sp.size, -1))
    with pytest.raises(ValueError):
        Partition(sp, np.zeros(3, dtype=np.int64))


def test_coset_partition_refinement_relations():
    sp = Space(3, 3)
    big = Subspace.from_rows(3, 3, [[1, 0, 0], [0, 1, 0]])
    small = Subspace.from_rows(3, 3, [[1, 0, 0]])
    fine = Partition.from_cosets(sp, small)
    coarse = Partition.from_cosets(sp, big)
    assert fine.refines(coarse)
    assert not coarse.refines(fine)
    assert fine.refines(fine)
    both = fine.common_refinement(coarse)
    assert np.array_equal(both.labels, fine.labels)


def test_project_averages_within_parts():
    sp = Space(2, 2)
    part = Partition(sp, np.array([0, 0, 1, -1]))
    out = project(part, np.array([1.0, 3.0, 5.0, 100.0]))
    assert np.allclose(out, [2.0, 2.0, 5.0, 0.0])


def test_energy_monotone_and_pythagoras_on_random_nested_pairs():
    """E(Q) >= E(P) and E(Q) - E(P) = sum ||f_Q - f_P||^2 for Q refining P."""
    rng = np.random.default_rng(60)
    for _ in range(30):
        p = int(rng.choice([2, 3]))
        n = int(rng.integers(2, 5))
        sp = Space(p, n)
        d_small = int(rng.integers(0, n))
        d_big = int(rng.integers(d_small + 1, n + 1))
        big = random_subspace(rng, p, n, d_big)
        # nested: a sub-subspace spanned by a prefix of big's basis
        small = Subspace.from_rows(p, n, big.basis[:d_small])
        carrier = None
        if rng.random() < 0.5:
            keep = rng.random(sp.size) < 0.8
            keep[0] = True
            carrier = np.nonzero(keep)[0]
        coarse = Partition.from_cosets(sp, big, carrier)
        fine = Partition.from_cosets(sp, small, carrier)
        assert fine.refines(coarse)
        fs = [rng.uniform(-1, 1, sp.size) for _ in range(int(rng.integers(1, 4)))]
        proj_c, e_c = project_energy(coarse, fs)
        proj_f, e_f = project_energy(fine, fs)
        assert e_f >= e_c - TOL
        on = coarse.labels >= 0
        gap = sum(((pf - pc)[on] ** 2).mean() for pf, pc in zip(proj_f, proj_c))
        assert abs((e_f - e_c) - gap) <= TOL


def test_common_refinement_energy_dominates_both():
    rng = np.random.default_rng(61)
    sp = Space(2, 4)
    pa = Partition.from_cosets(sp, random_subspace(rng, 2, 4, 2))
    pb = Partition.from_cosets(sp, random_subspace(rng, 2, 4, 2))
    both = pa.common_refinement(pb)
    fs = [rng.uniform(-1, 1, sp.size)]
    _, ea = project_energy(pa, fs)
    _, eb = project_energy(pb, fs)
    _, ec = project_energy(both, fs)
    assert ec >= max(ea, eb) - TOL


# --- increment step -------------------------------------------------------------


def test_increment_subspace_none_when_regular():
    sp = Space(3, 2)
    assert increment_subspace(np.full(sp.size, 0.3), sp, 0.1) is None


def test_increment_subspace_realizes_energy_gain():
    rng = np.random.default_rng(8)
    sp = Space(3, 3)
    eps = 0.05
    found = 0
    for _ in range(20):
        g = rng.uniform(0, 1, sp.size)
        out = increment_subspace(g, sp, eps)
        if out is None:
            continue
        found += 1
        z, cut = out
        assert cut.dim == sp.n - 1
        assert (sp.digits[sp.subspace_points(cut)] @ sp.digits[z] % 3 == 0).all()
        # splitting the carrier along the cut gains more than eps^2
        trivial = Partition(sp, np.zeros(sp.size, dtype=np.int64))
        split = Partition.from_cosets(sp, cut)
        _, e0 = project_energy(trivial, [g])
        _, e1 = project_energy(split, [g])
        assert e1 - e0 > eps**2 - TOL
    assert found >= 10  # random tables at this size are rarely 0.05-regular


# --- decompositions --------------------------------------------------------------


def test_field_line_decomposition_golden():
    sp = Space(3, 2)
    u = Subspace.from_rows(3, 2, [[0, 1]])
    d = decomp_initial(sp, u)
    assert d.codim == 1
    assert [w.basis.tolist() for w in d.parts] == [[[1, 0]], [[1, 1]], [[1, 2]]]
    assert d.common_subspace().dim == 0
    d.validate()


def test_trivial_decomposition_slices_are_u_cosets():
    sp = Space(2, 3)
    u = Subspace.from_rows(2, 3, [[1, 1, 0]])
    d = trivial_decomposition(sp, u)
    d.validate()
    u_pts = sp.subspace_points(u)
    carrier = np.setdiff1d(np.arange(sp.size), u_pts)
    expect = Partition.from_cosets(sp, u, carrier)
    assert np.array_equal(d.slice_partition().labels, expect.labels)


def test_decomp_initial_requires_room():
    sp = Space(2, 3)
    with pytest.raises(DimensionPreconditionError):
        decomp_initial(sp, Subspace.from_rows(2, 3, [[1, 0, 0]]))


def test_decomp_initial_full_u_is_trivial():
    sp = Space(5, 2)
    d = decomp_initial(sp, Subspace.full(5, 2))
    assert len(d.parts) == 1 and d.codim == 0


@pytest.mark.parametrize("p,n,udim", [(2, 2, 1), (2, 4, 2), (3, 2, 1), (3, 4, 2), (5, 2, 1)])
def test_decomp_initial_validates_across_shapes(p, n, udim):
    rng = np.random.default_rng(p * 10 + n)
    sp = Space(p, n)
    u = random_subspace(rng, p, n, udim)
    d = decomp_initial(sp, u)
    assert len(d.parts) == p ** (n - udim)
    d.validate()
    # slice partition covers exactly V minus U
    lab = d.slice_partition().labels
    u_mask = np.zeros(sp.size, dtype=bool)
    u_mask[sp.subspace_points(u)] = True
    assert ((lab >= 0) == ~u_mask).all()


def test_decomp_refine_grows_codim_and_respects_targets():
    sp = Space(2, 4)
    u = Subspace.from_rows(2, 4, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]])
    d = decomp_initial(sp, u)
    assert d.codim == 1
    s0 = d.parts[0].meet(u)
    target = Subspace.from_rows(2, 4, s0.basis[:1])
    fine = decomp_refine(d, {0: target})
    assert fine.codim == 2
    assert fine.slice_partition().refines(d.slice_partition())
    hit = 0
    for w in fine.parts:
        if w.leq(d.parts[0]):
            hit += 1
            assert w.meet(u).leq(target)
    assert hit == 2  # p^{codim U} children per part
    with pytest.raises(ValueError):
        decomp_refine(d, {0: Subspace.from_rows(2, 4, [[0, 0, 0, 1]])})


def test_decomp_refine_dimension_floor():
    sp = Space(2, 4)
    u = Subspace.from_rows(2, 4, [[1, 0, 0, 0], [0, 1, 0, 0]])
    d = decomp_initial(sp, u)
    with pytest.raises(DimensionPreconditionError):
        decomp_refine(d)


def test_slice_cosets_tile_each_slice():
    sp = Space(3, 4)
    u = Subspace.from_rows(3, 4, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]])
    d = decomp_initial(sp, u)
    u_mask = np.zeros(sp.size, dtype=bool)
    u_mask[sp.subspace_points(u)] = True
    for i, w in enumerate(d.parts):
        reps, s = d.slice_cosets(i)
        assert s == w.meet(u)
        seen = np.zeros(sp.size, dtype=np.int64)
        for rep in reps:
            seen[sp.coset_points(int(rep), s)] += 1
        w_pts = sp.subspace_points(w)
        expect = np.zeros(sp.size, dtype=np.int64)
        expect[w_pts[~u_mask[w_pts]]] = 1
        assert np.array_equal(seen, expect)


def test_decomposition_validate_catches_bad_parts():
    sp = Space(2, 2)
    u = Subspace.from_rows(2, 2, [[1, 0]])
    bad = Decomposition(sp, u, (Subspace.from_rows(2, 2, [[1, 0]]),))
    with pytest.raises(VerificationError):
        bad.validate()
