import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.chains import (CONVENTIONS, Chain, Convention, Group, Term, admissible_types, check_cycle,
                             check_schottky, find_convention, gen, inverse, schottky_cells, sigma_chains,
                             surface_cells, surface_group, _cycle_defect)
from artifact.errors import ConventionMismatch


def letters(names):
    return st.tuples(st.sampled_from(names), st.sampled_from([1, -1]))


def words(names, max_size=12):
    return st.lists(letters(names), max_size=max_size).map(tuple)


def test_free_cancellation():
    grp = surface_group(1, 1)
    assert grp.reduce(gen("a1") + gen("a1", -1)) == ()


def test_last_puncture_eliminated():
    grp = surface_group(0, 4)
    assert grp.reduce(gen("l4")) == inverse(gen("l1") + gen("l2") + gen("l3"))


def test_relator_is_identity():
    for g, n in [(2, 0), (1, 2), (0, 4), (3, 0)]:
        grp = surface_group(g, n)
        rel = ()
        for k in range(1, g + 1):
            rel += gen(f"a{k}") + gen(f"b{k}") + gen(f"a{k}", -1) + gen(f"b{k}", -1)
        rel += tuple((f"l{i}", 1) for i in range(1, n + 1))
        assert grp.is_identity(rel)


GENUS2 = ["a1", "b1", "a2", "b2"]


@settings(max_examples=150, deadline=None)
@given(words(GENUS2, 16))
def test_reduce_idempotent_compact(w):
    grp = surface_group(2, 0)
    r = grp.reduce(w)
    assert grp.reduce(r) == r
    assert grp.is_identity(grp.mul(r, grp.inv(w)))


@settings(max_examples=150, deadline=None)
@given(words(["a1", "b1", "l1", "l2"], 14))
def test_reduce_idempotent_punctured(w):
    grp = surface_group(1, 2)
    r = grp.reduce(w)
    assert grp.reduce(r) == r


@settings(max_examples=80, deadline=None)
@given(words(GENUS2, 8), words(GENUS2, 8))
def test_dehn_word_problem_respects_conjugated_relator(u, v):
    grp = surface_group(2, 0)
    rel = gen("a1") + gen("b1") + gen("a1", -1) + gen("b1", -1) + gen("a2") + gen("b2") + \
        gen("a2", -1) + gen("b2", -1)
    assert grp.equal(grp.mul(u, rel, grp.inv(u), v), v)


def test_unique_convention():
    conv = find_convention()
    assert conv == Convention("inverse", "standard")
    passing = [c for c in CONVENTIONS if _cycle_defect(1, 1, c)[0].is_zero()]
    assert passing == [conv]


@pytest.mark.parametrize("g,n", admissible_types(3, 5))
def test_cycle_identity(g, n):
    r = check_cycle(g, n, find_convention())
    assert r.passed and r.defect == []
    assert r.details["dd_sigma_zero"] and r.details["dprime_dprime_F_zero"] and r.details["dd_W_zero"]


def test_admissible_types_include_compact_cases():
    types = admissible_types(3, 5)
    assert len(types) == 19
    assert (2, 0) in types and (3, 0) in types and (1, 0) not in types and (0, 3) not in types


def test_wrong_convention_fails():
    with pytest.raises(ConventionMismatch):
        check_cycle(1, 1, Convention("inverse", "negated"))


def test_unstable_type_rejected():
    with pytest.raises(ValueError):
        check_cycle(0, 3)


@pytest.mark.parametrize("g", [2, 3])
def test_schottky_identity(g):
    r = check_schottky(g)
    assert r.passed
    assert r.details["dprime_S_is_minus_L"]
    assert all(r.details.values())


def test_schottky_rank_one_rejected():
    with pytest.raises(ValueError):
        check_schottky(1)


def test_bar_degree_zero_boundary_is_cellular():
    sc = surface_cells(1, 2, find_convention())
    cx = sc.cx
    F = cx.elem("F")
    assert cx.total_boundary(F) == cx.d_prime(F)


def test_rank_one_bar_formula():
    sc = surface_cells(1, 1, find_convention())
    cx, grp = sc.cx, sc.cx.group
    h, g = gen("b1"), gen("a1")
    ch = Chain(cx, {Term("c1", h, (g,)): 1})
    expected = Chain(cx, {Term("c1", grp.mul(h, g), ()): 1}) - Chain(cx, {Term("c1", h, ()): 1})
    assert cx.d_bar(ch) == expected


def test_normalized_bar_drops_identity_entries():
    cx = surface_cells(0, 4, find_convention()).cx
    ch = cx.elem("c1", (gen("l1") + gen("l1", -1),))
    assert ch.is_zero()


@pytest.mark.parametrize("g,n", [(0, 4), (1, 1), (1, 2), (2, 0)])
def test_boundary_squared_vanishes_on_pieces(g, n):
    sc = surface_cells(g, n, find_convention())
    cx = sc.cx
    for name, piece in sigma_chains(sc).items():
        assert cx.total_boundary(cx.total_boundary(piece)).is_zero(), name


SCHOTTKY = ["L1", "L2"]


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["R", "D", "H1", "H2", "C1"]), words(SCHOTTKY, 4),
                          st.lists(words(SCHOTTKY, 3), max_size=2), st.integers(-3, 3)), max_size=5))
def test_boundary_squared_vanishes_on_random_chains(spec):
    cx = schottky_cells(2, find_convention())
    ch = Chain(cx)
    for cell, coeff, bar, coef in spec:
        ch = ch + cx.elem(cell, tuple(bar), coeff, coef)
    assert cx.total_boundary(cx.total_boundary(ch)).is_zero()


def test_free_group_from_schottky_cells():
    grp = Group(SCHOTTKY)
    assert grp.reduce(gen("L1") + gen("L2") + gen("L2", -1)) == gen("L1")
