import cmath
import math

import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from artifact.errors import NotRealizable
from artifact.moebius import (INF, MoebiusMap, chordal, classify, compose, conjugate, conjugate_into_real,
                              is_inf, map_sending)

finite = st.floats(-3, 3, allow_nan=False)
cplx = st.builds(complex, finite, finite)


@st.composite
def maps(draw):
    a, b, c, d = (draw(cplx) for _ in range(4))
    if abs(a * d - b * c) < 1e-2:
        d = d + 1.0
        if abs(a * d - b * c) < 1e-2:
            a, d = a + 1.0, d + 1.0
    if abs(a * d - b * c) < 1e-2:
        return MoebiusMap.identity()
    return MoebiusMap.from_entries(a, b, c, d)


def adjugate_inverse(m):
    return MoebiusMap.from_entries(m.d, -m.b, -m.c, m.a)


def test_identity_composition():
    m = MoebiusMap.from_entries(2, 1 + 1j, 0.5, 3)
    assert compose(MoebiusMap.identity(), m).close_to(m)
    assert compose(m, MoebiusMap.identity()).close_to(m)


def test_translation_addition():
    t = MoebiusMap.from_entries(1, 1, 0, 1)
    assert np.allclose(compose(t, t).matrix, [[1, 2], [0, 1]])


def test_normalized_determinant_and_sign():
    m = MoebiusMap.from_entries(-4, 0, 0, -1)
    assert abs(m.det - 1) < 1e-14
    assert m.close_to(MoebiusMap.from_entries(4, 0, 0, 1))


@settings(max_examples=60, deadline=None)
@given(maps())
def test_inverse_matches_adjugate(m):
    assert compose(m, m.inverse()).close_to(MoebiusMap.identity(), 1e-8)
    assert m.inverse().close_to(adjugate_inverse(m), 1e-8)


@settings(max_examples=60, deadline=None)
@given(maps(), maps(), cplx)
def test_composition_is_function_composition(f, g, z):
    gz = g(z)
    if is_inf(gz) or abs(gz) > 1e6:
        return
    fgz = f(gz)
    h = compose(f, g)(z)
    if is_inf(fgz) or abs(fgz) > 1e6:
        return
    assert chordal(fgz, h) < 1e-8


@settings(max_examples=40, deadline=None)
@given(maps(), maps(), maps())
def test_composition_associative(f, g, h):
    assert compose(compose(f, g), h).close_to(compose(f, compose(g, h)), 1e-7)


def test_classify_parabolic():
    cls = classify(MoebiusMap.from_entries(1, 1, 0, 1))
    assert cls.tag == "parabolic"
    assert len(cls.fixed_points) == 1 and is_inf(cls.fixed_points[0])


def test_classify_hyperbolic_diagonal():
    cls = classify(MoebiusMap.from_entries(2, 0, 0, 0.5))
    assert cls.tag == "hyperbolic"
    assert abs(cls.multiplier - 0.25) < 1e-14
    pts = cls.fixed_points
    assert sum(is_inf(p) for p in pts) == 1
    assert any(not is_inf(p) and abs(p) < 1e-14 for p in pts)


def test_classify_elliptic_rotation():
    cls = classify(MoebiusMap.from_entries(0, -1, 1, 0))
    assert cls.tag == "elliptic"
    assert abs(cls.multiplier + 1) < 1e-12
    assert sorted((p.imag for p in cls.fixed_points)) == pytest.approx([-1, 1])
    assert all(abs(p.real) < 1e-12 for p in cls.fixed_points)


def test_classify_identity_and_loxodromic():
    assert classify(MoebiusMap.identity()).tag == "identity"
    assert classify(MoebiusMap.from_entries(2j, 0, 0, -0.5j)).tag != "elliptic"
    assert classify(MoebiusMap.from_entries(1 + 1j, 0, 0, 1 / (1 + 1j))).tag == "loxodromic"


def test_map_sending_three_points():
    m = map_sending(2, 3 + 1j, -1)
    assert abs(m(2)) < 1e-14
    assert abs(m(3 + 1j) - 1) < 1e-14
    assert is_inf(m(-1)) or abs(m(-1)) > 1e12
    m2 = map_sending(INF, 0, 1)
    assert abs(m2(INF)) < 1e-14 and abs(m2(0) - 1) < 1e-14


def test_real_generators_need_no_conjugation():
    gens = [MoebiusMap.from_entries(1, 2, 0, 1), MoebiusMap.from_entries(1, 0, -2, 1)]
    g, real, res = conjugate_into_real(gens)
    assert g.close_to(MoebiusMap.identity())
    assert res == 0.0


@settings(max_examples=25, deadline=None)
@given(maps())
@example(MoebiusMap.from_entries(0.7071067811865475, 0, 7.071067811865474e-08j, 1.414213562373095))
@example(MoebiusMap.from_entries(0.7071067811865475, 0.7071067811865475j, 3.185469844573361e-84j, 1.414213562373095))
def test_conjugate_into_real_round_trip(h):
    gens = [MoebiusMap.from_entries(1, 2, 0, 1), MoebiusMap.from_entries(1, 0, -2, 1),
            MoebiusMap.from_entries(-1, 2, -2, 3)]
    hidden = [conjugate(m, h) for m in gens]
    _, real, res = conjugate_into_real(hidden)
    # rounding grows like cond(h)^2 when hiding and again when undoing
    cond = abs(h.a) ** 2 + abs(h.b) ** 2 + abs(h.c) ** 2 + abs(h.d) ** 2
    assert res < max(1e-10, 1e-15 * cond**4)
    # conjugation preserves traces
    for a, b in zip(real, gens):
        assert abs(abs(a.trace) - abs(b.trace)) < 1e-8


def test_complex_trace_not_realizable():
    gens = [MoebiusMap.from_entries(1, 2, 0, 1), MoebiusMap.from_entries(1 + 1j, 0, 1, 1 / (1 + 1j))]
    with pytest.raises(NotRealizable):
        conjugate_into_real(gens)


def test_chordal_distance_near_infinity_does_not_overflow():
    assert chordal(1e170, INF) < 1e-160
    assert math.isclose(chordal(1e170, 0), 2.0)


def test_chordal_distance_at_infinity():
    assert chordal(INF, INF) == 0
    assert math.isclose(chordal(0, INF), 2.0)
    assert math.isclose(chordal(1, -1), 2 * 2 / 2)
    assert cmath.isclose(MoebiusMap.translation(3)(1j), 3 + 1j)


def test_imaginary_entry_not_realizable():
    gens = [MoebiusMap.from_entries(1, 2, 0, 1), MoebiusMap.from_entries(1, 0, 2j, 1)]
    with pytest.raises(NotRealizable):
        conjugate_into_real(gens)
