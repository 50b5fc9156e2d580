import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.accessory import solve_accessory, trace_vector
from artifact.errors import InvalidConfiguration, PoleTooClose
from artifact.fuchsian_ode import (AccessoryParams, PunctureConfig, RationalQ, build_q, eisenstein_term, kernel,
                                   keyhole, loop_matrix, monodromy, q_from_pieces, transport, wronskian)
from artifact.liouville import act, symm_cocycle, transposition
from artifact.uniformizer import SolvedUniformization

small = st.floats(-2, 2, allow_nan=False)


def test_three_point_q_at_two():
    # E_1(2) + E_2(2) + E_3(2) = -1/8 + 1/4 + 1/4
    q = build_q(PunctureConfig(()))
    assert abs(q(2.0) - 3 / 8) < 1e-15


def test_eisenstein_piece_at_infinity():
    assert abs(eisenstein_term(PunctureConfig(()), 2, 2.0) - 0.25) < 1e-15


def test_kernel_value():
    assert abs(kernel(2.0, 3.0) + 3) < 1e-15


def test_expansion_at_infinity_zero_accessory():
    b = build_q(PunctureConfig((0.3 + 0.2j,))).laurent_at_infinity(2)
    assert abs(b[0]) + abs(b[1]) < 1e-15
    assert abs(b[2] - 0.5) < 1e-15


@settings(max_examples=30, deadline=None)
@given(small, small, small, small)
def test_residue_form_matches_pieces(wr, wi, cr, ci):
    w = complex(wr, wi)
    if min(abs(w), abs(w - 1)) < 0.05:
        return
    cfg = PunctureConfig((w, 3.0 - 1j))
    acc = AccessoryParams((complex(cr, ci), 0.3))
    q = build_q(cfg, acc)
    assert q.residue_form_check() < 1e-12 * (1 + abs(cr) + abs(ci))
    z = 0.37 + 1.91j
    assert abs(q(z) - q_from_pieces(cfg, acc, z)) < 1e-11 * (1 + abs(q(z)))


def test_wrong_accessory_count():
    with pytest.raises(InvalidConfiguration):
        build_q(PunctureConfig((0.3,)), [0.1, 0.2])


def test_coincident_punctures_rejected():
    with pytest.raises(InvalidConfiguration):
        PunctureConfig((1.0,))


def test_transport_free_equation_translates_basis():
    y = transport(RationalQ((), ()), [0, 1])
    # rows (u, u'), columns the solutions 1 and w
    assert np.allclose(y, [[1, 1], [0, 1]], atol=1e-14)


@pytest.fixture(scope="module")
def q4():
    return build_q(PunctureConfig((0.3,)), [0.4 - 0.1j])


def test_contractible_loop_is_trivial(q4):
    c = 4 + 4j
    square = [c + 1, c + 1j, c - 1, c - 1j, c + 1]
    y = transport(q4, square)
    assert np.max(np.abs(y - np.eye(2))) < 1e-10


def test_round_trip_is_identity(q4):
    path = [2j, 0.5 + 0.5j, 1.5 - 0.2j, 0.6 - 0.6j]
    y = transport(q4, path + path[-2::-1])
    assert np.max(np.abs(y - np.eye(2))) < 1e-10


def test_wronskian_is_conserved(q4):
    y = transport(q4, [2j, -1 + 0.5j, 0.15 - 0.4j])
    assert abs(wronskian(y) - 1) < 1e-11


def test_path_through_pole_rejected(q4):
    with pytest.raises(PoleTooClose):
        transport(q4, [-1, 1.5])


def test_loop_around_no_puncture(q4):
    loop = keyhole(3j, 2 + 2j, 0.5)
    assert np.max(np.abs(loop_matrix(q4, loop) - np.eye(2))) < 1e-10


def test_monodromy_unipotent_and_relation_at_any_accessory(q4):
    cfg = PunctureConfig((0.3,))
    rep = monodromy(q4, cfg)
    assert max(rep.trace_defects) < 1e-8
    prod = np.eye(2)
    for m in rep.matrices:
        prod = prod @ m
    assert min(np.max(np.abs(prod - np.eye(2))), np.max(np.abs(prod + np.eye(2)))) < 1e-8


def test_accessory_real_at_real_point(solved4):
    c = solved4.acc.c[0]
    assert abs(c.imag) < 1e-9
    assert solved4.residual < 1e-9
    tv = trace_vector(solved4.monodromy)
    assert np.max(np.abs(np.imag(tv))) < 1e-8


def test_accessory_vanishes_at_symmetric_point():
    rec = solve_accessory(PunctureConfig((0.5,)), AccessoryParams((0.1,)))
    assert abs(rec.c[0]) < 1e-9


def test_accessory_under_reflection(solved4):
    # w -> 1 - w swaps the labels of 0 and 1; the cocycle factor is constant,
    # so the generating-function identity gives c(1 - w) = -c(w)
    perm = transposition(4, 1, 2)
    cfg = PunctureConfig((0.3,))
    image = act(perm, cfg)
    assert abs(image.finite_punctures[0] - 0.7) < 1e-14
    cv = symm_cocycle(perm, cfg)
    assert abs(cv.value - 1) < 1e-12
    other = SolvedUniformization.solve_near(image, solved4)
    assert abs(other.acc.c[0] + solved4.acc.c[0]) < 1e-8
