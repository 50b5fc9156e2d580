import numpy as np
import pytest

from artifact.fuchsian_ode import PunctureConfig
from artifact.grams import (TZ_CONTROL, epair_matrix, node_data, petersson_dual, project_schwarzian,
                            projection_from_parts, tz_gram, wp_from_petersson, wp_gram)
from artifact.groupsum import realize_fuchsian
from artifact.quadrature import QuadControl
from artifact.uniformizer import SolvedUniformization


@pytest.fixture(scope="module")
def dual4(solved4):
    return petersson_dual(solved4)


@pytest.fixture(scope="module")
def solved5():
    return SolvedUniformization.solve(PunctureConfig((0.4 + 0.6j, -0.5 + 0.3j)))


@pytest.fixture(scope="module")
def dual5(solved5):
    return petersson_dual(solved5)


def test_petersson_one_by_one_positive(dual4):
    p = dual4.P
    assert p.shape == (1, 1)
    assert p[0, 0].real > 0 and abs(p[0, 0].imag) < 1e-12 * p[0, 0].real


def test_biorthogonality_on_independent_rule(solved4, dual4):
    other = node_data(solved4, QuadControl(n_radial=40, n_theta=56, cell_order=10))
    assert np.max(np.abs(dual4.biorthogonality(other) - np.eye(1))) < 1e-4


def test_wp_matches_inverse_petersson(dual4):
    assert np.max(np.abs(wp_gram(dual4) - wp_from_petersson(dual4))) < 1e-4 * abs(wp_gram(dual4)[0, 0])


def test_two_dimensional_grams_hermitian_positive(solved5, dual5):
    p, wp = dual5.P, wp_gram(dual5)
    for m in (p, wp):
        assert m.shape == (2, 2)
        assert np.max(np.abs(m - m.conj().T)) < 1e-8
        np.linalg.cholesky(0.5 * (m + m.conj().T))
    assert np.max(np.abs(dual5.biorthogonality(node_data(solved5, QuadControl().refined())) - np.eye(2))) < 1e-4
    assert np.max(np.abs(wp - wp_from_petersson(dual5))) < 1e-4 * np.max(np.abs(wp))


def test_epairs_real_for_real_configuration(solved4, dual4):
    pairs = epair_matrix(solved4, dual4)
    assert pairs.shape == (4, 1)
    assert np.all(np.isfinite(pairs))
    assert np.max(np.abs(pairs.imag)) < 1e-8 * np.max(np.abs(pairs))


def test_schwarzian_projection_matches_decomposition(solved4, dual4):
    alpha = project_schwarzian(solved4, dual4)
    assert np.max(np.abs(alpha - projection_from_parts(solved4, dual4))) < 1e-4 * np.max(np.abs(alpha))
    assert np.max(np.abs(alpha.imag)) < 1e-8 * np.max(np.abs(alpha))


def test_schwarzian_projection_decomposition_two_dimensional(solved5, dual5):
    alpha = project_schwarzian(solved5, dual5)
    assert np.max(np.abs(alpha - projection_from_parts(solved5, dual5))) < 1e-4 * np.max(np.abs(alpha))


def test_tz_grams_positive_and_dominated_by_sum(solved4, dual4):
    g = realize_fuchsian(solved4)
    data = node_data(solved4, TZ_CONTROL)
    grams = [tz_gram(solved4, g, dual4, i, data, c_max=40.0) for i in (0, 3)]
    total = sum(r.gram for r in grams)
    for r in grams:
        m = r.gram
        assert np.max(np.abs(m - m.conj().T)) < 1e-8 * abs(m[0, 0])
        assert m[0, 0].real > 0
        assert total[0, 0].real >= m[0, 0].real
        assert r.tail < 1e-2 * m[0, 0].real
