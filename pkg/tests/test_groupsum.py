import math

import numpy as np
import pytest

from artifact.errors import TailTooLarge
from artifact.groupsum import (CosetTable, EisensteinEvaluator, coset_sum, eisenstein, lattice_sum, level2_oracle,
                               realize_fuchsian, reduced_words)


def _act(m, z):
    a, b, c, d = np.asarray(m).ravel()
    return (a * z + b) / (c * z + d)


@pytest.fixture(scope="module")
def group4(solved4):
    return realize_fuchsian(solved4)


@pytest.fixture(scope="module")
def eis0(group4):
    return EisensteinEvaluator(group4, 0)


@pytest.fixture(scope="module")
def high_points(group4):
    # one point in each of three cusp neighborhoods
    s = group4.sigmas
    return np.array([_act(s[0], 0.2 + 1.2j), _act(s[3], 0.3 + 1.1j), _act(s[1], -0.4 + 1.5j)])


def test_relation_and_real_distinct_fixed_points(group4):
    assert group4.relation_residual < 1e-8
    fx = group4.fixed_points
    assert fx[1:] == [0.0, 1.0, math.inf]
    assert all(isinstance(p, float) or np.isreal(p) for p in fx)
    assert len(set(fx)) == len(fx)
    assert group4.conjugation_defect() < 1e-9
    for gen in group4.generators:
        assert np.isrealobj(gen)
        assert abs(abs(np.trace(gen)) - 2) < 1e-8


def test_level_two_trace_spectrum(solved3):
    g = realize_fuchsian(solved3)
    oracle = np.sort(np.abs([np.trace(m) for _, m in reduced_words(level2_oracle(), 3)]))
    ours = g.trace_spectrum(3)
    assert len(ours) == len(oracle)
    assert np.max(np.abs(ours - oracle)) < 1e-8


def test_reduced_word_count():
    # free group of rank 2: 4 * 3^(k-1) reduced words of length k
    assert len(list(reduced_words(level2_oracle(), 3))) == 4 + 12 + 36


def test_lattice_sum_closed_form():
    x, y = 0.23, 0.7
    k = np.arange(-20000, 20001)
    direct = np.sum(1 / ((x + k) ** 2 + y**2) ** 2)
    assert abs(lattice_sum(x, y) - direct) < 1e-11


def test_automorphy(group4, eis0, high_points):
    v, tail = eisenstein(group4, 0, high_points, evaluator=eis0, bound=1.0)
    for s in group4.generators:
        v2, t2 = eisenstein(group4, 0, _act(s, high_points), evaluator=eis0, bound=1.0)
        assert np.all(np.abs(v2 - v) < 2 * tail)


def test_identity_coset_dominates_at_own_cusp(group4, eis0):
    devs = []
    for y in (2.0, 5.0, 20.0):
        v, _ = eisenstein(group4, 0, np.array([_act(group4.sigmas[0], 1j * y)]), evaluator=eis0, bound=1.0)
        devs.append(abs(v[0] / y**2 - 1))
    assert devs[0] > devs[1] > devs[2]
    assert devs[2] < 1e-5


def test_partial_sums_increase_with_word_length(group4, high_points):
    sums = [coset_sum(CosetTable.build(group4, 0, L), high_points)[0] for L in (6, 7, 8)]
    assert np.all(sums[1] >= sums[0]) and np.all(sums[2] >= sums[1])
    assert not CosetTable.build(group4, 0, 6).has_duplicates()


def test_double_coset_agrees_with_long_coset_sum(group4, eis0, high_points):
    v, _ = eisenstein(group4, 0, high_points[:1], evaluator=eis0, bound=1.0)
    c, _ = coset_sum(CosetTable.build(group4, 0, 8), high_points[:1])
    assert abs(v[0] - c[0]) < 1e-4 * v[0]


def test_tail_bound_enforced(group4, eis0):
    low = np.array([_act(group4.sigmas[3], 0.3 + 1.1j)])
    with pytest.raises(TailTooLarge):
        eisenstein(group4, 0, low, evaluator=eis0)


def test_word_length_bound_minimum(group4, eis0, high_points):
    with pytest.raises(ValueError):
        eisenstein(group4, 0, high_points, L=5, evaluator=eis0)
