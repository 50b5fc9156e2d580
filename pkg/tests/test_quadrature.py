import math

import numpy as np
import pytest

from artifact.errors import NonIntegrableDeclared
from artifact.fuchsian_ode import PunctureConfig
from artifact.quadrature import QuadControl, annulus_rule, build_plane_rule, quad_plane

CFG = PunctureConfig((0.3,))


def test_ring_integral():
    value, err = quad_plane(lambda w: 1 / np.abs(w) ** 2, CFG, support=(0j, 1.0, 2.0))
    assert abs(value - 2 * math.pi * math.log(2)) < 1e-10
    assert err < 1e-10


def test_annulus_rule_area():
    _, wts, _ = annulus_rule(0.5 + 0.5j, 0.2, 0.9)
    assert abs(wts.sum() - math.pi * (0.9**2 - 0.2**2)) < 1e-12


def test_gaussian_over_plane():
    value, err = quad_plane(lambda w: np.exp(-np.abs(w) ** 2), CFG)
    assert abs(value - math.pi) < 1e-9
    assert err < 1e-8


def test_log_squared_singularity_converges():
    # integrable log^2 singularities at every finite puncture
    def f(w):
        out = np.exp(-np.abs(w) ** 2)
        for p in CFG.points:
            out = out * (1 + np.log(np.abs(w - p)) ** 2)
        return out
    sing = {i: "log2" for i in range(3)}
    coarse, _ = quad_plane(f, CFG, QuadControl(), singular=sing)
    fine, _ = quad_plane(f, CFG, QuadControl().refined().refined(), singular=sing)
    assert abs(coarse - fine) < 1e-7 * abs(fine)


def test_conjugation_even_integrand_is_real():
    value, err = quad_plane(lambda w: np.exp(-np.abs(w - 0.5) ** 2) * w**2, CFG)
    assert abs(value.imag) <= max(err, 1e-12)


@pytest.mark.parametrize("key,cls", [(0, "log2_r2"), ("inf", "r-2"), (1, "nonsense")])
def test_non_integrable_declarations(key, cls):
    with pytest.raises(NonIntegrableDeclared):
        quad_plane(lambda w: np.ones_like(w), CFG, singular={key: cls})


def test_partition_of_unity_weights_are_positive():
    rule = build_plane_rule(CFG)
    assert np.all(rule.weights >= 0) and np.all(np.isfinite(rule.weights))
    assert set(np.unique(rule.region)) <= {-1, 0, 1, 2, 3}
