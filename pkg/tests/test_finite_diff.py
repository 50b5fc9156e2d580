import numpy as np
import pytest

from artifact.errors import StencilOutOfDomain
from artifact.finite_diff import Memo, mixed_hessian, richardson_error, wirtinger


def test_wirtinger_of_holomorphic_square():
    # Re(w^2) = (w^2 + conj(w)^2) / 2 has d/dw = w
    w = (1 + 1j,)
    d = wirtinger(lambda v: (v[0] ** 2).real, w, step=1e-3)
    assert abs(d[0] - w[0]) < 1e-9


def test_wirtinger_second_order_stencil():
    w = (0.4 + 0.7j,)
    d = wirtinger(lambda v: abs(v[0]) ** 2, w, step=1e-4, points=2)
    assert abs(d[0] - w[0].conjugate()) < 1e-7


def test_wirtinger_rejects_unknown_order():
    with pytest.raises(ValueError):
        wirtinger(lambda v: 0.0, (0.4 + 0.7j,), points=3)


def test_mixed_hessian_of_modulus_squared():
    w = (0.3 + 0.4j, -0.6 + 0.9j)
    f = lambda v: abs(v[0]) ** 2 + 3 * abs(v[1]) ** 2 + 2 * (v[0] * v[1].conjugate()).real
    h = mixed_hessian(f, w)
    # d_j dbar_k of sum a_jk w_j conj(w_k) + c.c. parts
    assert np.max(np.abs(h - np.array([[1, 1], [1, 3]]))) < 1e-9


def test_richardson_improves_accuracy():
    w = (0.3 + 0.4j,)
    f = lambda v: np.exp((v[0] * v[0].conjugate()).real)
    exact = np.exp(abs(w[0]) ** 2) * (1 + abs(w[0]) ** 2)
    plain = abs(mixed_hessian(f, w, 0.02, richardson=False)[0, 0] - exact)
    extrap = abs(mixed_hessian(f, w, 0.02)[0, 0] - exact)
    assert extrap * 4 < plain
    assert richardson_error(f, w) < 1e-5


def test_array_valued_hessian_shape():
    w = (0.3 + 0.4j,)
    h = mixed_hessian(lambda v: np.array([abs(v[0]) ** 2, 2 * abs(v[0]) ** 2]), w)
    assert h.shape == (1, 1, 2)
    assert np.max(np.abs(h[0, 0] - [1, 2])) < 1e-9


def test_stencil_too_close_to_a_puncture():
    with pytest.raises(StencilOutOfDomain):
        mixed_hessian(lambda v: 0.0, (1e-3 + 0j,), step=0.02)
    with pytest.raises(StencilOutOfDomain):
        wirtinger(lambda v: 0.0, (0.99 + 0j,), step=0.01)


def test_memo_shares_stencil_points():
    calls = []
    f = Memo(lambda v: calls.append(v) or abs(v[0]) ** 2)
    w = (0.3 + 0.4j,)
    mixed_hessian(f, w, richardson=False)
    first = len(calls)
    mixed_hessian(f, w, richardson=False)
    assert len(calls) == first
    assert first == 9  # centre, four axial and four diagonal nodes
