import numpy as np
import pytest
from scipy.spatial.transform import Rotation as ScipyRotation

from cara import _numpy_kernels, kernels, so3


def random_batch(m, seed, max_angle=np.pi - 1e-3):
    rng = np.random.default_rng(seed)
    vs = rng.standard_normal((m, 3))
    norms = np.linalg.norm(vs, axis=1, keepdims=True)
    scale = rng.uniform(0, max_angle, (m, 1))
    return vs / norms * scale


@pytest.fixture(params=["numpy", "active"])
def impl(request):
    return _numpy_kernels if request.param == "numpy" else kernels


def test_batch_exp_matches_scalar(impl):
    vs = random_batch(500, 0)
    out = impl.batch_exp(vs)
    for v, R in zip(vs[:50], out[:50]):
        np.testing.assert_allclose(R, so3.exp_map(v), atol=1e-14)


def test_batch_log_matches_scipy(impl):
    vs = random_batch(500, 1)
    Rs = ScipyRotation.from_rotvec(vs).as_matrix()
    np.testing.assert_allclose(impl.batch_log(Rs), vs, atol=1e-9)


def test_batch_log_near_pi(impl):
    rng = np.random.default_rng(2)
    axes = rng.standard_normal((200, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    vs = axes * (np.pi - 1e-5)
    Rs = ScipyRotation.from_rotvec(vs).as_matrix()
    np.testing.assert_allclose(impl.batch_log(Rs), vs, atol=1e-7)


def test_edge_residuals_definition(impl):
    rng = np.random.default_rng(3)
    m = 100
    Ri = np.stack([so3.random_rotation(rng) for _ in range(m)])
    Rj = np.stack([so3.random_rotation(rng) for _ in range(m)])
    Rij = np.stack([so3.random_rotation(rng) for _ in range(m)])
    res = impl.edge_residuals(Ri, Rj, Rij)
    for k in range(0, m, 7):
        expected = so3.log_map(Rj[k].T @ Rij[k] @ Ri[k])
        np.testing.assert_allclose(res[k], expected, atol=1e-12)


def test_backends_agree():
    if kernels.BACKEND != "compiled":
        pytest.skip("compiled backend not built")
    vs = random_batch(1000, 4)
    Rs = _numpy_kernels.batch_exp(vs)
    np.testing.assert_allclose(kernels.batch_exp(vs), Rs, atol=1e-15)
    np.testing.assert_allclose(kernels.batch_log(Rs),
                               _numpy_kernels.batch_log(Rs), atol=1e-14)
    np.testing.assert_allclose(kernels.batch_quat(Rs),
                               _numpy_kernels.batch_quat(Rs), atol=1e-14)


def test_empty_batch(impl):
    assert impl.batch_exp(np.zeros((0, 3))).shape == (0, 3, 3)
    assert impl.batch_log(np.zeros((0, 3, 3))).shape == (0, 3)
