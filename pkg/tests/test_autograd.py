import zlib

import numpy as np
import pytest

from liesym import autograd as ad

from gradcheck import max_rel_error

TOL = 1e-4
POINTS = 10


def _project(out, rng):
    """Reduce an op output to a real scalar with fixed random weights."""
    w = rng.standard_normal(out.shape)
    if np.iscomplexobj(out.value):
        return ad.sum_(ad.real(out) * w) + ad.sum_(ad.imag(out) * w[::-1])
    return ad.sum_(out * w)


def _case(name, rng):
    """(builder, inputs) for one random point of a registered op."""
    m = rng.standard_normal
    pos = lambda *s: rng.uniform(0.5, 2.0, s)
    cases = {
        "add": (lambda a, b: a + b, [m((3, 4)), m((4,))]),
        "sub": (lambda a, b: a - b, [m((3, 4)), m((3, 1))]),
        "neg": (lambda a: -a, [m((5,))]),
        "mul": (lambda a, b: a * b, [m((3, 4)), m((3, 4)) + 1j * m((3, 4))]),
        "div": (lambda a, b: a / b, [m((3, 4)), pos(3, 4)]),
        "matmul": (lambda a, b: a @ b, [m((2, 3, 4)), m((4, 2)) + 1j * m((4, 2))]),
        "sum": (lambda a: ad.sum_(a, axis=1), [m((3, 4))]),
        "mean": (lambda a: ad.mean(a, axis=0), [m((3, 4))]),
        "exp": (ad.exp, [m((4,))]),
        "log": (ad.log, [pos(4)]),
        "sqrt": (ad.sqrt, [pos(4)]),
        "abs": (ad.abs_, [m((6,)) + np.sign(m((6,))) * 0.1]),
        "real": (ad.real, [m((3,)) + 1j * m((3,))]),
        "imag": (ad.imag, [m((3,)) + 1j * m((3,))]),
        "sigmoid": (ad.sigmoid, [3 * m((5,))]),
        "leaky_relu": (ad.leaky_relu, [m((6,)) + np.sign(m((6,))) * 0.1]),
        "mat_exp": (ad.mat_exp, [m((2, 3, 3))]),
        "cosine_sim": (ad.cosine_sim, [m((4, 5)), m((4, 5))]),
    }
    return cases[name]


def test_every_op_has_a_case():
    rng = np.random.default_rng(0)
    for name in ad.REGISTRY:
        _case(name, rng)


@pytest.mark.parametrize("name", sorted(ad.REGISTRY))
def test_registered_op_gradients(name):
    rng = np.random.default_rng(zlib.crc32(name.encode()))
    for _ in range(POINTS):
        op, inputs = _case(name, rng)
        wrng = np.random.default_rng(int(rng.integers(1 << 30)))
        seed = int(wrng.integers(1 << 30))
        build = lambda *vs: _project(op(*vs), np.random.default_rng(seed))
        assert max_rel_error(build, inputs) <= TOL, name


def test_complex_mat_exp_gradient():
    rng = np.random.default_rng(4)
    for _ in range(POINTS):
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        build = lambda v: _project(ad.mat_exp(v), np.random.default_rng(1))
        assert max_rel_error(build, [a]) <= TOL


def test_structural_ops_gradients():
    rng = np.random.default_rng(9)
    a, b = rng.standard_normal((3, 4)), rng.standard_normal((3, 2))
    cases = [
        (lambda x, y: _project(ad.concat([x, y]), np.random.default_rng(0)), [a, b]),
        (lambda x: _project(ad.reshape(x, (4, 3)), np.random.default_rng(0)), [a]),
        (lambda x: _project(ad.transpose(x), np.random.default_rng(0)), [a]),
        (lambda x: _project(x[1], np.random.default_rng(0)), [a]),
        (lambda x: _project(ad.take_rows(x, [0, 2, 2]), np.random.default_rng(0)), [a]),
        (lambda x: _project(ad.clip(x, -0.5, 0.5), np.random.default_rng(0)), [a]),
    ]
    for build, inputs in cases:
        assert max_rel_error(build, inputs) <= TOL


def test_shared_subexpression_accumulates():
    x = ad.param(np.array([1.5, -2.0]))
    y = x * x + x
    ad.sum_(y).backward()
    np.testing.assert_allclose(x.grad, 2 * x.value + 1)


def test_backward_needs_scalar():
    x = ad.param(np.ones(3))
    with pytest.raises(ValueError):
        (x * 2).backward()
