import numpy as np
import pytest
from numpy.testing import assert_allclose
from PyLBT.solvers import Tensor, ComplexTensor, Adam, no_grad
from PyLBT.solvers.autograd import elu, hypot, concat, conv2d, avg_pool2, upsample2


H = 1e-5


def check_grad(f, *arrays, rng):
    '''Compare backward() with central differences of ``sum(f(*xs) * weights)``.'''
    tensors = [Tensor(np.array(a, dtype=np.float64), requires_grad=True) for a in arrays]
    out = f(*tensors)
    weights = rng.standard_normal(out.shape)
    (out * weights).sum().backward()

    def value():
        with no_grad():
            return (f(*tensors) * weights).sum().item()

    for t in tensors:
        numeric = np.zeros_like(t.data)
        for idx in np.ndindex(t.shape):
            orig = t.data[idx]
            t.data[idx] = orig + H
            plus = value()
            t.data[idx] = orig - H
            minus = value()
            t.data[idx] = orig
            numeric[idx] = (plus - minus) / (2 * H)
        rel = np.abs(t.grad - numeric) / np.maximum(np.maximum(np.abs(t.grad), np.abs(numeric)), 1e-6)
        assert rel.max() < 1e-4


def away_from_zero(rng, shape):
    return rng.uniform(0.2, 1.5, size=shape) * rng.choice([-1, 1], size=shape)


class TestGradients:
    def test_arithmetic(self, rng):
        check_grad(lambda a, b: a * b + a / b - b, rng.standard_normal((3, 4)), rng.uniform(0.5, 2, (3, 4)), rng=rng)
        check_grad(lambda a: -a ** 3 + 2.0 / (a * a + 1), rng.standard_normal((5,)), rng=rng)

    def test_broadcasting(self, rng):
        check_grad(lambda a, b: a * b - b, rng.standard_normal((3, 1)), rng.standard_normal((1, 4)), rng=rng)
        check_grad(lambda a, b: a + b, rng.standard_normal((2, 3, 4)), rng.standard_normal((4,)), rng=rng)

    def test_nonlinearities(self, rng):
        check_grad(lambda a: elu(a), away_from_zero(rng, (4, 5)), rng=rng)
        check_grad(lambda a: a.abs(), away_from_zero(rng, (4, 5)), rng=rng)
        check_grad(lambda a, b: hypot(a, b), rng.standard_normal((3, 3)), rng.standard_normal((3, 3)), rng=rng)

    def test_reductions_and_shapes(self, rng):
        check_grad(lambda a: a.sum(axis=1), rng.standard_normal((3, 4)), rng=rng)
        check_grad(lambda a: a.mean(axis=(0, 2), keepdims=True), rng.standard_normal((2, 3, 4)), rng=rng)
        check_grad(lambda a: a.reshape(4, 3).swapaxes(0, 1), rng.standard_normal((2, 6)), rng=rng)
        check_grad(lambda a: a[1:, ::2] * a[:2, 1::2], rng.standard_normal((3, 4)), rng=rng)
        check_grad(lambda a, b: concat([a, b], axis=1), rng.standard_normal((2, 2)), rng.standard_normal((2, 3)), rng=rng)

    def test_matmul(self, rng):
        check_grad(lambda a, b: a @ b, rng.standard_normal((2, 3, 4)), rng.standard_normal((4, 5)), rng=rng)

    def test_conv2d(self, rng):
        x = rng.standard_normal((2, 3, 4, 6))
        check_grad(lambda x, w, b: conv2d(x, w, b), x, rng.standard_normal((2, 3, 3, 3)), rng.standard_normal(2), rng=rng)
        check_grad(lambda x, w: conv2d(x, w), x, rng.standard_normal((4, 3, 1, 1)), rng=rng)

    def test_resampling(self, rng):
        check_grad(lambda x: avg_pool2(x), rng.standard_normal((1, 2, 4, 6)), rng=rng)
        check_grad(lambda x: upsample2(x), rng.standard_normal((1, 2, 2, 3)), rng=rng)

    def test_shared_node(self):
        x = Tensor([1.0, -2.0], requires_grad=True)
        (x * x + x).sum().backward()
        assert_allclose(x.grad, [3.0, -3.0])


class TestGraph:
    def test_backward_needs_scalar_graph(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with pytest.raises(RuntimeError):
            (x * 2).backward()
        with pytest.raises(RuntimeError):
            Tensor(3.0, requires_grad=True).backward()
        with pytest.raises(RuntimeError):
            (Tensor([1.0]) * 2).sum().backward()

    def test_no_grad(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with no_grad():
            y = (x * 2).sum()
        assert not y.requires_grad
        assert (x * 2).sum().requires_grad

    def test_gradients_accumulate(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        (x * 3).sum().backward()
        (x * 3).sum().backward()
        assert_allclose(x.grad, [6.0, 6.0])

    def test_constants_get_no_grad(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        c = Tensor([5.0, 5.0])
        (x * c).sum().backward()
        assert c.grad is None

    def test_shape_errors(self, rng):
        with pytest.raises(ValueError):
            conv2d(Tensor(rng.standard_normal((1, 2, 4, 4))), Tensor(rng.standard_normal((1, 3, 3, 3))))
        with pytest.raises(ValueError):
            conv2d(Tensor(rng.standard_normal((1, 2, 4, 4))), Tensor(rng.standard_normal((1, 2, 2, 2))))
        with pytest.raises(ValueError):
            avg_pool2(Tensor(rng.standard_normal((1, 1, 3, 4))))
        with pytest.raises(TypeError):
            Tensor([1.0]) ** np.array([2.0, 3.0])


class TestComplexTensor:
    def test_matches_numpy(self, rng):
        a = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        b = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        A, B = ComplexTensor.constant(a), ComplexTensor.constant(b)
        assert_allclose((A * B).numpy(), a * b)
        assert_allclose((A - b).numpy(), a - b)
        assert_allclose((1.0 - A).numpy(), 1.0 - a)
        assert_allclose(abs(A).numpy(), np.abs(a))
        assert_allclose(A[1].numpy(), a[1])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            ComplexTensor(np.zeros(3), np.zeros(4))


class TestAdam:
    def test_converges_on_quadratic(self, rng):
        target = rng.uniform(-1, 1, size=5)
        w = Tensor(np.zeros(5), requires_grad=True)
        opt = Adam({'w': w}, lr=0.05)
        for _ in range(1000):
            opt.zero_grad()
            ((w - target) ** 2).sum().backward()
            opt.step()
        assert_allclose(w.data, target, atol=1e-2)
        assert opt.t == 1000

    def test_skips_params_without_grad(self):
        a = Tensor([1.0], requires_grad=True)
        b = Tensor([1.0], requires_grad=True)
        opt = Adam({'a': a, 'b': b}, lr=0.1)
        (a * 2).sum().backward()
        opt.step()
        assert a.data[0] == pytest.approx(0.9)
        assert b.data[0] == 1.0

    def test_state_dict(self):
        w = Tensor([1.0, 2.0], requires_grad=True)
        opt = Adam({'w': w}, lr=0.01)
        (w * w).sum().backward()
        opt.step()
        state = opt.state_dict()
        assert set(state) == {'t', 'lr', 'betas', 'eps', 'm/w', 'v/w'}

        fresh = Adam({'w': w})
        fresh.load_state_dict(state)
        assert fresh.t == 1 and fresh.lr == 0.01
        assert_allclose(fresh.m['w'], opt.m['w'])
        assert_allclose(fresh.v['w'], opt.v['w'])
