import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ceids import nn
from ceids.errors import ArityMismatchError, BadConfigError, BadTopologyError

FD_STEP = 1e-5
FD_REL_TOL = 1e-4
FD_FLOOR = 1e-10  # guards entries where both gradients are exactly zero


def finite_difference(net, x, t, kind, h=FD_STEP):
    """Central differences of the mean batch loss, one parameter at a time."""
    out = []
    for p in (p for wb in zip(net.weights, net.biases) for p in wb):
        for i in np.ndindex(p.shape):
            old = p[i]
            p[i] = old + h
            up = nn.loss(nn.predict_proba(net, x), t, kind)
            p[i] = old - h
            down = nn.loss(nn.predict_proba(net, x), t, kind)
            p[i] = old
            out.append((up - down) / (2 * h))
    return np.array(out)


def relative_error(a, b):
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), FD_FLOOR)


def random_problem(rng, kind):
    """Random net no larger than [10, 8, 6, 4] with a one-hot target batch."""
    depth = int(rng.integers(1, 4))
    sizes = [int(rng.integers(1, 11))] + [int(rng.integers(2, s + 1)) for s in (8, 6, 4)[:depth]]
    hidden = [str(rng.choice(["sigmoid", "tanh", "identity"])) for _ in sizes[1:-1]]
    out_act = "sigmoid" if kind == "cross_entropy" else str(rng.choice(["sigmoid", "tanh", "identity"]))
    net = nn.init_network(sizes, hidden + [out_act], int(rng.integers(2**31)))
    for b in net.biases:
        b += rng.normal(scale=0.1, size=b.shape)
    x = rng.uniform(size=(int(rng.integers(1, 9)), sizes[0]))
    t = np.eye(sizes[-1])[rng.integers(0, sizes[-1], x.shape[0])]
    return net, x, t


def hand_forward(net, p):
    """Row-by-row recomputation with plain Python loops."""
    f = {"sigmoid": lambda z: 1 / (1 + math.exp(-z)), "tanh": math.tanh,
         "relu": lambda z: max(z, 0.0), "identity": lambda z: z}
    a = [float(v) for v in p]
    for w, b, kind in zip(net.weights, net.biases, net.activations):
        a = [f[kind](sum(w[i][j] * a[j] for j in range(len(a))) + b[i]) for i in range(len(b))]
    return a


class TestInit:
    def test_shape_contract(self):
        net = nn.init_network([2, 1], "sigmoid", seed=4)
        assert net.weights[0].shape == (1, 2)
        np.testing.assert_array_equal(net.biases[0], [0.0])

    def test_deterministic(self):
        a = nn.init_network([5, 4, 3], "tanh", 9).flat()
        b = nn.init_network([5, 4, 3], "tanh", 9).flat()
        assert a.tobytes() == b.tobytes()

    def test_deep_topology(self):
        net = nn.init_network([25, 25, 15, 15, 25, 15, 10, 5], "sigmoid", 0)
        assert [w.shape for w in net.weights] == [
            (25, 25), (15, 25), (15, 15), (25, 15), (15, 25), (10, 15), (5, 10)]
        assert net.layer_sizes == [25, 25, 15, 15, 25, 15, 10, 5]

    def test_weight_bound(self):
        net = nn.init_network([30, 10], "sigmoid", 1)
        assert np.abs(net.weights[0]).max() <= math.sqrt(6 / 40)

    @pytest.mark.parametrize("sizes", [[3], [3, 0], [2, -1, 2]])
    def test_bad_topology(self, sizes):
        with pytest.raises(BadTopologyError):
            nn.init_network(sizes, "sigmoid", 0)

    def test_activation_count(self):
        with pytest.raises(BadTopologyError):
            nn.init_network([2, 2, 2], ("sigmoid",), 0)


class TestForward:
    def test_identity_unit(self):
        net = nn.NetworkParams([np.array([[1.0]])], [np.array([0.0])], ("identity",))
        assert nn.forward(net, [2.0])[-1].tolist() == [2.0]

    def test_zero_sigmoid(self):
        net = nn.NetworkParams([np.zeros((3, 4))], [np.zeros(3)], ("sigmoid",))
        np.testing.assert_array_equal(nn.forward(net, [5, -1, 2, 9])[-1], [0.5, 0.5, 0.5])

    @pytest.mark.parametrize("seed", range(5))
    def test_hand_rolled_oracle(self, seed):
        rng = np.random.default_rng(seed)
        net = nn.init_network([6, 5, 4, 3], ["tanh", "relu", "sigmoid"], seed)
        for b in net.biases:
            b += rng.normal(size=b.shape)
        p = rng.normal(size=6)
        np.testing.assert_allclose(nn.forward(net, p)[-1], hand_forward(net, p), rtol=0, atol=1e-12)

    def test_layer_list(self):
        net = nn.init_network([4, 3, 2], "sigmoid", 0)
        acts = nn.forward(net, np.ones((7, 4)))
        assert [a.shape for a in acts] == [(7, 3), (7, 2)]

    def test_arity(self):
        with pytest.raises(ArityMismatchError):
            nn.forward(nn.init_network([4, 2], "sigmoid", 0), [1.0, 2.0])

    def test_pure(self):
        net = nn.init_network([4, 3, 2], "sigmoid", 0)
        before = net.flat().copy()
        nn.forward(net, np.ones(4))
        nn.predict_proba(net, np.ones(4))
        assert net.flat().tobytes() == before.tobytes()


class TestLoss:
    def test_equal(self):
        assert nn.loss([0.2, 0.8], [0.2, 0.8]) == 0.0

    def test_half(self):
        assert nn.loss([0.5, 0.5], [1.0, 0.0]) == 0.5

    def test_ce_limit(self):
        eps = nn.CE_EPS
        assert nn.loss([1 - eps, eps], [1.0, 0.0], "cross_entropy") == pytest.approx(0.0, abs=1e-11)

    def test_ce_value(self):
        assert nn.loss([0.25, 0.75], [0.0, 1.0], "cross_entropy") == pytest.approx(-math.log(0.75))

    def test_batch_mean(self):
        assert nn.loss([[0.0], [1.0]], [[1.0], [1.0]]) == 0.5

    def test_shape_mismatch(self):
        with pytest.raises(ArityMismatchError):
            nn.loss([0.5], [1.0, 0.0])


class TestBackward:
    def test_zero_error(self):
        net = nn.init_network([3, 4, 2], ["tanh", "identity"], 1)
        x = np.random.default_rng(0).normal(size=(5, 3))
        g = nn.backward(net, x, nn.predict_proba(net, x), "mse")
        assert np.all(g.flat() == 0.0)

    def test_single_sigmoid_neuron(self):
        net = nn.NetworkParams([np.zeros((1, 1))], [np.zeros(1)], ("sigmoid",))
        g = nn.backward(net, [[1.0]], [[1.0]], "mse")
        assert g.weights[0][0, 0] == pytest.approx(-0.25, abs=1e-15)
        assert g.biases[0][0] == pytest.approx(-0.25, abs=1e-15)

    @pytest.mark.parametrize("kind", nn.LOSSES)
    @pytest.mark.parametrize("seed", range(6))
    def test_finite_differences(self, kind, seed):
        net, x, t = random_problem(np.random.default_rng(seed), kind)
        analytic = nn.backward(net, x, t, kind).flat()
        assert relative_error(analytic, finite_difference(net, x, t, kind)).max() < FD_REL_TOL

    def test_gradient_shapes_mirror_params(self):
        net = nn.init_network([4, 3, 2], "sigmoid", 0)
        g = nn.backward(net, np.ones((2, 4)), np.ones((2, 2)))
        assert [a.shape for a in g.weights] == [w.shape for w in net.weights]
        assert [a.shape for a in g.biases] == [b.shape for b in net.biases]

    def test_target_arity(self):
        net = nn.init_network([4, 2], "sigmoid", 0)
        with pytest.raises(ArityMismatchError):
            nn.backward(net, np.ones((2, 4)), np.ones((2, 3)))


class TestTrain:
    def test_zero_epochs(self):
        net = nn.init_network([3, 2], "sigmoid", 0)
        res = nn.train(net, np.ones((4, 3)), np.ones((4, 2)), nn.TrainConfig(epochs=0))
        assert res.history == []
        assert res.net.flat().tobytes() == net.flat().tobytes()

    def test_full_batch_step_is_gradient_step(self):
        rng = np.random.default_rng(3)
        net = nn.init_network([3, 4, 2], "sigmoid", 3)
        x, t = rng.uniform(size=(6, 3)), rng.uniform(size=(6, 2))
        g = nn.backward(net, x, t).flat()
        res = nn.train(net, x, t, nn.TrainConfig(learning_rate=0.3, epochs=1, batch_size=6))
        np.testing.assert_allclose(res.net.flat(), net.flat() - 0.3 * g, rtol=0, atol=1e-15)

    def test_does_not_modify_input(self):
        net = nn.init_network([2, 2], "sigmoid", 0)
        before = net.flat().copy()
        nn.train(net, np.ones((3, 2)), np.zeros((3, 2)), nn.TrainConfig(epochs=2))
        np.testing.assert_array_equal(net.flat(), before)

    def test_history_length_and_finite(self):
        net = nn.init_network([3, 2], "sigmoid", 0)
        res = nn.train(net, np.ones((10, 3)), np.zeros((10, 2)), nn.TrainConfig(epochs=7, batch_size=3))
        assert len(res.history) == 7
        assert all(math.isfinite(v) for v in res.history)

    def test_deterministic(self):
        rng = np.random.default_rng(1)
        x, t = rng.uniform(size=(20, 3)), rng.uniform(size=(20, 2))
        net = nn.init_network([3, 4, 2], "sigmoid", 2)
        cfg = nn.TrainConfig(learning_rate=0.5, epochs=5, batch_size=3, seed=8)
        assert nn.train(net, x, t, cfg).net.flat().tobytes() == nn.train(net, x, t, cfg).net.flat().tobytes()

    def test_xor(self):
        x = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
        t = np.array([[0], [1], [1], [0]], dtype=float)
        net = nn.init_network([2, 4, 1], "sigmoid", 0)
        res = nn.train(net, x, t, nn.TrainConfig(learning_rate=0.5, epochs=5000, batch_size=4))
        assert nn.loss(nn.predict_proba(res.net, x), t) < 0.05

    @pytest.mark.parametrize("field,value", [("learning_rate", 0.0), ("batch_size", 0),
                                             ("epochs", -1), ("loss", "hinge")])
    def test_bad_config(self, field, value):
        cfg = nn.TrainConfig(**{field: value})
        with pytest.raises(BadConfigError):
            nn.train(nn.init_network([2, 2], "sigmoid", 0), np.ones((2, 2)), np.ones((2, 2)), cfg)


class TestPredictProba:
    def test_five_sigmoid_scores(self):
        net = nn.init_network([25, 10, 5], "sigmoid", 0)
        s = nn.predict_proba(net, np.random.default_rng(0).uniform(size=25))
        assert s.shape == (5,)
        assert np.all((s > 0) & (s < 1))

    def test_repeatable(self):
        net = nn.init_network([4, 3], "tanh", 1)
        v = np.arange(4.0)
        assert nn.predict_proba(net, v).tobytes() == nn.predict_proba(net, v).tobytes()

    def test_memorizes_ten_points(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(size=(10, 25))
        labels = np.arange(10) % 5
        t = np.eye(5)[labels]
        net = nn.init_network([25, 20, 5], "sigmoid", 5)
        res = nn.train(net, x, t, nn.TrainConfig(learning_rate=2.0, epochs=3000, batch_size=10))
        np.testing.assert_array_equal(np.argmax(nn.predict_proba(res.net, x), axis=1), labels)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from(nn.LOSSES))
def test_gradient_property(seed, kind):
    net, x, t = random_problem(np.random.default_rng(seed), kind)
    analytic = nn.backward(net, x, t, kind).flat()
    assert relative_error(analytic, finite_difference(net, x, t, kind)).max() < FD_REL_TOL
