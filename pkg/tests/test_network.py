"""Tests for the from-scratch sigmoid MLP: forward, loss, gradients,
training loop, and the weight file format."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from varsel.exceptions import ConfigInvalid, DimensionMismatch, FormatError, NonFiniteLoss
from varsel.network import (
    MlpParams,
    TrainConfig,
    backprop,
    bce_loss,
    forward,
    init_params,
    load_weights,
    loss_trend_ok,
    save_weights,
    sigmoid,
    train,
)

SIGMOID_2 = 0.8807970779778823
CHAIN_AT_0 = 0.6224593312018546  # sigmoid(sigmoid(0)) for a 1-1-1 net with w=1, b=0


def small_params(seed=0, dims=(3, 4, 2)):
    return init_params(dims, np.random.default_rng(seed))


def numeric_gradient(params, x, target, h=1e-6):
    """Central finite differences of the loss in every parameter."""
    grad_w = [np.zeros_like(w) for w in params.weights]
    grad_b = [np.zeros_like(b) for b in params.biases]
    for l in range(params.n_layers):
        for arr, grad in ((params.weights[l], grad_w[l]), (params.biases[l], grad_b[l])):
            flat = arr.reshape(-1)
            gflat = grad.reshape(-1)
            for i in range(flat.size):
                keep = flat[i]
                flat[i] = keep + h
                up = bce_loss(forward(params, x)[0], target)
                flat[i] = keep - h
                down = bce_loss(forward(params, x)[0], target)
                flat[i] = keep
                gflat[i] = (up - down) / (2.0 * h)
    return grad_w, grad_b


class TestSigmoid:
    def test_midpoint(self):
        assert sigmoid(0.0) == 0.5

    def test_reference_value(self):
        assert_allclose(sigmoid(2.0), SIGMOID_2, rtol=0, atol=0)

    def test_extreme_arguments_stay_in_range(self):
        assert sigmoid(800.0) == 1.0
        assert sigmoid(-800.0) == 0.0
        big = sigmoid(np.array([-1e300, 1e300]))
        assert big[0] == 0.0 and big[1] == 1.0

    def test_scalar_in_scalar_out(self):
        assert isinstance(sigmoid(0.3), float)

    def test_shape_preserved(self):
        z = np.arange(6.0).reshape(2, 3)
        assert sigmoid(z).shape == (2, 3)

    @given(st.floats(min_value=-30, max_value=30))
    @settings(max_examples=50, deadline=None)
    def test_symmetry(self, z):
        assert_allclose(sigmoid(-z), 1.0 - sigmoid(z), rtol=0, atol=1e-15)

    def test_monotone(self):
        z = np.linspace(-20, 20, 501)
        assert np.all(np.diff(sigmoid(z)) > 0)


class TestForward:
    def test_zero_net_outputs_half(self):
        p = MlpParams((3, 5, 3), [np.zeros((5, 3)), np.zeros((3, 5))],
                      [np.zeros(5), np.zeros(3)])
        out, cache = forward(p, np.zeros(3))
        assert_array_equal(out, 0.5 * np.ones(3))
        assert len(cache) == 3  # input plus one entry per layer

    def test_two_layer_chain_value(self):
        p = MlpParams((1, 1, 1), [np.array([[1.0]]), np.array([[1.0]])],
                      [np.zeros(1), np.zeros(1)])
        out, _ = forward(p, np.array([0.0]))
        assert_allclose(out[0], CHAIN_AT_0, rtol=0, atol=0)

    def test_batch_matches_rowwise(self):
        p = small_params(3)
        x = np.random.default_rng(4).normal(size=(7, 3))
        batch_out, _ = forward(p, x)
        for i in range(7):
            row_out, _ = forward(p, x[i])
            assert_allclose(batch_out[i], row_out, rtol=1e-14, atol=0)

    def test_outputs_strictly_inside_unit_interval(self):
        p = small_params(9)
        out, _ = forward(p, np.random.default_rng(2).normal(size=(50, 3)))
        assert np.all(out > 0.0) and np.all(out < 1.0)

    def test_width_mismatch(self):
        with pytest.raises(DimensionMismatch):
            forward(small_params(), np.zeros(5))


class TestBceLoss:
    def test_reference_value(self):
        loss = bce_loss(np.array([0.9, 0.1]), np.array([1.0, 0.0]))
        assert_allclose(loss, 0.10536051565782628, rtol=1e-15)

    def test_uninformative_prediction_gives_log_two(self):
        loss = bce_loss(np.full((4, 3), 0.5), np.random.default_rng(0).integers(0, 2, (4, 3)).astype(float))
        assert_allclose(loss, np.log(2.0), rtol=1e-15)

    def test_perfect_prediction_clamped(self):
        loss = bce_loss(np.array([1.0, 0.0]), np.array([1.0, 0.0]))
        assert 0.0 < loss <= 1e-11

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            bce_loss(np.zeros(3), np.zeros(4))


class TestBackprop:
    def test_single_weight_hand_value(self):
        # sigmoid(0) = 0.5 against target 1 gives d(loss)/dz = -0.5,
        # and the input is 1 so both gradients equal -0.5.
        p = MlpParams((1, 1), [np.array([[0.0]])], [np.zeros(1)])
        gw, gb = backprop(p, np.array([1.0]), np.array([1.0]))
        assert_allclose(gw[0], [[-0.5]], rtol=0, atol=0)
        assert_allclose(gb[0], [-0.5], rtol=0, atol=0)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        p = small_params(7, dims=(3, 4, 2))
        x = rng.normal(size=(5, 3))
        t = rng.integers(0, 2, (5, 2)).astype(float)
        gw, gb = backprop(p, x, t)
        nw, nb = numeric_gradient(p, x, t)
        for a, b in zip(gw + gb, nw + nb):
            assert_allclose(a, b, rtol=1e-5, atol=1e-9)

    def test_saturated_correct_predictions_have_zero_gradient(self):
        p = MlpParams((1, 1), [np.array([[1000.0]])], [np.zeros(1)])
        gw, gb = backprop(p, np.array([1.0]), np.array([1.0]))
        assert gw[0][0, 0] == 0.0
        assert gb[0][0] == 0.0

    def test_batch_gradient_is_mean_of_per_sample(self):
        rng = np.random.default_rng(21)
        p = small_params(5)
        x = rng.normal(size=(4, 3))
        t = rng.integers(0, 2, (4, 2)).astype(float)
        gw, _ = backprop(p, x, t)
        acc = np.zeros_like(gw[0])
        for i in range(4):
            gwi, _ = backprop(p, x[i], t[i])
            acc += gwi[0]
        assert_allclose(gw[0], acc / 4.0, rtol=1e-12)


class TestInitParams:
    def test_limits_and_zero_biases(self):
        p = init_params((3, 5, 2), np.random.default_rng(0))
        lims = (np.sqrt(6.0 / 8.0), np.sqrt(6.0 / 7.0))
        for w, lim in zip(p.weights, lims):
            assert np.all(np.abs(w) < lim)
        for b in p.biases:
            assert_array_equal(b, np.zeros_like(b))

    def test_deterministic(self):
        a = init_params((4, 6, 4), np.random.default_rng(42))
        b = init_params((4, 6, 4), np.random.default_rng(42))
        for wa, wb in zip(a.weights, b.weights):
            assert_array_equal(wa, wb)


def toy_corpus(count=500, p=3, seed=5):
    """Threshold detection task: target bit j is 1 when |t_j| > 2."""
    rng = np.random.default_rng(seed)
    t = rng.normal(scale=3.0, size=(count, p))
    return t, (np.abs(t) > 2.0).astype(float)


class TestTrain:
    def test_learns_threshold_rule(self):
        t, g = toy_corpus()
        params, report = train((t, g), [3, 30, 3],
                               TrainConfig(epochs=2000, seed=11, learning_rate=1e-2))
        out, _ = forward(params, t)
        accuracy = np.mean((out > 0.5) == (g > 0.5))
        assert accuracy >= 0.98
        assert report.final_loss < 0.25 * report.loss_history[0]
        assert report.epochs_run == 2000
        assert report.loss_history.shape == (2000,)
        assert report.wall_clock_seconds > 0

    def test_loss_trend_holds_for_full_batch_descent(self):
        t, g = toy_corpus()
        _, report = train((t, g), [3, 12, 3],
                          TrainConfig(epochs=800, seed=1, learning_rate=0.5,
                                      batch_size=500, optimizer="sgd"))
        assert loss_trend_ok(report.loss_history)

    def test_deterministic_given_seed(self):
        t, g = toy_corpus(count=200)
        cfg = TrainConfig(epochs=20, seed=3, learning_rate=1e-2)
        p1, r1 = train((t, g), [3, 8, 3], cfg)
        p2, r2 = train((t, g), [3, 8, 3], cfg)
        for a, b in zip(p1.weights + p1.biases, p2.weights + p2.biases):
            assert_array_equal(a, b)
        assert_array_equal(r1.loss_history, r2.loss_history)

    def test_seed_changes_result(self):
        t, g = toy_corpus(count=200)
        p1, _ = train((t, g), [3, 8, 3], TrainConfig(epochs=5, seed=3))
        p2, _ = train((t, g), [3, 8, 3], TrainConfig(epochs=5, seed=4))
        assert not np.array_equal(p1.weights[0], p2.weights[0])

    def test_sgd_and_adam_both_reduce_loss(self):
        t, g = toy_corpus(count=300)
        for opt in ("adam", "sgd"):
            _, report = train((t, g), [3, 10, 3],
                              TrainConfig(epochs=300, seed=2, learning_rate=1e-1,
                                          optimizer=opt))
            assert report.final_loss < report.loss_history[0]

    def test_arch_corpus_mismatch(self):
        t, g = toy_corpus(count=50)
        with pytest.raises(ConfigInvalid):
            train((t, g), [4, 8, 3], TrainConfig(epochs=1, seed=0, batch_size=10))

    def test_empty_corpus(self):
        with pytest.raises(ConfigInvalid):
            train((np.empty((0, 3)), np.empty((0, 3))), [3, 4, 3],
                  TrainConfig(epochs=1, seed=0))

    def test_batch_larger_than_corpus(self):
        t, g = toy_corpus(count=50)
        with pytest.raises(ConfigInvalid):
            train((t, g), [3, 4, 3], TrainConfig(epochs=1, seed=0, batch_size=51))

    def test_divergence_raises(self):
        # One sample, one weight: a float-max learning rate overflows
        # the weight on the first update.
        x = np.array([[4.0]])
        t = np.array([[1.0]])
        with np.errstate(over="ignore"), pytest.raises(NonFiniteLoss):
            train((x, t), [1, 1],
                  TrainConfig(epochs=2, seed=2, learning_rate=1.6e308,
                              batch_size=1, optimizer="sgd"))


class TestTrainConfig:
    @pytest.mark.parametrize("kwargs", [
        dict(epochs=0, seed=0),
        dict(epochs=10, seed=0, learning_rate=0.0),
        dict(epochs=10, seed=0, learning_rate=-1.0),
        dict(epochs=10, seed=0, batch_size=0),
        dict(epochs=10, seed=0, loss="mse"),
        dict(epochs=10, seed=0, optimizer="rmsprop"),
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ConfigInvalid):
            TrainConfig(**kwargs)


class TestLossTrend:
    def test_short_history_passes(self):
        assert loss_trend_ok(np.linspace(1.0, 2.0, 100))

    def test_monotone_decay_passes(self):
        assert loss_trend_ok(np.exp(-np.linspace(0, 5, 2000)))

    def test_flat_history_passes(self):
        assert loss_trend_ok(np.full(1200, 0.3))

    def test_late_increase_fails(self):
        h = np.exp(-np.linspace(0, 5, 2000))
        h[-1] = h[0]
        assert not loss_trend_ok(h)

    def test_window_tolerance(self):
        h = np.full(700, 0.5)
        h[600] = 0.5 + 5e-7
        assert loss_trend_ok(h, window=500, tol=1e-6)
        assert not loss_trend_ok(h, window=500, tol=1e-8)


class TestWeightsFile:
    def test_round_trip_is_exact(self, tmp_path):
        p = small_params(13, dims=(4, 7, 7, 4))
        path = tmp_path / "net.txt"
        save_weights(p, path)
        q = load_weights(path)
        assert q.layer_dims == p.layer_dims
        for a, b in zip(p.weights + p.biases, q.weights + q.biases):
            assert_array_equal(a, b)

    def test_round_trip_survives_retraining_values(self, tmp_path):
        t, g = toy_corpus(count=200)
        p, _ = train((t, g), [3, 6, 3], TrainConfig(epochs=30, seed=8))
        path = tmp_path / "net.txt"
        save_weights(p, path)
        q = load_weights(path)
        out_p, _ = forward(p, t)
        out_q, _ = forward(q, t)
        assert_array_equal(out_p, out_q)

    def test_header_line_format(self, tmp_path):
        p = small_params()
        path = tmp_path / "net.txt"
        save_weights(p, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "MLPSEL v1"
        assert lines[1] == "dims 3 4 2"
        assert lines[2] == "layer 0 sigmoid"

    @pytest.mark.parametrize("mutate", [
        lambda lines: ["BOGUS v1"] + lines[1:],
        lambda lines: [lines[0], "dims 3 four 2"] + lines[2:],
        lambda lines: [lines[0], "dims 3"] + lines[2:],
        lambda lines: lines[:2] + ["layer 9 sigmoid"] + lines[3:],
        lambda lines: lines[:2] + ["layer 0 relu"] + lines[3:],
        lambda lines: lines[:-1],                      # truncated
        lambda lines: lines + ["0.5 0.5 0.5"],         # trailing content
        lambda lines: lines[:3] + [lines[3] + " 1.0"] + lines[4:],  # row too long
    ])
    def test_malformed_files_raise(self, tmp_path, mutate):
        p = small_params()
        path = tmp_path / "net.txt"
        save_weights(p, path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(mutate(lines)) + "\n")
        with pytest.raises(FormatError):
            load_weights(path)

    def test_non_numeric_value_raises(self, tmp_path):
        p = small_params()
        path = tmp_path / "net.txt"
        save_weights(p, path)
        lines = path.read_text().splitlines()
        fields = lines[3].split()
        fields[0] = "abc"
        lines[3] = " ".join(fields)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(FormatError):
            load_weights(path)


class TestInputClip:
    def test_forward_equals_plain_net_on_clipped_inputs(self):
        clipped = init_params((3, 5, 2), np.random.default_rng(3), input_clip=4.0)
        plain = MlpParams(clipped.layer_dims,
                          [w.copy() for w in clipped.weights],
                          [b.copy() for b in clipped.biases])
        x = np.random.default_rng(4).normal(scale=30.0, size=(20, 3))
        out_clipped, _ = forward(clipped, x)
        out_plain, _ = forward(plain, np.clip(x, -4.0, 4.0))
        assert_array_equal(out_clipped, out_plain)

    def test_inside_range_clip_is_identity(self):
        clipped = init_params((3, 5, 2), np.random.default_rng(3), input_clip=100.0)
        plain = MlpParams(clipped.layer_dims,
                          [w.copy() for w in clipped.weights],
                          [b.copy() for b in clipped.biases])
        x = np.random.default_rng(4).normal(size=(20, 3))
        assert_array_equal(forward(clipped, x)[0], forward(plain, x)[0])

    def test_gradients_still_match_finite_differences(self):
        params = init_params((3, 4, 3), np.random.default_rng(5), input_clip=2.0)
        rng = np.random.default_rng(6)
        x = rng.normal(scale=5.0, size=(4, 3))
        target = (np.abs(x) > 1.0).astype(float)
        analytic_w, analytic_b = backprop(params, x, target)
        numeric_w, numeric_b = numeric_gradient(params, x, target)
        for a, n in zip(analytic_w + analytic_b, numeric_w + numeric_b):
            assert_allclose(a, n, rtol=1e-5, atol=1e-8)

    def test_round_trips_through_weight_file(self, tmp_path):
        params = init_params((3, 4, 2), np.random.default_rng(7), input_clip=10.0)
        path = tmp_path / "net.txt"
        save_weights(params, path)
        lines = path.read_text().splitlines()
        assert lines[2] == "clip 10"
        back = load_weights(path)
        assert back.input_clip == 10.0
        x = np.random.default_rng(8).normal(scale=40.0, size=(6, 3))
        assert_array_equal(forward(params, x)[0], forward(back, x)[0])

    def test_absent_clip_line_loads_as_none(self, tmp_path):
        params = small_params()
        path = tmp_path / "net.txt"
        save_weights(params, path)
        assert load_weights(path).input_clip is None

    @pytest.mark.parametrize("value", ["0", "-3", "inf", "nan", "abc"])
    def test_bad_clip_line_raises(self, tmp_path, value):
        params = small_params()
        path = tmp_path / "net.txt"
        save_weights(params, path)
        lines = path.read_text().splitlines()
        lines.insert(2, f"clip {value}")
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(FormatError):
            load_weights(path)

    @pytest.mark.parametrize("value", [0.0, -1.0, np.inf, np.nan])
    def test_constructors_reject_bad_clip(self, value):
        with pytest.raises(ConfigInvalid):
            init_params((3, 4, 2), np.random.default_rng(0), input_clip=value)
        with pytest.raises(ConfigInvalid):
            TrainConfig(epochs=1, seed=0, input_clip=value)

    def test_training_with_clip_learns_wide_inputs(self):
        rng = np.random.default_rng(9)
        x = rng.normal(scale=60.0, size=(512, 2))
        target = (np.abs(x) > 2.0).astype(float)
        params, report = train((x, target), [2, 12, 2],
                               TrainConfig(epochs=150, seed=1,
                                           learning_rate=1e-2,
                                           input_clip=8.0))
        out, _ = forward(params, x)
        accuracy = np.mean((out > 0.5) == (target > 0.5))
        assert accuracy >= 0.97
        assert report.final_loss < 0.15
