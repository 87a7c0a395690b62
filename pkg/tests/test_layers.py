"""
Tests for the Chebyshev convolution layer and the assembled classifier
"""

import numpy as np
import pytest

from core.config import NetworkSpec
from core.errors import DimensionError, InvalidInputError
from engine import Tensor, gradcheck, mul, tensor_sum
from layers import (
    BatchNorm2d,
    ChebConv2d,
    ChebConvSpec,
    Dense,
    build_network,
    chebyshev_branches,
    conv_specs,
    describe_network,
    forward,
    render_ledger,
)
from training.losses import weighted_cross_entropy


def identity_kernel(out_channels, in_channels, kernel=3):
    weight = np.zeros((out_channels, in_channels, kernel, kernel))
    for c in range(min(out_channels, in_channels)):
        weight[c, c, kernel // 2, kernel // 2] = 1.0
    return weight


class TestChebyshevBranches:

    def test_branches_follow_recurrence(self, rng):
        s = Tensor(rng.uniform(-1, 1, (2, 1, 3, 3)), dtype=np.float64)
        branches = chebyshev_branches(s, 4)
        expected = np.polynomial.chebyshev.chebvander(s.data, 4)
        for k, branch in enumerate(branches):
            np.testing.assert_allclose(branch.data, expected[..., k], atol=1e-12)

    def test_order_zero_is_constant_one(self, rng):
        s = Tensor(rng.standard_normal((1, 2, 4, 4)))
        branches = chebyshev_branches(s, 0)
        assert len(branches) == 1
        np.testing.assert_array_equal(branches[0].data, 1.0)


class TestChebConv2d:
    """Chebyshev convolution layer"""

    def test_order_zero_output_ignores_input(self, rng):
        """K = 0 uses only T_0 = 1: the output is the same constant map for every input"""
        layer = ChebConv2d(1, 2, order=0, rng=rng, dtype=np.float64)
        layer.squash = False
        a = layer(Tensor(rng.standard_normal((1, 1, 6, 6)), dtype=np.float64)).data
        b = layer(Tensor(rng.standard_normal((1, 1, 6, 6)) * 10, dtype=np.float64)).data
        np.testing.assert_allclose(a, b)
        # interior pixels see the full kernel sum
        kernel_sums = layer.weights[0].data.sum(axis=(1, 2, 3))
        np.testing.assert_allclose(a[0, :, 2, 2], kernel_sums)

    def test_first_order_identity_kernel_gives_tanh(self, rng):
        """W_0 = 0 and W_1 = identity kernel reproduce tanh(F_in)"""
        layer = ChebConv2d(2, 2, order=1, rng=rng, dtype=np.float64)
        layer.weights[0].data[...] = 0.0
        layer.weights[1].data[...] = identity_kernel(2, 2)
        x = rng.standard_normal((3, 2, 5, 5))
        out = layer(Tensor(x, dtype=np.float64)).data
        np.testing.assert_allclose(out, np.tanh(x), atol=1e-12)

    def test_matches_sum_of_branch_convolutions(self, rng):
        from engine import conv2d

        layer = ChebConv2d(2, 3, order=3, rng=rng, dtype=np.float64)
        x = Tensor(rng.standard_normal((2, 2, 6, 6)), dtype=np.float64)
        out = layer(x).data
        reference = sum(
            conv2d(branch, weight).data for branch, weight in zip(layer.branches(x), layer.weights)
        )
        np.testing.assert_allclose(out, reference, atol=1e-10)

    def test_gradients_order_three(self, rng):
        layer = ChebConv2d(2, 2, order=3, rng=rng, dtype=np.float64)
        x = Tensor(rng.standard_normal((2, 2, 4, 4)), requires_grad=True, dtype=np.float64, name="x")
        cotangent = Tensor(rng.standard_normal((2, 2, 4, 4)), dtype=np.float64)
        inputs = [x] + layer.parameters()
        result = gradcheck(lambda: tensor_sum(mul(layer(x), cotangent)), inputs, h=1e-5)
        assert result.passed, result.per_input

    @pytest.mark.parametrize("in_ch,out_ch,order", [(1, 32, 4), (32, 64, 6), (3, 5, 0)])
    def test_parameter_count(self, in_ch, out_ch, order):
        layer = ChebConv2d(in_ch, out_ch, order)
        expected = (order + 1) * out_ch * in_ch * 9 + out_ch
        assert layer.num_parameters() == expected
        assert layer.expected_parameters() == expected
        assert ChebConvSpec(in_ch, out_ch, order).num_parameters == expected
        assert len(layer.weights) == order + 1

    def test_all_weights_are_decayed_but_not_bias(self):
        layer = ChebConv2d(1, 2, order=2)
        assert len(layer.decayed_parameters()) == 3
        assert layer.bias not in layer.decayed_parameters()

    def test_wrong_channel_count(self, rng):
        layer = ChebConv2d(2, 2, order=1)
        with pytest.raises(DimensionError):
            layer(Tensor(rng.standard_normal((1, 3, 4, 4))))

    def test_negative_order(self):
        with pytest.raises(InvalidInputError):
            ChebConv2d(1, 1, order=-1)


class TestBuildNetwork:
    """Assembly, ledger and forward pass of the classifier"""

    def test_default_ledger_at_side_128(self):
        model = build_network(NetworkSpec(), seed=0)
        rows = {row.name: row for row in describe_network(model)}
        assert rows["flatten"].output_shape == (65536,)
        assert rows["conv1"].num_parameters == 5 * 32 * 9 + 32
        assert rows["conv2"].num_parameters == 7 * 64 * 32 * 9 + 64
        assert rows["dense1"].num_parameters == 65536 * 256 + 256
        assert rows["dense2"].num_parameters == 256 * 3 + 3
        assert rows["softmax"].output_shape == (3,)
        assert sum(r.num_parameters for r in rows.values()) == model.num_parameters()

    def test_conv_stages_follow_their_specs(self, small_spec):
        model = build_network(small_spec)
        stages = conv_specs(small_spec)
        assert [s.in_channels for s in stages] == [small_spec.in_channels, small_spec.widths[0]]
        for layer, stage in zip(model.conv_layers(), stages):
            assert (layer.in_channels, layer.out_channels, layer.order) == (
                stage.in_channels, stage.out_channels, stage.order)
            assert layer.num_parameters() == stage.num_parameters

    def test_flatten_width_at_side_32(self):
        model = build_network(NetworkSpec(side=32), seed=0)
        rows = {row.name: row for row in describe_network(model)}
        assert rows["flatten"].output_shape == (4096,)
        assert rows["pool1"].output_shape == (32, 16, 16)

    def test_render_ledger_has_total(self, tiny_spec):
        text = render_ledger(describe_network(build_network(tiny_spec)))
        assert "conv1" in text and "softmax" in text
        assert text.strip().splitlines()[-1].startswith("total")

    def test_layer_order(self, tiny_spec):
        model = build_network(tiny_spec)
        assert model.layer_names == [
            "conv1", "bn1", "relu1", "pool1", "conv2", "bn2", "relu2", "pool2",
            "flatten", "dense1", "dropout", "dense2",
        ]

    def test_standard_arm_uses_plain_convolution(self, tiny_spec):
        model = build_network(tiny_spec.model_copy(update={"conv_kind": "standard"}))
        rows = {row.name: row for row in describe_network(model)}
        assert rows["conv1"].kind == "conv"
        assert rows["conv1"].num_parameters == 2 * 1 * 9 + 2

    def test_same_seed_same_weights(self, tiny_spec):
        a = build_network(tiny_spec, seed=11).state_dict()
        b = build_network(tiny_spec, seed=11).state_dict()
        c = build_network(tiny_spec, seed=12).state_dict()
        assert a.keys() == b.keys()
        assert all(np.array_equal(a[k], b[k]) for k in a)
        assert not np.array_equal(a["conv1.weight_0"], c["conv1.weight_0"])

    def test_side_must_divide_by_four(self, tiny_spec):
        with pytest.raises(InvalidInputError):
            build_network(tiny_spec.model_copy(update={"side": 10}))

    def test_probabilities_sum_to_one(self, small_spec, rng):
        model = build_network(small_spec, seed=1)
        logits, probs = forward(model, rng.standard_normal((5, 1, 16, 16)).astype(np.float32), training=True)
        assert logits.shape == (5, 3)
        np.testing.assert_allclose(probs.data.sum(axis=1), 1.0, rtol=1e-5)

    def test_accepts_batches_without_channel_axis(self, small_spec, rng):
        model = build_network(small_spec, seed=1)
        batch = rng.standard_normal((2, 16, 16)).astype(np.float32)
        _, a = forward(model, batch, training=False)
        _, b = forward(model, batch[:, None], training=False)
        np.testing.assert_array_equal(a.data, b.data)

    def test_evaluation_is_deterministic(self, small_spec, rng):
        model = build_network(small_spec, seed=1)
        batch = rng.standard_normal((4, 1, 16, 16)).astype(np.float32)
        _, first = forward(model, batch, training=False)
        _, second = forward(model, batch, training=False)
        np.testing.assert_array_equal(first.data, second.data)

    def test_zero_final_layer_gives_uniform_probabilities(self, small_spec, rng):
        model = build_network(small_spec, seed=1)
        dense2 = dict(model.layers)["dense2"]
        dense2.weight.data[...] = 0.0
        dense2.bias.data[...] = 0.0
        _, probs = forward(model, rng.standard_normal((3, 1, 16, 16)).astype(np.float32), training=False)
        np.testing.assert_allclose(probs.data, 1.0 / 3.0, rtol=1e-6)

    @pytest.mark.parametrize("shape", [(2, 1, 12, 12), (2, 2, 16, 16), (16, 16)])
    def test_wrong_input_shape(self, small_spec, shape):
        model = build_network(small_spec)
        with pytest.raises(DimensionError):
            forward(model, np.zeros(shape, dtype=np.float32), training=False)

    def test_state_dict_round_trip(self, tiny_spec):
        source = build_network(tiny_spec, seed=3)
        target = build_network(tiny_spec, seed=4)
        target.load_state_dict(source.state_dict())
        assert all(np.array_equal(v, target.state_dict()[k]) for k, v in source.state_dict().items())

    def test_state_dict_rejects_mismatch(self, tiny_spec):
        model = build_network(tiny_spec)
        state = model.state_dict()
        state.pop("dense2.bias")
        with pytest.raises(InvalidInputError):
            model.load_state_dict(state)
        state = model.state_dict()
        state["dense2.bias"] = np.zeros(7, dtype=np.float32)
        with pytest.raises(DimensionError):
            model.load_state_dict(state)

    def test_batchnorm_buffers_are_in_state(self, tiny_spec):
        state = build_network(tiny_spec).state_dict()
        assert "bn1.running_mean" in state and "bn2.running_var" in state
        assert isinstance(dict(build_network(tiny_spec).layers)["bn1"], BatchNorm2d)

    def test_network_gradients(self, tiny_spec, rng):
        """End-to-end float64 check through convolutions, batchnorm, pooling and dense layers"""
        model = build_network(tiny_spec, seed=2, dtype=np.float64)
        model.train()
        batch = rng.standard_normal((4, 1, 8, 8))
        labels = np.array([0, 1, 2, 1])
        inputs = [
            model._children["conv1"].weights[2],
            model._children["conv2"].weights[1],
            model._children["bn2"].gamma,
            model._children["dense1"].weight,
            model._children["dense2"].bias,
        ]
        assert isinstance(model._children["dense1"], Dense)

        def loss():
            _, probs = model(batch)
            return weighted_cross_entropy(probs, labels, [1.0, 2.0, 0.5])

        result = gradcheck(loss, inputs, h=1e-5)
        assert result.passed, result.per_input
