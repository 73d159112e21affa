"""Tests for tensor/ops.py - matmul, padding and the im2col convolution path."""

from __future__ import annotations

import numpy as np
import pytest

from tabletop_pose.errors import DimensionError, NumericError
from tabletop_pose.nn.layers import Conv2D
from tabletop_pose.nn.spec import LayerSpec
from tabletop_pose.tensor import (
    center_crop,
    check_tensor,
    col2im,
    col2im_batch,
    conv_output_size,
    ensure_finite,
    im2col,
    im2col_batch,
    matmul,
    pad2d,
)
from tabletop_pose.types import Mode


def naive_conv(x: np.ndarray, weight: np.ndarray, bias: np.ndarray, pad: int) -> np.ndarray:
    """Sliding-window cross-correlation of one [c,h,w] sample, in f64."""
    x = np.pad(x.astype(np.float64), ((0, 0), (pad, pad), (pad, pad)))
    weight = weight.astype(np.float64)
    out_c, _, k, _ = weight.shape
    out_h = x.shape[1] - k + 1
    out_w = x.shape[2] - k + 1
    out = np.empty((out_c, out_h, out_w))
    for o in range(out_c):
        for y in range(out_h):
            for xx in range(out_w):
                out[o, y, xx] = bias[o] + np.sum(x[:, y : y + k, xx : xx + k] * weight[o])
    return out


class TestCheckTensor:
    """Tests for the Tensor invariants."""

    def test_accepts_valid_tensor(self) -> None:
        """A rank-3 tensor with positive extents passes."""
        check_tensor(np.zeros((1, 2, 3)), 3)

    def test_rejects_scalar(self) -> None:
        """Rank 0 is not a tensor."""
        with pytest.raises(DimensionError, match="rank"):
            check_tensor(np.float32(1.0))

    def test_rejects_empty_extent(self) -> None:
        """Every extent must be >= 1."""
        with pytest.raises(DimensionError, match="extents"):
            check_tensor(np.zeros((1, 0, 3)))

    def test_rejects_wrong_rank(self) -> None:
        """An explicit rank is enforced."""
        with pytest.raises(DimensionError, match="expected rank 3"):
            check_tensor(np.zeros((2, 2)), 3)

    def test_ensure_finite(self) -> None:
        """NaN and inf raise NumericError naming the operand."""
        ensure_finite(np.ones(3), "ok")
        with pytest.raises(NumericError, match="logits"):
            ensure_finite(np.array([1.0, np.nan]), "logits")
        with pytest.raises(NumericError):
            ensure_finite(np.array([np.inf]), "x")


class TestMatmul:
    """Tests for matmul."""

    def test_identity(self) -> None:
        """Identity times B is B."""
        b = np.array([[5.0, 6.0], [7.0, 8.0]])
        np.testing.assert_array_equal(matmul(np.eye(2), b), b)

    def test_row_times_column(self) -> None:
        """[[1,2]] x [[3],[4]] = [[11]]."""
        assert matmul(np.array([[1.0, 2.0]]), np.array([[3.0], [4.0]])).tolist() == [[11.0]]

    def test_matches_triple_loop(self, rng: np.random.Generator) -> None:
        """Random 7x5 by 5x3 agrees with a naive triple loop in f64."""
        a = rng.standard_normal((7, 5))
        b = rng.standard_normal((5, 3))
        expected = np.zeros((7, 3))
        for i in range(7):
            for j in range(3):
                for t in range(5):
                    expected[i, j] += a[i, t] * b[t, j]
        assert np.max(np.abs(matmul(a, b) - expected)) < 1e-12

    def test_bit_reproducible(self, rng: np.random.Generator) -> None:
        """Identical inputs give bitwise-identical results."""
        a = rng.standard_normal((16, 9)).astype(np.float32)
        b = rng.standard_normal((9, 4)).astype(np.float32)
        assert matmul(a, b).tobytes() == matmul(a, b).tobytes()

    def test_same_bits_as_numpy(self, rng: np.random.Generator) -> None:
        """matmul is numpy's @, so it inherits that summation order exactly."""
        a = rng.standard_normal((33, 17)).astype(np.float32)
        b = rng.standard_normal((17, 6)).astype(np.float32)
        assert matmul(a, b).tobytes() == (a @ b).tobytes()

    def test_mismatch_names_both_shapes(self) -> None:
        """Inner dimension mismatch names both operands."""
        with pytest.raises(DimensionError, match=r"a\[2, 3\] x b\[2, 2\]"):
            matmul(np.zeros((2, 3)), np.zeros((2, 2)))


class TestPad2d:
    """Tests for pad2d and center_crop."""

    def test_pads_single_pixel(self) -> None:
        """1x1x1 [[5]] padded by 1 on every side puts 5 in the centre."""
        out = pad2d(np.array([[[5.0]]]), 1, 1, 1, 1, 0.0)
        assert out.shape == (1, 3, 3)
        assert out[0, 1, 1] == 5.0
        assert out.sum() == 5.0

    def test_zero_padding_is_identity(self, rng: np.random.Generator) -> None:
        """Padding by zero leaves x unchanged."""
        x = rng.random((2, 4, 5))
        np.testing.assert_array_equal(pad2d(x, 0, 0, 0, 0), x)

    def test_shape_arithmetic(self) -> None:
        """One row on top of 1x2x2 gives 1x3x2."""
        assert pad2d(np.ones((1, 2, 2)), 1, 0, 0, 0).shape == (1, 3, 2)

    def test_border_value(self) -> None:
        """The border holds the requested value."""
        out = pad2d(np.zeros((1, 1, 1)), 0, 1, 0, 1, value=7.0)
        assert out.tolist() == [[[0.0, 7.0], [7.0, 7.0]]]

    def test_negative_counts_rejected(self) -> None:
        """Negative pad counts raise."""
        with pytest.raises(DimensionError):
            pad2d(np.ones((1, 2, 2)), -1, 0, 0, 0)

    @pytest.mark.parametrize("counts", [(0, 0, 0, 0), (1, 2, 3, 4), (2, 2, 2, 2)])
    def test_crop_inverts_pad(self, rng: np.random.Generator, counts: tuple[int, int, int, int]) -> None:
        """center_crop of the same amounts undoes pad2d, for samples and batches."""
        x = rng.random((2, 3, 5, 4))
        np.testing.assert_array_equal(center_crop(pad2d(x, *counts), *counts), x)

    def test_crop_too_large(self) -> None:
        """Cropping away the whole image raises."""
        with pytest.raises(DimensionError):
            center_crop(np.ones((1, 2, 2)), 1, 1, 0, 0)


class TestIm2col:
    """Tests for im2col and its adjoint."""

    def test_single_window_is_flattened_input(self) -> None:
        """A kernel the size of the input yields one column: the input itself."""
        x = np.array([[[1.0, 2.0], [3.0, 4.0]]])
        cols = im2col(x, 2, 2)
        assert cols.shape == (4, 1)
        assert cols[:, 0].tolist() == [1.0, 2.0, 3.0, 4.0]

    def test_output_grid(self) -> None:
        """3x3 input, 2x2 kernel -> 4 columns, row-major over output positions."""
        x = np.arange(9.0).reshape(1, 3, 3)
        cols = im2col(x, 2, 2)
        assert cols.shape == (4, 4)
        np.testing.assert_array_equal(cols[:, 1], x[0, 0:2, 1:3].ravel())
        np.testing.assert_array_equal(cols[:, 2], x[0, 1:3, 0:2].ravel())

    def test_rows_are_channel_major(self) -> None:
        """Rows run over channel first, then kernel row, then kernel column."""
        x = np.stack([np.zeros((2, 2)), np.ones((2, 2))])
        cols = im2col(x, 2, 2)
        assert cols[:4, 0].tolist() == [0.0] * 4
        assert cols[4:, 0].tolist() == [1.0] * 4

    def test_stride_and_padding(self) -> None:
        """Output size follows floor((h + 2p - k) / s) + 1."""
        x = np.ones((1, 7, 6))
        cols = im2col(x, 3, 3, stride=2, pad=1)
        assert cols.shape == (9, conv_output_size(7, 3, 2, 1) * conv_output_size(6, 3, 2, 1))
        assert conv_output_size(7, 3, 2, 1) == 4

    def test_kernel_larger_than_input(self) -> None:
        """A kernel that does not fit the padded input raises."""
        with pytest.raises(DimensionError, match="larger than padded input"):
            im2col(np.ones((1, 2, 2)), 3, 3)

    def test_batch_columns_run_over_samples_first(self, rng: np.random.Generator) -> None:
        """Batched columns are the per-sample columns laid side by side."""
        x = rng.random((3, 2, 5, 5))
        batched = im2col_batch(x, 3, 3, 1, 1)
        per_sample = np.concatenate([im2col(sample, 3, 3, 1, 1) for sample in x], axis=1)
        np.testing.assert_array_equal(batched, per_sample)

    @pytest.mark.parametrize(("shape", "k", "stride", "pad"), [((2, 6, 5), 3, 1, 1), ((3, 7, 7), 3, 2, 0), ((1, 5, 4), 1, 1, 0)])
    def test_adjoint_identity(
        self,
        rng: np.random.Generator,
        shape: tuple[int, int, int],
        k: int,
        stride: int,
        pad: int,
    ) -> None:
        """<im2col(x), Y> == <x, col2im(Y)>."""
        x = rng.standard_normal(shape).astype(np.float32)
        cols = im2col(x, k, k, stride, pad)
        y = rng.standard_normal(cols.shape).astype(np.float32)
        lhs = float(np.sum(cols.astype(np.float64) * y))
        rhs = float(np.sum(x.astype(np.float64) * col2im(y, shape, k, k, stride, pad)))
        assert abs(lhs - rhs) < 1e-6 * max(1.0, abs(lhs))

    def test_col2im_rejects_wrong_columns(self) -> None:
        """col2im checks the column matrix against the input shape."""
        with pytest.raises(DimensionError, match="col2im expects"):
            col2im_batch(np.zeros((9, 3)), (1, 1, 4, 4), 3, 3)


class TestConvolutionOracle:
    """The im2col conv path agrees with a naive sliding window."""

    def test_three_channel_same_padding(self, rng: np.random.Generator) -> None:
        """3x16x16 input, 8 filters 3x3, same padding."""
        layer = Conv2D(LayerSpec.conv2d(8, 3), (3, 16, 16), rng)
        layer.state.parameters["bias"][:] = rng.standard_normal(8).astype(np.float32)
        x = rng.uniform(-1.0, 1.0, (3, 16, 16)).astype(np.float32)
        out = layer.forward(x, Mode.EVAL)
        expected = naive_conv(x, layer.state.parameters["weight"], layer.state.parameters["bias"], 1)
        assert out.shape == (8, 16, 16)
        assert np.max(np.abs(out - expected)) < 1e-6

    def test_hundred_random_configurations(self) -> None:
        """100 random shapes, kernels and padding modes, all within 1e-6 (f32)."""
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(100):
            in_c = int(rng.integers(1, 4))
            out_c = int(rng.integers(1, 5))
            kernel = int(rng.choice([1, 3, 5])) if in_c == 1 else int(rng.choice([1, 3]))
            padding = str(rng.choice(["same", "valid"]))
            h = int(rng.integers(kernel, 12))
            w = int(rng.integers(kernel, 12))
            layer = Conv2D(LayerSpec.conv2d(out_c, kernel, padding), (in_c, h, w), rng)  # type: ignore[arg-type]
            layer.state.parameters["bias"][:] = rng.uniform(-0.5, 0.5, out_c).astype(np.float32)
            x = rng.uniform(-1.0, 1.0, (in_c, h, w)).astype(np.float32)
            out = layer.forward(x, Mode.EVAL)
            expected = naive_conv(x, layer.state.parameters["weight"], layer.state.parameters["bias"], layer.pad)
            assert out.shape == expected.shape
            worst = max(worst, float(np.max(np.abs(out - expected))))
        assert worst < 1e-6
