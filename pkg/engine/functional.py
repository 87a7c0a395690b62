"""
Functional ops - Differentiable neural-network primitives on Tensor

Responsibility: the forward and backward rules of every layer the
network needs, all in NCHW layout.

Interface:
  conv2d(x, weight, bias=None)      stride 1, "same" zero padding, no kernel flip
  dense(x, weight, bias=None)       x @ W + b, W shaped (in, out)
  relu(t) / tanh(t)
  maxpool2x2(t)                     2x2 windows, stride 2
  batchnorm(t, gamma, beta, running_mean, running_var, training)
  dropout(t, p, training, rng)      inverted scaling, identity in evaluation
  softmax_rows(t)
"""

import logging
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from core.errors import DimensionError, InvalidInputError
from .tensor import Tensor, as_tensor, make_result

logger = logging.getLogger(__name__)

BN_MOMENTUM = 0.1
BN_EPS = 1e-5

# Upper bound on im2col elements materialized per convolution chunk
_IM2COL_BUDGET = 1 << 23


def _batch_chunks(batch: int, per_sample: int):
    step = max(1, _IM2COL_BUDGET // max(per_sample, 1))
    for start in range(0, batch, step):
        yield slice(start, min(batch, start + step))


def conv2d(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """
    Cross-correlation of an N x C x H x W batch with O x C x k x k filters

    Zero padding of k // 2 keeps H x W at stride 1. Kernels must be odd.
    """
    x = as_tensor(x)
    weight = as_tensor(weight, x.dtype)
    if x.ndim != 4 or weight.ndim != 4:
        raise DimensionError("conv2d expects NCHW input and OCkk weights", x.shape, weight.shape)
    n, c, h, w = x.shape
    out_ch, w_ch, kh, kw = weight.shape
    if c != w_ch:
        raise DimensionError("conv2d: input channels do not match weight channels", x.shape, weight.shape)
    if kh % 2 == 0 or kw % 2 == 0:
        raise DimensionError("conv2d needs odd kernel extents for same padding", weight.shape)
    if bias is not None:
        bias = as_tensor(bias, x.dtype)
        if bias.shape != (out_ch,):
            raise DimensionError("conv2d: bias must have one entry per output channel", bias.shape, (out_ch,))

    ph, pw = kh // 2, kw // 2
    pad = ((0, 0), (0, 0), (ph, ph), (pw, pw))
    padded = np.pad(x.data, pad)
    per_sample = c * h * w * kh * kw

    out = np.empty((n, out_ch, h, w), dtype=x.dtype)
    for part in _batch_chunks(n, per_sample):
        windows = sliding_window_view(padded[part], (kh, kw), axis=(2, 3))  # n,C,H,W,kh,kw
        out[part] = np.tensordot(windows, weight.data, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    if bias is not None:
        out += bias.data[None, :, None, None]

    def backward(g):
        grad_x = grad_w = grad_b = None
        if x.requires_grad:
            grad_x = np.empty_like(x.data)
            flipped = weight.data[:, :, ::-1, ::-1]
            g_padded = np.pad(g, pad)
            for part in _batch_chunks(n, out_ch * h * w * kh * kw):
                g_windows = sliding_window_view(g_padded[part], (kh, kw), axis=(2, 3))  # n,O,H,W,kh,kw
                grad_x[part] = np.tensordot(g_windows, flipped, axes=([1, 4, 5], [0, 2, 3])).transpose(0, 3, 1, 2)
        if weight.requires_grad:
            grad_w = np.zeros_like(weight.data)
            for part in _batch_chunks(n, per_sample):
                windows = sliding_window_view(padded[part], (kh, kw), axis=(2, 3))
                grad_w += np.tensordot(g[part], windows, axes=([0, 2, 3], [0, 2, 3]))
        if bias is not None and bias.requires_grad:
            grad_b = g.sum(axis=(0, 2, 3))
        return grad_x, grad_w, grad_b

    inputs = (x, weight, bias) if bias is not None else (x, weight)
    return make_result(out, inputs, "conv2d", backward)


def dense(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """Fully connected layer on an (N, in) batch"""
    x = as_tensor(x)
    weight = as_tensor(weight, x.dtype)
    if x.ndim != 2 or weight.ndim != 2 or x.shape[1] != weight.shape[0]:
        raise DimensionError("dense: input width does not match weight rows", x.shape, weight.shape)
    out = x.data @ weight.data
    if bias is not None:
        bias = as_tensor(bias, x.dtype)
        if bias.shape != (weight.shape[1],):
            raise DimensionError("dense: bias must match output width", bias.shape, (weight.shape[1],))
        out = out + bias.data

    def backward(g):
        grad_x = g @ weight.data.T if x.requires_grad else None
        grad_w = x.data.T @ g if weight.requires_grad else None
        grad_b = g.sum(axis=0) if bias is not None and bias.requires_grad else None
        return grad_x, grad_w, grad_b

    inputs = (x, weight, bias) if bias is not None else (x, weight)
    return make_result(out, inputs, "dense", backward)


def relu(t: Tensor) -> Tensor:
    t = as_tensor(t)
    active = t.data > 0
    return make_result(np.where(active, t.data, 0).astype(t.dtype), (t,), "relu", lambda g: (g * active,))


def tanh(t: Tensor) -> Tensor:
    t = as_tensor(t)
    out = np.tanh(t.data)
    return make_result(out, (t,), "tanh", lambda g: (g * (1 - out * out),))


def maxpool2x2(t: Tensor) -> Tensor:
    """Max over non-overlapping 2x2 windows; gradient routed to the first maximum"""
    t = as_tensor(t)
    if t.ndim != 4:
        raise DimensionError("maxpool2x2 expects NCHW input", t.shape)
    n, c, h, w = t.shape
    if h % 2 or w % 2:
        raise DimensionError("maxpool2x2 needs even spatial extents", t.shape)
    windows = t.data.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h // 2, w // 2, 4)
    winner = windows.argmax(axis=-1)[..., None]
    out = np.take_along_axis(windows, winner, axis=-1)[..., 0]

    def backward(g):
        routed = np.zeros_like(windows)
        np.put_along_axis(routed, winner, g[..., None], axis=-1)
        return (routed.reshape(n, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h, w),)

    return make_result(np.ascontiguousarray(out), (t,), "maxpool2x2", backward)


def batchnorm(
    t: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    training: bool,
    momentum: float = BN_MOMENTUM,
    eps: float = BN_EPS
) -> Tensor:
    """
    Per-channel standardization of NCHW input with a learned affine

    Training mode normalizes with batch statistics and updates the running
    buffers in place (unbiased variance); evaluation mode uses the buffers.
    """
    t = as_tensor(t)
    gamma = as_tensor(gamma, t.dtype)
    beta = as_tensor(beta, t.dtype)
    if t.ndim != 4:
        raise DimensionError("batchnorm expects NCHW input", t.shape)
    channels = t.shape[1]
    if gamma.shape != (channels,) or beta.shape != (channels,):
        raise DimensionError("batchnorm affine must have one entry per channel", gamma.shape, (channels,))

    axes = (0, 2, 3)
    count = t.size // channels
    if training:
        if count < 2:
            raise InvalidInputError("batchnorm in training mode needs more than one value per channel")
        mu = t.data.mean(axis=axes)
        var = t.data.var(axis=axes)
        running_mean *= 1 - momentum
        running_mean += momentum * mu
        running_var *= 1 - momentum
        running_var += momentum * var * count / (count - 1)
    else:
        mu = running_mean.astype(t.dtype)
        var = running_var.astype(t.dtype)

    inv_std = (1.0 / np.sqrt(var + eps)).astype(t.dtype)
    x_hat = (t.data - mu[None, :, None, None]) * inv_std[None, :, None, None]
    out = gamma.data[None, :, None, None] * x_hat + beta.data[None, :, None, None]

    def backward(g):
        grad_gamma = (g * x_hat).sum(axis=axes) if gamma.requires_grad else None
        grad_beta = g.sum(axis=axes) if beta.requires_grad else None
        grad_x = None
        if t.requires_grad:
            d_hat = g * gamma.data[None, :, None, None]
            if training:
                sum_d = d_hat.sum(axis=axes, keepdims=True)
                sum_dx = (d_hat * x_hat).sum(axis=axes, keepdims=True)
                grad_x = inv_std[None, :, None, None] / count * (count * d_hat - sum_d - x_hat * sum_dx)
            else:
                grad_x = d_hat * inv_std[None, :, None, None]
        return grad_x, grad_gamma, grad_beta

    return make_result(out.astype(t.dtype), (t, gamma, beta), "batchnorm", backward)


def dropout(t: Tensor, p: float, training: bool, rng: Optional[np.random.Generator] = None) -> Tensor:
    """Inverted dropout: keep with probability 1 - p and rescale by 1 / (1 - p)"""
    if not 0.0 <= p < 1.0:
        raise InvalidInputError(f"dropout probability must lie in [0, 1), got {p}")
    t = as_tensor(t)
    if not training or p == 0.0:
        return t
    if rng is None:
        raise InvalidInputError("dropout in training mode needs a random generator")
    mask = (rng.random(t.shape) >= p).astype(t.dtype) / t.dtype.type(1.0 - p)
    return make_result(t.data * mask, (t,), "dropout", lambda g: (g * mask,))


def softmax_rows(t: Tensor) -> Tensor:
    """Row-wise softmax of an (N, C) matrix"""
    t = as_tensor(t)
    if t.ndim != 2:
        raise DimensionError("softmax_rows expects a matrix", t.shape)
    shifted = t.data - t.data.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)

    def backward(g):
        return (probs * (g - (g * probs).sum(axis=1, keepdims=True)),)

    return make_result(probs, (t,), "softmax_rows", backward)
