"""
Modules - Parameterized layers on top of the tensor engine

Responsibility: parameter/buffer bookkeeping (registration order is the
serialization order), train/eval mode, state dicts, and the concrete layers:

  ChebConv2d   F_out = sum_{k=0}^{K} W_k * T_k(tanh(F_in)) + b
  Conv2d       plain 3x3 convolution (standard-convolution baseline)
  BatchNorm2d, ReLU, MaxPool2x2, Flatten, Dense, Dropout

Weights use He initialization, normal with std sqrt(2 / fan_in); biases and
batchnorm beta start at zero, batchnorm gamma at one.
"""

import copy
import logging
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from core.errors import DimensionError, InvalidInputError
from engine import functional as F
from engine.tensor import Tensor, concat, flatten, mul, scale, sub

logger = logging.getLogger(__name__)


class Module:
    """Base class: ordered parameters, buffers and child modules"""

    def __init__(self):
        self.training = True
        self._parameters: Dict[str, Tensor] = {}
        self._decay: Dict[str, bool] = {}
        self._buffers: Dict[str, np.ndarray] = {}
        self._children: Dict[str, "Module"] = {}

    # ---- registration ----

    def register_parameter(self, name: str, tensor: Tensor, decay: bool = False) -> Tensor:
        tensor.requires_grad = True
        tensor.name = name
        self._parameters[name] = tensor
        self._decay[name] = decay
        return tensor

    def register_buffer(self, name: str, array: np.ndarray) -> np.ndarray:
        self._buffers[name] = array
        return array

    def add_module(self, name: str, module: "Module") -> "Module":
        self._children[name] = module
        return module

    # ---- traversal ----

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Tensor]]:
        for name, tensor in self._parameters.items():
            yield f"{prefix}{name}", tensor
        for child_name, child in self._children.items():
            yield from child.named_parameters(f"{prefix}{child_name}.")

    def parameters(self) -> List[Tensor]:
        return [t for _, t in self.named_parameters()]

    def decayed_parameters(self) -> List[Tensor]:
        """Weights subject to L2 regularization (convolution and dense weights only)"""
        found = [t for name, t in self._parameters.items() if self._decay[name]]
        for child in self._children.values():
            found.extend(child.decayed_parameters())
        return found

    def named_buffers(self, prefix: str = "") -> Iterator[Tuple[str, np.ndarray]]:
        for name, array in self._buffers.items():
            yield f"{prefix}{name}", array
        for child_name, child in self._children.items():
            yield from child.named_buffers(f"{prefix}{child_name}.")

    def buffers(self) -> List[np.ndarray]:
        return [a for _, a in self.named_buffers()]

    def modules(self) -> Iterator["Module"]:
        yield self
        for child in self._children.values():
            yield from child.modules()

    def num_parameters(self) -> int:
        return int(sum(t.size for t in self.parameters()))

    # ---- mode / state ----

    def train(self, mode: bool = True) -> "Module":
        for module in self.modules():
            module.training = mode
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def zero_grad(self) -> None:
        for t in self.parameters():
            t.zero_grad()

    def state_dict(self) -> Dict[str, np.ndarray]:
        """Copies of all parameters and buffers, in registration order"""
        state = {name: t.data.copy() for name, t in self.named_parameters()}
        state.update({name: array.copy() for name, array in self.named_buffers()})
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        """Copy values in place; every entry must exist with an identical shape"""
        targets: Dict[str, np.ndarray] = {name: t.data for name, t in self.named_parameters()}
        targets.update(dict(self.named_buffers()))
        missing = sorted(set(targets) - set(state))
        unexpected = sorted(set(state) - set(targets))
        if missing or unexpected:
            raise InvalidInputError(f"State mismatch: missing={missing[:5]} unexpected={unexpected[:5]}")
        for name, target in targets.items():
            source = np.asarray(state[name])
            if source.shape != target.shape:
                raise DimensionError(f"State entry '{name}' has the wrong shape", source.shape, target.shape)
            target[...] = source

    def astype(self, dtype) -> "Module":
        """Convert parameters and buffers in place (float64 shadow copies for gradient checks)"""
        for module in self.modules():
            for tensor in module._parameters.values():
                tensor.data = tensor.data.astype(dtype)
                tensor.grad = None
            for name, array in module._buffers.items():
                module._buffers[name] = array.astype(dtype)
        return self

    def clone(self) -> "Module":
        """Independent deep copy (read-only evaluation on other threads)"""
        return copy.deepcopy(self)

    def forward(self, x: Tensor) -> Tensor:
        raise NotImplementedError

    def __call__(self, x: Tensor) -> Tensor:
        return self.forward(x)


def he_normal(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int, dtype=np.float32) -> np.ndarray:
    """Normal(0, sqrt(2 / fan_in)) initialization"""
    return (rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)).astype(dtype)


def _check_channels(x: Tensor, expected: int, layer: str) -> None:
    if x.ndim != 4 or x.shape[1] != expected:
        raise DimensionError(f"{layer}: expected NCHW input with {expected} channel(s)", x.shape)


def chebyshev_branches(s: Tensor, order: int) -> List[Tensor]:
    """T_0(s)..T_order(s) elementwise via T_{k+1} = 2 s T_k - T_{k-1}, all on the tape"""
    branches = [Tensor(np.ones(s.shape, dtype=s.dtype))]
    if order >= 1:
        branches.append(s)
    for k in range(1, order):
        branches.append(sub(scale(mul(s, branches[k]), 2.0), branches[k - 1]))
    return branches


class ChebConv2d(Module):
    """Chebyshev convolution: one k x k filter bank per polynomial order"""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        order: int,
        kernel: int = 3,
        rng: Optional[np.random.Generator] = None,
        dtype=np.float32
    ):
        super().__init__()
        if order < 0:
            raise InvalidInputError(f"Chebyshev order must be >= 0, got {order}")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.order = order
        self.kernel = kernel
        # Test hook: identity instead of tanh before the polynomial
        self.squash = True

        rng = rng if rng is not None else np.random.default_rng(0)
        fan_in = (order + 1) * in_channels * kernel * kernel
        shape = (out_channels, in_channels, kernel, kernel)
        self.weights: List[Tensor] = [
            self.register_parameter(f"weight_{k}", Tensor(he_normal(rng, shape, fan_in, dtype)), decay=True)
            for k in range(order + 1)
        ]
        self.bias = self.register_parameter("bias", Tensor(np.zeros(out_channels, dtype=dtype)))

    def expected_parameters(self) -> int:
        return (self.order + 1) * self.out_channels * self.in_channels * self.kernel ** 2 + self.out_channels

    def branches(self, x: Tensor) -> List[Tensor]:
        s = F.tanh(x) if self.squash else x
        return chebyshev_branches(s, self.order)

    def forward(self, x: Tensor) -> Tensor:
        _check_channels(x, self.in_channels, "ChebConv2d")
        branches = self.branches(x)
        if len(branches) == 1:
            return F.conv2d(branches[0], self.weights[0], self.bias)
        # sum_k conv(W_k, T_k) == conv(concat_k W_k, concat_k T_k) along the channel axis
        return F.conv2d(concat(branches, axis=1), concat(self.weights, axis=1), self.bias)


class Conv2d(Module):
    """Standard same-padded convolution"""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel: int = 3,
        rng: Optional[np.random.Generator] = None,
        dtype=np.float32
    ):
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        rng = rng if rng is not None else np.random.default_rng(0)
        shape = (out_channels, in_channels, kernel, kernel)
        self.weight = self.register_parameter(
            "weight", Tensor(he_normal(rng, shape, in_channels * kernel * kernel, dtype)), decay=True
        )
        self.bias = self.register_parameter("bias", Tensor(np.zeros(out_channels, dtype=dtype)))

    def forward(self, x: Tensor) -> Tensor:
        _check_channels(x, self.in_channels, "Conv2d")
        return F.conv2d(x, self.weight, self.bias)


class BatchNorm2d(Module):
    """Per-channel batch normalization (momentum 0.1, eps 1e-5)"""

    def __init__(self, channels: int, momentum: float = F.BN_MOMENTUM, eps: float = F.BN_EPS, dtype=np.float32):
        super().__init__()
        self.channels = channels
        self.momentum = momentum
        self.eps = eps
        self.gamma = self.register_parameter("gamma", Tensor(np.ones(channels, dtype=dtype)))
        self.beta = self.register_parameter("beta", Tensor(np.zeros(channels, dtype=dtype)))
        self.register_buffer("running_mean", np.zeros(channels, dtype=dtype))
        self.register_buffer("running_var", np.ones(channels, dtype=dtype))

    def forward(self, x: Tensor) -> Tensor:
        _check_channels(x, self.channels, "BatchNorm2d")
        return F.batchnorm(
            x, self.gamma, self.beta,
            self._buffers["running_mean"], self._buffers["running_var"],
            training=self.training, momentum=self.momentum, eps=self.eps,
        )


class ReLU(Module):
    def forward(self, x: Tensor) -> Tensor:
        return F.relu(x)


class MaxPool2x2(Module):
    def forward(self, x: Tensor) -> Tensor:
        return F.maxpool2x2(x)


class Flatten(Module):
    def forward(self, x: Tensor) -> Tensor:
        return flatten(x)


class Dense(Module):
    """Fully connected layer, weight shaped (in, out)"""

    def __init__(
        self,
        in_features: int,
        out_features: int,
        rng: Optional[np.random.Generator] = None,
        dtype=np.float32
    ):
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        rng = rng if rng is not None else np.random.default_rng(0)
        self.weight = self.register_parameter(
            "weight", Tensor(he_normal(rng, (in_features, out_features), in_features, dtype)), decay=True
        )
        self.bias = self.register_parameter("bias", Tensor(np.zeros(out_features, dtype=dtype)))

    def forward(self, x: Tensor) -> Tensor:
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise DimensionError(f"Dense: expected (N, {self.in_features}) input", x.shape)
        return F.dense(x, self.weight, self.bias)


class Dropout(Module):
    """Inverted dropout drawing masks from the module's own generator"""

    def __init__(self, p: float = 0.5, rng: Optional[np.random.Generator] = None):
        super().__init__()
        if not 0.0 <= p < 1.0:
            raise InvalidInputError(f"dropout probability must lie in [0, 1), got {p}")
        self.p = p
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def forward(self, x: Tensor) -> Tensor:
        return F.dropout(x, self.p, training=self.training, rng=self.rng)
