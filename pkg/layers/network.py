"""
Network - Assembly of the Chebyshev CNN from a NetworkSpec

Layer sequence (both convolution stages share the same block):

  Conv(w1, K1) -> BN -> ReLU -> MaxPool -> Conv(w2, K2) -> BN -> ReLU -> MaxPool
  -> Flatten -> Dense(dense_width) -> Dropout(p) -> Dense(classes) -> Softmax

Conv is ChebConv2d for conv_kind "cheb" and Conv2d for "standard".

Interface:
  build_network(spec, seed, dtype) -> ChebCNN
  forward(model, batch, training) -> (logits, probs)
  describe_network(model) -> List[LayerSpec]
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np

from core.config import NetworkSpec
from core.errors import DimensionError, InvalidInputError
from core.rng import make_rng
from engine import functional as F
from engine.tensor import DEFAULT_DTYPE, Tensor, as_tensor, reshape
from .modules import (
    BatchNorm2d,
    ChebConv2d,
    Conv2d,
    Dense,
    Dropout,
    Flatten,
    MaxPool2x2,
    Module,
    ReLU,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChebConvSpec:
    """Shape of one Chebyshev convolution: K + 1 filter banks of out x in x k x k"""
    in_channels: int
    out_channels: int
    order: int
    kernel: int = 3

    @property
    def num_weight_tensors(self) -> int:
        return self.order + 1

    @property
    def num_parameters(self) -> int:
        return (self.order + 1) * self.out_channels * self.in_channels * self.kernel ** 2 + self.out_channels


@dataclass
class LayerSpec:
    """One row of the layer ledger"""
    name: str
    kind: str
    output_shape: Tuple[int, ...]
    num_parameters: int
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        row = asdict(self)
        row["output_shape"] = list(self.output_shape)
        return row


class ChebCNN(Module):
    """Sequential classifier built by build_network()"""

    def __init__(self, spec: NetworkSpec, layers: List[Tuple[str, Module]]):
        super().__init__()
        self.spec = spec
        self.layer_names: List[str] = []
        for name, layer in layers:
            self.add_module(name, layer)
            self.layer_names.append(name)

    @property
    def layers(self) -> List[Tuple[str, Module]]:
        return [(name, self._children[name]) for name in self.layer_names]

    def conv_layers(self) -> List[Module]:
        return [m for _, m in self.layers if isinstance(m, (ChebConv2d, Conv2d))]

    def _check_batch(self, batch: Tensor) -> Tensor:
        side = self.spec.side
        if batch.ndim == 3 and self.spec.in_channels == 1:
            batch = reshape(batch, (batch.shape[0], 1, batch.shape[1], batch.shape[2]))
        expected = (self.spec.in_channels, side, side)
        if batch.ndim != 4 or batch.shape[1:] != expected:
            raise DimensionError("network input must be N x C x side x side", batch.shape, ("N",) + expected)
        return batch

    def logits(self, batch) -> Tensor:
        x = self._check_batch(as_tensor(batch, self._dtype()))
        for _, layer in self.layers:
            x = layer(x)
        return x

    def forward(self, batch) -> Tuple[Tensor, Tensor]:
        logits = self.logits(batch)
        return logits, F.softmax_rows(logits)

    def __call__(self, batch) -> Tuple[Tensor, Tensor]:
        return self.forward(batch)

    def _dtype(self):
        params = self.parameters()
        return params[0].dtype if params else DEFAULT_DTYPE


def conv_specs(spec: NetworkSpec) -> List[ChebConvSpec]:
    """Shapes of the two convolution stages"""
    in_channels = (spec.in_channels, spec.widths[0])
    return [ChebConvSpec(in_channels[s], spec.widths[s], spec.orders[s], spec.kernel) for s in range(2)]


def _conv_block(spec: NetworkSpec, conv: ChebConvSpec, rng, dtype) -> Module:
    if spec.conv_kind == "standard":
        return Conv2d(conv.in_channels, conv.out_channels, conv.kernel, rng=rng, dtype=dtype)
    return ChebConv2d(conv.in_channels, conv.out_channels, conv.order, conv.kernel, rng=rng, dtype=dtype)


def build_network(spec: NetworkSpec, seed: int = 0, dtype=DEFAULT_DTYPE) -> ChebCNN:
    """
    Instantiate the classifier with He-initialized weights

    Raises:
        InvalidInputError: side not divisible by 4
    """
    if spec.side % 4:
        raise InvalidInputError(f"input side must be divisible by 4 (two 2x2 pools), got {spec.side}")

    init_rng = make_rng(seed, "init")
    reduced = spec.side // 4
    flat_width = spec.widths[1] * reduced * reduced

    layers: List[Tuple[str, Module]] = []
    for stage, conv in enumerate(conv_specs(spec), start=1):
        layers += [
            (f"conv{stage}", _conv_block(spec, conv, init_rng, dtype)),
            (f"bn{stage}", BatchNorm2d(conv.out_channels, dtype=dtype)),
            (f"relu{stage}", ReLU()),
            (f"pool{stage}", MaxPool2x2()),
        ]
    layers += [
        ("flatten", Flatten()),
        ("dense1", Dense(flat_width, spec.dense_width, rng=init_rng, dtype=dtype)),
        ("dropout", Dropout(spec.dropout, rng=make_rng(seed, "dropout"))),
        ("dense2", Dense(spec.dense_width, spec.num_classes, rng=init_rng, dtype=dtype)),
    ]

    model = ChebCNN(spec, layers)
    logger.debug(
        f"Built {spec.conv_kind} network: side={spec.side}, flatten={flat_width}, "
        f"params={model.num_parameters():,}"
    )
    return model


def forward(model: ChebCNN, batch, training: bool) -> Tuple[Tensor, Tensor]:
    """Switch the model to training or evaluation mode and run it"""
    model.train(training)
    return model(batch)


def describe_network(model: ChebCNN) -> List[LayerSpec]:
    """Layer ledger: output shape and parameter count of every layer, softmax last"""
    spec = model.spec
    shape: Tuple[int, ...] = (spec.in_channels, spec.side, spec.side)
    rows: List[LayerSpec] = []
    for name, layer in model.layers:
        detail: Dict[str, Any] = {}
        if isinstance(layer, ChebConv2d):
            kind = "cheb_conv"
            shape = (layer.out_channels,) + shape[1:]
            detail = {"order": layer.order, "kernel": layer.kernel, "branches": layer.order + 1}
        elif isinstance(layer, Conv2d):
            kind = "conv"
            shape = (layer.out_channels,) + shape[1:]
        elif isinstance(layer, BatchNorm2d):
            kind = "batchnorm"
        elif isinstance(layer, ReLU):
            kind = "relu"
        elif isinstance(layer, MaxPool2x2):
            kind = "maxpool"
            shape = (shape[0], shape[1] // 2, shape[2] // 2)
        elif isinstance(layer, Flatten):
            kind = "flatten"
            shape = (int(np.prod(shape)),)
        elif isinstance(layer, Dense):
            kind = "dense"
            shape = (layer.out_features,)
        elif isinstance(layer, Dropout):
            kind = "dropout"
            detail = {"p": layer.p}
        else:
            kind = type(layer).__name__.lower()
        rows.append(LayerSpec(name, kind, shape, layer.num_parameters(), detail))
    rows.append(LayerSpec("softmax", "softmax", shape, 0))
    return rows


def render_ledger(rows: List[LayerSpec]) -> str:
    """Aligned text table of a layer ledger with a total line"""
    lines = [f"{'layer':<10} {'kind':<10} {'output':<16} {'params':>12}", "-" * 51]
    for row in rows:
        shape = "x".join(str(s) for s in row.output_shape)
        lines.append(f"{row.name:<10} {row.kind:<10} {shape:<16} {row.num_parameters:>12,}")
    lines.append("-" * 51)
    lines.append(f"{'total':<38} {sum(r.num_parameters for r in rows):>12,}")
    return "\n".join(lines)
