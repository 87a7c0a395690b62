# layers/__init__.py
"""
Neural-network layers and the assembled Chebyshev CNN.

Example:
    from layers import NetworkSpec, build_network, forward
    model = build_network(NetworkSpec(side=32), seed=0)
    logits, probs = forward(model, batch, training=False)
"""
from core.config import NetworkSpec
from .modules import (
    Module,
    ChebConv2d,
    Conv2d,
    BatchNorm2d,
    ReLU,
    MaxPool2x2,
    Flatten,
    Dense,
    Dropout,
    chebyshev_branches,
    he_normal,
)
from .network import (
    ChebConvSpec,
    LayerSpec,
    ChebCNN,
    build_network,
    conv_specs,
    forward,
    describe_network,
    render_ledger,
)

__all__ = [
    "NetworkSpec",
    "Module",
    "ChebConv2d",
    "Conv2d",
    "BatchNorm2d",
    "ReLU",
    "MaxPool2x2",
    "Flatten",
    "Dense",
    "Dropout",
    "chebyshev_branches",
    "he_normal",
    "ChebConvSpec",
    "LayerSpec",
    "ChebCNN",
    "build_network",
    "conv_specs",
    "forward",
    "describe_network",
    "render_ledger",
]
