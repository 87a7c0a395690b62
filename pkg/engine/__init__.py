# engine/__init__.py
"""
Tensor engine: NCHW tensors with reverse-mode automatic differentiation.

Example:
    from engine import Tensor
    x = Tensor([1.0, 2.0], requires_grad=True)
    (x * x).sum().backward()
    print(x.grad)            # [2. 4.]
"""
from .tensor import (
    Tensor,
    TapeNode,
    as_tensor,
    no_grad,
    is_grad_enabled,
    set_finite_checks,
    add,
    sub,
    mul,
    scale,
    neg,
    matmul,
    reshape,
    flatten,
    tensor_sum,
    mean,
    log,
    clamp_min,
    concat,
)
from .functional import conv2d, dense, relu, tanh, maxpool2x2, batchnorm, dropout, softmax_rows
from .gradcheck import GradCheckResult, gradcheck, numerical_gradient, relative_error

__all__ = [
    "Tensor", "TapeNode", "as_tensor", "no_grad", "is_grad_enabled", "set_finite_checks",
    "add", "sub", "mul", "scale", "neg", "matmul", "reshape", "flatten", "tensor_sum", "mean",
    "log", "clamp_min", "concat",
    "conv2d", "dense", "relu", "tanh", "maxpool2x2", "batchnorm", "dropout", "softmax_rows",
    "GradCheckResult", "gradcheck", "numerical_gradient", "relative_error",
]
