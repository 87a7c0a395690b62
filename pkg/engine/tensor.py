"""
Tensor - N-dimensional array with reverse-mode automatic differentiation

Responsibility: hold a numpy buffer plus its gradient, record every
differentiable operation on a tape (TapeNode per result) and replay the tape
in reverse topological order on backward().

Interface:
  Tensor(data, requires_grad=False, dtype=None)
  t.backward()            loss must be a scalar; each tape node visited once
  add / sub / mul / scale / neg / matmul / reshape / flatten / sum / mean /
  log / clamp_min / concat
  no_grad()               context manager disabling tape recording
  set_finite_checks(bool) NaN/Inf detection after every forward op

Layout convention for images is NCHW, row-major. The learning stack runs in
float32; float64 tensors are used for finite-difference shadow checks.
Elementwise binary ops accept equal shapes or a scalar operand only.
"""

import logging
import threading
from contextlib import contextmanager
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import (
    DimensionError,
    GradientAccumulationError,
    InvalidInputError,
    NonFiniteError,
)

logger = logging.getLogger(__name__)

DEFAULT_DTYPE = np.float32
_FLOAT_DTYPES = (np.float32, np.float64)

Number = Union[int, float]
BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class _EngineState(threading.local):
    grad_enabled: bool = True
    finite_checks: bool = True


_state = _EngineState()


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable tape recording in the current thread"""
    previous = _state.grad_enabled
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


def is_grad_enabled() -> bool:
    return _state.grad_enabled


def set_finite_checks(enabled: bool) -> None:
    """Toggle NaN/Inf detection after forward ops in the current thread"""
    _state.finite_checks = bool(enabled)


class TapeNode:
    """One recorded operation: identifier, inputs and the rule mapping dL/dout to dL/dinputs"""
    __slots__ = ("op", "inputs", "backward_fn")

    def __init__(self, op: str, inputs: Tuple["Tensor", ...], backward_fn: BackwardFn):
        self.op = op
        self.inputs = inputs
        self.backward_fn = backward_fn

    def __repr__(self) -> str:
        return f"TapeNode(op={self.op!r}, inputs={len(self.inputs)})"


class Tensor:
    """Numpy-backed tensor with gradient tracking"""

    __array_priority__ = 100  # make ndarray <op> Tensor defer to Tensor

    def __init__(self, data, requires_grad: bool = False, dtype=None, name: Optional[str] = None):
        if dtype is None:
            if isinstance(data, np.ndarray) and data.dtype.type in _FLOAT_DTYPES:
                dtype = data.dtype
            else:
                dtype = DEFAULT_DTYPE
        self.data: np.ndarray = np.asarray(data, dtype=dtype)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._node: Optional[TapeNode] = None
        self._consumed = False

    # ---- properties ----

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def node(self) -> Optional[TapeNode]:
        return self._node

    @property
    def is_leaf(self) -> bool:
        return self._node is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float("nan")

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = None

    def __len__(self) -> int:
        return self.data.shape[0]

    def __repr__(self) -> str:
        op = f", op={self._node.op}" if self._node else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, requires_grad={self.requires_grad}{op})"

    # ---- autodiff ----

    def _topological_order(self) -> List["Tensor"]:
        """Post-order over tensors reachable through requires_grad edges"""
        order: List[Tensor] = []
        visited = set()
        stack: List[Tuple[Tensor, bool]] = [(self, False)]
        while stack:
            tensor, expanded = stack.pop()
            if expanded:
                order.append(tensor)
                continue
            if id(tensor) in visited:
                continue
            visited.add(id(tensor))
            stack.append((tensor, True))
            if tensor._node is not None:
                for parent in tensor._node.inputs:
                    if parent.requires_grad and id(parent) not in visited:
                        stack.append((parent, False))
        return order

    def backward(self) -> None:
        """
        Populate .grad of every requires_grad tensor reachable on the tape

        Raises:
            InvalidInputError: loss is not a scalar or carries no tape
            GradientAccumulationError: tape already consumed, or a leaf still
                holds a gradient from a previous backward
        """
        if self.data.size != 1:
            raise InvalidInputError(f"backward() needs a scalar loss, got shape {self.shape}")
        if not self.requires_grad:
            raise InvalidInputError("backward() called on a tensor without a gradient tape")
        if self._consumed:
            raise GradientAccumulationError("backward() already ran on this loss; rebuild the graph")

        order = self._topological_order()
        stale = [t for t in order if t.is_leaf and t.grad is not None]
        if stale:
            names = ", ".join(t.name or str(t.shape) for t in stale[:3])
            raise GradientAccumulationError(
                f"{len(stale)} leaf tensor(s) already hold gradients ({names}); call zero_grad() first"
            )

        pending = {id(self): np.ones_like(self.data)}
        for tensor in reversed(order):
            grad = pending.pop(id(tensor), None)
            if grad is None:
                continue
            tensor.grad = np.array(grad, dtype=tensor.dtype, copy=True) if tensor.is_leaf else grad
            node = tensor._node
            if node is None:
                continue
            for parent, parent_grad in zip(node.inputs, node.backward_fn(grad)):
                if parent_grad is None or not parent.requires_grad:
                    continue
                if parent_grad.shape != parent.shape:
                    parent_grad = np.reshape(parent_grad, parent.shape)
                key = id(parent)
                pending[key] = pending[key] + parent_grad if key in pending else parent_grad
        self._consumed = True

    # ---- operator sugar ----

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, 1.0 / other)
        raise InvalidInputError("Only division by a Python scalar is supported")

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def sum(self) -> "Tensor":
        return tensor_sum(self)

    def mean(self) -> "Tensor":
        return mean(self)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)


# ---- construction helpers ----

def as_tensor(value, dtype=None) -> Tensor:
    """Wrap arrays/scalars as constant tensors; tensors pass through"""
    if isinstance(value, Tensor):
        return value
    return Tensor(value, requires_grad=False, dtype=dtype)


def _check_finite(data: np.ndarray, op: str) -> None:
    if _state.finite_checks and not np.all(np.isfinite(data)):
        bad = int(np.count_nonzero(~np.isfinite(data)))
        raise NonFiniteError(f"{op} produced {bad} non-finite value(s)")


def make_result(data: np.ndarray, inputs: Sequence[Tensor], op: str, backward_fn: BackwardFn) -> Tensor:
    """Wrap an op output, recording a tape node when any input requires grad"""
    _check_finite(data, op)
    out = Tensor(data, dtype=data.dtype)
    if _state.grad_enabled and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        out._node = TapeNode(op, tuple(inputs), backward_fn)
    return out


def _is_scalar(t: Tensor) -> bool:
    return t.data.ndim == 0 or t.data.size == 1 and t.data.ndim <= 1


def _binary_operands(a, b, op: str) -> Tuple[Tensor, Tensor]:
    dtype = next((t.dtype for t in (a, b) if isinstance(t, Tensor)), None)
    a, b = as_tensor(a, dtype), as_tensor(b, dtype)
    if a.shape != b.shape and not (_is_scalar(a) or _is_scalar(b)):
        raise DimensionError(f"{op}: operands must share a shape or one must be scalar", a.shape, b.shape)
    return a, b


def _reduce_to(grad: np.ndarray, target: Tensor) -> np.ndarray:
    """Sum a broadcast gradient back onto a scalar operand"""
    if grad.shape == target.shape:
        return grad
    return np.asarray(grad.sum(), dtype=target.dtype).reshape(target.shape)


# ---- elementwise and structural ops ----

def add(a, b) -> Tensor:
    a, b = _binary_operands(a, b, "add")
    data = a.data + b.data
    return make_result(data, (a, b), "add", lambda g: (_reduce_to(g, a), _reduce_to(g, b)))


def sub(a, b) -> Tensor:
    a, b = _binary_operands(a, b, "sub")
    data = a.data - b.data
    return make_result(data, (a, b), "sub", lambda g: (_reduce_to(g, a), _reduce_to(-g, b)))


def mul(a, b) -> Tensor:
    a, b = _binary_operands(a, b, "mul")
    data = a.data * b.data

    def backward(g):
        return _reduce_to(g * b.data, a), _reduce_to(g * a.data, b)

    return make_result(data, (a, b), "mul", backward)


def scale(t: Tensor, factor: Number) -> Tensor:
    t = as_tensor(t)
    factor = t.dtype.type(factor)
    return make_result(t.data * factor, (t,), "scale", lambda g: (g * factor,))


def neg(t: Tensor) -> Tensor:
    return scale(t, -1.0)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b, a.dtype if isinstance(a, Tensor) else None)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError("matmul: inner dimensions differ", a.shape, b.shape)
    data = a.data @ b.data

    def backward(g):
        grad_a = g @ b.data.T if a.requires_grad else None
        grad_b = a.data.T @ g if b.requires_grad else None
        return grad_a, grad_b

    return make_result(data, (a, b), "matmul", backward)


def reshape(t: Tensor, shape: Sequence[int]) -> Tensor:
    t = as_tensor(t)
    try:
        data = t.data.reshape(tuple(shape))
    except ValueError:
        raise DimensionError("reshape: incompatible element count", t.shape, tuple(shape)) from None
    original = t.shape
    return make_result(data, (t,), "reshape", lambda g: (g.reshape(original),))


def flatten(t: Tensor) -> Tensor:
    """(N, ...) -> (N, prod(...))"""
    t = as_tensor(t)
    if t.ndim < 1:
        raise DimensionError("flatten needs at least one axis", t.shape)
    return reshape(t, (t.shape[0], -1))


def tensor_sum(t: Tensor) -> Tensor:
    t = as_tensor(t)
    data = np.asarray(t.data.sum(), dtype=t.dtype)
    return make_result(data, (t,), "sum", lambda g: (np.full(t.shape, g, dtype=t.dtype),))


def mean(t: Tensor) -> Tensor:
    t = as_tensor(t)
    count = max(t.size, 1)
    data = np.asarray(t.data.mean(), dtype=t.dtype)
    return make_result(data, (t,), "mean", lambda g: (np.full(t.shape, g / count, dtype=t.dtype),))


def log(t: Tensor) -> Tensor:
    t = as_tensor(t)
    if np.any(t.data <= 0):
        raise NonFiniteError("log of a non-positive value")
    return make_result(np.log(t.data), (t,), "log", lambda g: (g / t.data,))


def clamp_min(t: Tensor, floor: float) -> Tensor:
    """max(t, floor); zero gradient where the floor is active"""
    t = as_tensor(t)
    data = np.maximum(t.data, t.dtype.type(floor))
    passed = t.data >= floor
    return make_result(data, (t,), "clamp_min", lambda g: (g * passed,))


def concat(tensors: Sequence[Tensor], axis: int = 1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise InvalidInputError("concat needs at least one tensor")
    reference = tensors[0].shape
    for t in tensors[1:]:
        if t.ndim != len(reference) or any(
            s != r for i, (s, r) in enumerate(zip(t.shape, reference)) if i != axis % len(reference)
        ):
            raise DimensionError("concat: shapes differ off the concatenation axis", reference, t.shape)
    data = np.concatenate([t.data for t in tensors], axis=axis)
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return make_result(data, tensors, "concat", backward)
