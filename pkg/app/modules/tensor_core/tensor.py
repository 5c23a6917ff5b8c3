import logging
import threading
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from app.config import settings
from app.utils.errors import ContractError, NumericalError

logger = logging.getLogger(__name__)

# Maps the output gradient to one gradient (or None) per input.
VJP = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Tensor:
    """Dense float64 array that remembers the operation that produced it.

    ``data`` is read-only after construction; only ``grad`` is ever mutated.
    """

    __slots__ = ("data", "requires_grad", "grad", "_node")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.array(data, dtype=np.float64, copy=True)
        arr.setflags(write=False)
        self.data = arr
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self._node: Optional["Node"] = None

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "Tensor":
        """Adopt a freshly computed array without copying it."""
        out = cls.__new__(cls)
        arr = np.asarray(arr, dtype=np.float64)
        if arr.flags.writeable:
            arr.setflags(write=False)
        out.data = arr
        out.requires_grad = False
        out.grad = None
        out._node = None
        return out

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return self._node is None

    def numpy(self) -> np.ndarray:
        return np.array(self.data, copy=True)

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor._wrap(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self, tape: Optional["Tape"] = None) -> None:
        backward(self, tape)

    # Arithmetic delegates to ops so every path records a node.
    def __add__(self, other):
        from .ops import add
        return add(self, other)

    def __radd__(self, other):
        from .ops import add
        return add(other, self)

    def __sub__(self, other):
        from .ops import sub
        return sub(self, other)

    def __rsub__(self, other):
        from .ops import sub
        return sub(other, self)

    def __mul__(self, other):
        from .ops import mul
        return mul(self, other)

    def __rmul__(self, other):
        from .ops import mul
        return mul(other, self)

    def __neg__(self):
        from .ops import neg
        return neg(self)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"


@dataclass(eq=False)
class Node:
    op: str
    output: Tensor
    inputs: tuple
    vjp: VJP


_local = threading.local()


def _tape_stack() -> list:
    stack = getattr(_local, "tapes", None)
    if stack is None:
        stack = []
        _local.tapes = stack
    return stack


def current_tape() -> Optional["Tape"]:
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tape:
    """Ordered record of operation nodes.

    Nodes are appended in creation order, which is a topological order.
    Tapes are thread-local: an active tape only sees operations executed on
    the thread that entered it.
    """

    def __init__(self):
        self.nodes: list[Node] = []

    def __enter__(self) -> "Tape":
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()

    def __len__(self) -> int:
        return len(self.nodes)

    @classmethod
    def from_graph(cls, root: Tensor) -> "Tape":
        """Rebuild a tape from the ancestry of ``root`` (iterative post-order)."""
        tape = cls()
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(root, False)]
        while stack:
            tensor, expanded = stack.pop()
            node = tensor._node
            if node is None:
                continue
            if expanded:
                tape.nodes.append(node)
                continue
            if id(tensor) in visited:
                continue
            visited.add(id(tensor))
            stack.append((tensor, True))
            for parent in reversed(node.inputs):
                if parent._node is not None and id(parent) not in visited:
                    stack.append((parent, False))
        return tape


def record(op: str, data: np.ndarray, inputs: Sequence[Tensor], vjp: VJP) -> Tensor:
    """Wrap an op result and, when any input needs gradients, record its node."""
    out = Tensor._wrap(data)
    if settings.debug_numerics and not np.all(np.isfinite(out.data)):
        raise NumericalError(f"{op} produced non-finite values")
    if any(t.requires_grad for t in inputs):
        out.requires_grad = True
        node = Node(op=op, output=out, inputs=tuple(inputs), vjp=vjp)
        out._node = node
        tape = current_tape()
        if tape is not None:
            tape.nodes.append(node)
    return out


def backward(loss: Tensor, tape: Optional[Tape] = None) -> None:
    """Populate ``grad`` on every requires_grad leaf in the ancestry of ``loss``.

    Contributions reaching a tensor along several paths are summed, and leaf
    gradients accumulate onto any ``grad`` already present.
    """
    if loss.data.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        return

    seed = np.ones_like(loss.data)
    if loss._node is None:
        loss.grad = seed if loss.grad is None else loss.grad + seed
        return

    if tape is None:
        tape = Tape.from_graph(loss)

    grads: dict[int, np.ndarray] = {id(loss): seed}
    leaves: dict[int, Tensor] = {}
    for node in reversed(tape.nodes):
        upstream = grads.pop(id(node.output), None)
        if upstream is None:
            continue
        for tensor, contribution in zip(node.inputs, node.vjp(upstream)):
            if contribution is None or not tensor.requires_grad:
                continue
            key = id(tensor)
            if key in grads:
                grads[key] = grads[key] + contribution
            else:
                grads[key] = contribution
            if tensor._node is None:
                leaves[key] = tensor

    for key, leaf in leaves.items():
        g = np.asarray(grads[key], dtype=np.float64).reshape(leaf.shape)
        leaf.grad = g.copy() if leaf.grad is None else leaf.grad + g
    logger.debug(f"Backward replayed {len(tape.nodes)} nodes into {len(leaves)} leaves")
