"""Minimal reverse-mode autodiff over float64 numpy arrays.

Only the operations the parser needs: matmul, broadcast add/sub/mul, row
gather, entry select, concat/stack, relu, row-wise layer norm and softmax,
softplus, and scalar sum.  Each op records a closure that accumulates
gradients into its inputs; Tensor.backward() runs them in reverse
topological order.
"""

import contextlib

import numpy as np

from .errors import NumericError

_grad_enabled = [True]

LN_EPS = 1e-5


@contextlib.contextmanager
def no_grad():
    _grad_enabled.append(False)
    try:
        yield
    finally:
        _grad_enabled.pop()


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "name")

    def __init__(self, data, requires_grad=False, parents=(), backward=None, name=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = parents
        self._backward = backward
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    def item(self):
        return float(self.data)

    def _accumulate(self, grad):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    def backward(self):
        if self.data.ndim != 0:
            raise ValueError("backward() needs a scalar, got shape %s" % (self.shape,))
        topo = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                stack.append((parent, False))
        self._accumulate(np.ones_like(self.data))
        for node in reversed(topo):
            if node._backward is not None:
                node._backward()

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __repr__(self):
        return "Tensor(shape=%s%s)" % (self.shape, ", name=%r" % self.name if self.name else "")


def _wrap(value):
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=np.float64))


def _make(data, parents, backward):
    if _grad_enabled[-1] and any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, parents=tuple(parents), backward=None if backward is None else backward)
    return Tensor(data)


def _unbroadcast(grad, shape):
    """Sum gradient over axes that numpy broadcasting expanded."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, d in enumerate(shape) if d == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _check_shapes(op, a, b):
    raise ValueError("%s: incompatible shapes %s and %s" % (op, a.shape, b.shape))


def add(a, b):
    a, b = _wrap(a), _wrap(b)
    try:
        data = a.data + b.data
    except ValueError:
        _check_shapes("add", a, b)
    out = _make(data, (a, b), None)

    def backward():
        if a.requires_grad:
            a._accumulate(_unbroadcast(out.grad, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(out.grad, b.data.shape))

    out._backward = backward if out.requires_grad else None
    return out


def sub(a, b):
    a, b = _wrap(a), _wrap(b)
    try:
        data = a.data - b.data
    except ValueError:
        _check_shapes("sub", a, b)
    out = _make(data, (a, b), None)

    def backward():
        if a.requires_grad:
            a._accumulate(_unbroadcast(out.grad, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(-out.grad, b.data.shape))

    out._backward = backward if out.requires_grad else None
    return out


def mul(a, b):
    a, b = _wrap(a), _wrap(b)
    try:
        data = a.data * b.data
    except ValueError:
        _check_shapes("mul", a, b)
    out = _make(data, (a, b), None)

    def backward():
        if a.requires_grad:
            a._accumulate(_unbroadcast(out.grad * b.data, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(out.grad * a.data, b.data.shape))

    out._backward = backward if out.requires_grad else None
    return out


def matmul(a, b):
    """Matrix product for (m,k)@(k,n), (m,k)@(k,) and (k,)@(k,n)."""
    a, b = _wrap(a), _wrap(b)
    if a.data.ndim not in (1, 2) or b.data.ndim not in (1, 2):
        _check_shapes("matmul", a, b)
    try:
        data = a.data @ b.data
    except ValueError:
        _check_shapes("matmul", a, b)
    out = _make(data, (a, b), None)

    def backward():
        g = out.grad
        if a.data.ndim == 2 and b.data.ndim == 2:
            if a.requires_grad:
                a._accumulate(g @ b.data.T)
            if b.requires_grad:
                b._accumulate(a.data.T @ g)
        elif a.data.ndim == 2:  # (m,k) @ (k,) -> (m,)
            if a.requires_grad:
                a._accumulate(np.outer(g, b.data))
            if b.requires_grad:
                b._accumulate(a.data.T @ g)
        else:  # (k,) @ (k,n) -> (n,)
            if a.requires_grad:
                a._accumulate(b.data @ g)
            if b.requires_grad:
                b._accumulate(np.outer(a.data, g))

    out._backward = backward if out.requires_grad else None
    return out


def transpose(a):
    out = _make(a.data.T, (a,), None)

    def backward():
        if a.requires_grad:
            a._accumulate(out.grad.T)

    out._backward = backward if out.requires_grad else None
    return out


def rows(a, indices):
    """Gather rows (embedding lookup); gradient scatters back with np.add.at."""
    idx = np.asarray(indices, dtype=np.intp)
    out = _make(a.data[idx], (a,), None)

    def backward():
        if a.requires_grad:
            if a.grad is None:
                a.grad = np.zeros_like(a.data)
            np.add.at(a.grad, idx, out.grad)

    out._backward = backward if out.requires_grad else None
    return out


def rowvec(a, i):
    """Row i of a matrix as a vector."""
    out = _make(a.data[i], (a,), None)

    def backward():
        if a.requires_grad:
            if a.grad is None:
                a.grad = np.zeros_like(a.data)
            a.grad[i] += out.grad

    out._backward = backward if out.requires_grad else None
    return out


def select(a, row_idx, col_idx):
    """Gather scalar entries a[r, c] into a vector."""
    r = np.asarray(row_idx, dtype=np.intp)
    c = np.asarray(col_idx, dtype=np.intp)
    out = _make(a.data[r, c], (a,), None)

    def backward():
        if a.requires_grad:
            if a.grad is None:
                a.grad = np.zeros_like(a.data)
            np.add.at(a.grad, (r, c), out.grad)

    out._backward = backward if out.requires_grad else None
    return out


def cols(a, lo, hi):
    """Slice columns [lo, hi) of a matrix."""
    out = _make(a.data[:, lo:hi], (a,), None)

    def backward():
        if a.requires_grad:
            if a.grad is None:
                a.grad = np.zeros_like(a.data)
            a.grad[:, lo:hi] += out.grad

    out._backward = backward if out.requires_grad else None
    return out


def concat(tensors, axis=0):
    tensors = [_wrap(t) for t in tensors]
    data = np.concatenate([t.data for t in tensors], axis=axis)
    out = _make(data, tensors, None)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward():
        for t, lo, hi in zip(tensors, offsets, offsets[1:]):
            if t.requires_grad:
                t._accumulate(np.take(out.grad, range(lo, hi), axis=axis))

    out._backward = backward if out.requires_grad else None
    return out


def stack_rows(tensors):
    """Stack equal-length vectors into a matrix, one per row."""
    tensors = [_wrap(t) for t in tensors]
    data = np.stack([t.data for t in tensors], axis=0)
    out = _make(data, tensors, None)

    def backward():
        for k, t in enumerate(tensors):
            if t.requires_grad:
                t._accumulate(out.grad[k])

    out._backward = backward if out.requires_grad else None
    return out


def relu(a):
    out = _make(np.maximum(a.data, 0.0), (a,), None)

    def backward():
        if a.requires_grad:
            a._accumulate(out.grad * (a.data > 0))

    out._backward = backward if out.requires_grad else None
    return out


def softplus(a):
    x = a.data
    data = np.where(x > 30.0, x, np.log1p(np.exp(np.minimum(x, 30.0))))
    out = _make(data, (a,), None)

    def backward():
        if a.requires_grad:
            a._accumulate(out.grad / (1.0 + np.exp(-x)))

    out._backward = backward if out.requires_grad else None
    return out


def softmax(a):
    """Softmax along the last axis, max-shifted for stability."""
    shifted = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=-1, keepdims=True)
    out = _make(s, (a,), None)

    def backward():
        if a.requires_grad:
            g = out.grad
            a._accumulate(s * (g - (g * s).sum(axis=-1, keepdims=True)))

    out._backward = backward if out.requires_grad else None
    return out


def layer_norm(a, gain, bias, eps=LN_EPS):
    """Normalize along the last axis, then apply the affine gain and bias."""
    x = a.data
    if gain.data.shape != x.shape[-1:] or bias.data.shape != x.shape[-1:]:
        raise ValueError("layer_norm: affine shapes %s/%s do not match input %s"
                         % (gain.data.shape, bias.data.shape, x.shape))
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x - mu) * inv
    out = _make(xhat * gain.data + bias.data, (a, gain, bias), None)

    def backward():
        g = out.grad
        if gain.requires_grad:
            gain._accumulate((g * xhat).reshape(-1, x.shape[-1]).sum(axis=0))
        if bias.requires_grad:
            bias._accumulate(g.reshape(-1, x.shape[-1]).sum(axis=0))
        if a.requires_grad:
            gx = g * gain.data
            a._accumulate(inv * (gx - gx.mean(axis=-1, keepdims=True)
                                 - xhat * (gx * xhat).mean(axis=-1, keepdims=True)))

    out._backward = backward if out.requires_grad else None
    return out


def total(a):
    """Sum of all entries, as a scalar tensor."""
    out = _make(np.asarray(a.data.sum()), (a,), None)

    def backward():
        if a.requires_grad:
            a._accumulate(np.full_like(a.data, out.grad))

    out._backward = backward if out.requires_grad else None
    return out


def zeros(shape):
    return Tensor(np.zeros(shape))


class ParamRegistry:
    """Named trainable tensors with deterministic iteration order."""

    FORMAT_VERSION = 1

    def __init__(self):
        self._params = {}

    def add(self, name, data):
        if name in self._params:
            raise ValueError("parameter %r already registered" % name)
        t = Tensor(np.array(data, dtype=np.float64), requires_grad=True, name=name)
        self._params[name] = t
        return t

    def __getitem__(self, name):
        return self._params[name]

    def __contains__(self, name):
        return name in self._params

    def __len__(self):
        return len(self._params)

    def names(self):
        return list(self._params)

    def items(self):
        return self._params.items()

    def tensors(self):
        return self._params.values()

    def zero_grads(self):
        for t in self._params.values():
            t.grad = None

    def check_finite(self):
        for name, t in self._params.items():
            if not np.all(np.isfinite(t.data)):
                raise NumericError("parameter %r is not finite" % name)

    def save(self, path):
        arrays = {"__format_version__": np.array([self.FORMAT_VERSION]),
                  "__order__": np.array(list(self._params), dtype="U")}
        for name, t in self._params.items():
            arrays["param/" + name] = t.data
        np.savez(path, **arrays)

    @classmethod
    def load(cls, path):
        with np.load(path) as archive:
            version = int(archive["__format_version__"][0])
            if version != cls.FORMAT_VERSION:
                raise NumericError("unsupported checkpoint format version %d" % version)
            registry = cls()
            for name in archive["__order__"]:
                registry.add(str(name), archive["param/" + str(name)])
        return registry


def grad_check(f, params, eps=1e-5, max_coords=200, rng=None):
    """Max relative error between reverse-mode and central-difference gradients.

    `f` must be a deterministic closure returning a scalar Tensor.  At most
    `max_coords` coordinates per parameter tensor are probed; relative error
    is |a - b| / max(1, |a|, |b|).
    """
    if rng is None:
        rng = np.random.default_rng(0)
    params.zero_grads()
    out = f()
    if not np.isfinite(out.data):
        raise NumericError("grad_check: non-finite loss")
    out.backward()
    analytic = {name: (np.zeros_like(t.data) if t.grad is None else t.grad.copy())
                for name, t in params.items()}
    params.zero_grads()

    worst = 0.0
    for name, t in params.items():
        flat = t.data.reshape(-1)
        size = flat.size
        if size == 0:
            continue
        if size <= max_coords:
            coords = np.arange(size)
        else:
            coords = rng.choice(size, size=max_coords, replace=False)
        for c in coords:
            orig = flat[c]
            flat[c] = orig + eps
            f_plus = float(f().data)
            flat[c] = orig - eps
            f_minus = float(f().data)
            flat[c] = orig
            if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
                raise NumericError("grad_check: non-finite loss at %s[%d]" % (name, c))
            fd = (f_plus - f_minus) / (2.0 * eps)
            a = analytic[name].reshape(-1)[c]
            err = abs(a - fd) / max(1.0, abs(a), abs(fd))
            if err > worst:
                worst = err
    return worst
