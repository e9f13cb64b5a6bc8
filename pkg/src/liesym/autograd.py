"""Reverse-mode differentiation over a recorded tape of array operations.

A :class:`Var` wraps an ndarray value. Operations on Vars record a closure
that maps the output adjoint to input adjoints; :meth:`Var.backward` replays
them in reverse topological order. Only the handful of operations the
trainer needs are provided.

Complex values use ``adjoint = dL/dRe + 1j * dL/dIm``. Adjoints flowing into
a real-valued Var keep only their real part.
"""

import numpy as np

from .linalg import ShapeError, SimilarityError, mat_exp as _mat_exp, mat_exp_vjp

# name -> callable, used by the gradient-check suite
REGISTRY = {}


def register(name):
    def deco(fn):
        REGISTRY[name] = fn
        return fn
    return deco


class Var:
    __slots__ = ("value", "grad", "parents", "backward_fn", "requires_grad")

    def __init__(self, value, parents=(), backward_fn=None, requires_grad=False):
        value = np.asarray(value)
        if not np.iscomplexobj(value):
            value = value.astype(np.float64, copy=False)
        self.value = value
        self.grad = None
        self.parents = parents
        self.backward_fn = backward_fn
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    def item(self):
        return self.value.item()

    def detach(self):
        return Var(self.value)

    def __repr__(self):
        return f"Var({self.value!r})"

    def zero_grad(self):
        self.grad = None

    def backward(self, seed=None):
        if seed is None:
            if self.value.size != 1:
                raise ShapeError("backward() without a seed needs a scalar output")
            seed = np.ones_like(self.value)
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node.parents:
                stack.append((p, False))
        grads = {id(self): np.asarray(seed)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.backward_fn is None:
                node.grad = g if node.grad is None else node.grad + g
                continue
            for p, pg in zip(node.parents, node.backward_fn(g)):
                if pg is None or not p.requires_grad:
                    continue
                pg = _match(pg, p.value)
                prev = grads.get(id(p))
                grads[id(p)] = pg if prev is None else prev + pg

    __add__ = lambda self, o: add(self, o)
    __radd__ = lambda self, o: add(o, self)
    __sub__ = lambda self, o: sub(self, o)
    __rsub__ = lambda self, o: sub(o, self)
    __mul__ = lambda self, o: mul(self, o)
    __rmul__ = lambda self, o: mul(o, self)
    __truediv__ = lambda self, o: div(self, o)
    __rtruediv__ = lambda self, o: div(o, self)
    __neg__ = lambda self: neg(self)
    __matmul__ = lambda self, o: matmul(self, o)
    __rmatmul__ = lambda self, o: matmul(o, self)

    def __getitem__(self, idx):
        return getitem(self, idx)


def param(value):
    """Leaf Var that accumulates a gradient."""
    return Var(np.array(value, copy=True), requires_grad=True)


def as_var(x):
    return x if isinstance(x, Var) else Var(x)


def _match(g, value):
    """Sum broadcast axes away and drop the imaginary part for real leaves."""
    g = np.asarray(g)
    if g.shape != value.shape:
        while g.ndim > value.ndim:
            g = g.sum(axis=0)
        for ax, n in enumerate(value.shape):
            if n == 1 and g.shape[ax] != 1:
                g = g.sum(axis=ax, keepdims=True)
    if np.iscomplexobj(g) and not np.iscomplexobj(value):
        g = g.real
    return g


def _herm(a):
    return np.conj(np.swapaxes(a, -1, -2))


@register("add")
def add(a, b):
    a, b = as_var(a), as_var(b)
    return Var(a.value + b.value, (a, b), lambda g: (g, g))


@register("sub")
def sub(a, b):
    a, b = as_var(a), as_var(b)
    return Var(a.value - b.value, (a, b), lambda g: (g, -g))


@register("neg")
def neg(a):
    a = as_var(a)
    return Var(-a.value, (a,), lambda g: (-g,))


@register("mul")
def mul(a, b):
    a, b = as_var(a), as_var(b)
    return Var(a.value * b.value, (a, b),
               lambda g: (g * np.conj(b.value), g * np.conj(a.value)))


@register("div")
def div(a, b):
    a, b = as_var(a), as_var(b)
    out = a.value / b.value

    def back(g):
        gb = g / np.conj(b.value)
        return gb, -gb * np.conj(out)

    return Var(out, (a, b), back)


@register("matmul")
def matmul(a, b):
    a, b = as_var(a), as_var(b)

    def back(g):
        return g @ _herm(b.value), _herm(a.value) @ g

    return Var(a.value @ b.value, (a, b), back)


def transpose(a):
    """Swap the last two axes (plain transpose, no conjugation)."""
    a = as_var(a)
    return Var(np.swapaxes(a.value, -1, -2), (a,), lambda g: (np.swapaxes(g, -1, -2),))


def reshape(a, shape):
    a = as_var(a)
    return Var(a.value.reshape(shape), (a,), lambda g: (g.reshape(a.shape),))


def getitem(a, idx):
    a = as_var(a)

    def back(g):
        out = np.zeros_like(a.value, dtype=np.result_type(a.value, g))
        np.add.at(out, idx, g)
        return (out,)

    return Var(a.value[idx], (a,), back)


def take_rows(table, ids):
    """Embedding lookup ``table[ids]`` with scatter-add adjoint."""
    table = as_var(table)
    ids = np.asarray(ids, dtype=int)

    def back(g):
        out = np.zeros_like(table.value)
        np.add.at(out, ids, g)
        return (out,)

    return Var(table.value[ids], (table,), back)


def concat(vars_, axis=-1):
    vars_ = [as_var(v) for v in vars_]
    sizes = [v.shape[axis] for v in vars_]
    cuts = np.cumsum(sizes)[:-1]

    def back(g):
        return tuple(np.split(g, cuts, axis=axis))

    return Var(np.concatenate([v.value for v in vars_], axis=axis), tuple(vars_), back)


@register("sum")
def sum_(a, axis=None, keepdims=False):
    a = as_var(a)

    def back(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape),)

    return Var(a.value.sum(axis=axis, keepdims=keepdims), (a,), back)


@register("mean")
def mean(a, axis=None, keepdims=False):
    a = as_var(a)
    n = a.value.size if axis is None else np.prod([a.shape[ax] for ax in np.atleast_1d(axis)])
    return sum_(a, axis=axis, keepdims=keepdims) / float(n)


@register("exp")
def exp(a):
    a = as_var(a)
    out = np.exp(a.value)
    return Var(out, (a,), lambda g: (g * np.conj(out),))


@register("log")
def log(a):
    a = as_var(a)
    return Var(np.log(a.value), (a,), lambda g: (g / np.conj(a.value),))


@register("sqrt")
def sqrt(a):
    a = as_var(a)
    out = np.sqrt(a.value)
    return Var(out, (a,), lambda g: (g / (2.0 * out),))


@register("abs")
def abs_(a):
    """Absolute value of a real Var (subgradient 0 at 0)."""
    a = as_var(a)
    return Var(np.abs(a.value), (a,), lambda g: (g * np.sign(a.value),))


@register("real")
def real(a):
    a = as_var(a)
    return Var(np.real(a.value), (a,), lambda g: (g.astype(np.complex128),))


@register("imag")
def imag(a):
    a = as_var(a)
    return Var(np.imag(a.value), (a,), lambda g: (1j * g,))


def clip(a, lo, hi):
    """Clamp with zero adjoint outside ``[lo, hi]``."""
    a = as_var(a)
    inside = (a.value >= lo) & (a.value <= hi)
    return Var(np.clip(a.value, lo, hi), (a,), lambda g: (g * inside,))


@register("sigmoid")
def sigmoid(a):
    a = as_var(a)
    out = 0.5 * (1.0 + np.tanh(0.5 * a.value))
    return Var(out, (a,), lambda g: (g * out * (1.0 - out),))


@register("leaky_relu")
def leaky_relu(a, slope=0.2):
    a = as_var(a)
    scale = np.where(a.value > 0, 1.0, slope)
    return Var(a.value * scale, (a,), lambda g: (g * scale,))


@register("mat_exp")
def mat_exp(a):
    """Batched matrix exponential with the exact scaling-and-squaring adjoint."""
    a = as_var(a)
    return Var(_mat_exp(a.value), (a,), lambda g: (mat_exp_vjp(a.value, g),))


def realify(a):
    """Stack real and imaginary parts along the last axis; identity on reals."""
    a = as_var(a)
    if not np.iscomplexobj(a.value):
        return a
    return concat([real(a), imag(a)], axis=-1)


@register("cosine_sim")
def cosine_sim(a, b, axis=-1):
    """Row-wise cosine similarity along ``axis`` (complex inputs realified)."""
    a, b = realify(a), realify(b)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    na2 = sum_(a * a, axis=axis)
    nb2 = sum_(b * b, axis=axis)
    if np.any(na2.value == 0) or np.any(nb2.value == 0):
        raise SimilarityError("cosine similarity undefined for a zero-norm argument")
    return sum_(a * b, axis=axis) / sqrt(na2 * nb2)
