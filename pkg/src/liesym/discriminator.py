"""MLP discriminator scoring ``(x, y)`` pairs as real or transformed."""

import numpy as np

from . import autograd as ad
from .linalg import DomainError, ShapeError


class Discriminator:
    """``depth``-layer MLP with leaky-ReLU hidden units and a sigmoid output.

    For classification tasks pass ``num_classes``: the label is looked up in
    an embedding table and concatenated to ``x`` instead of a raw ``y``.
    Complex inputs are split into real and imaginary parts before entry.
    """

    def __init__(self, x_dim, y_dim, rng, hidden=512, depth=3, slope=0.2,
                 num_classes=None, embed_dim=8):
        if depth < 2:
            raise ValueError("depth must be >= 2")
        self.x_dim = x_dim
        self.y_dim = y_dim
        self.slope = slope
        self.num_classes = num_classes
        self.embed = None
        if num_classes is not None:
            self.embed = ad.param(rng.normal(0.0, 1.0, size=(num_classes, embed_dim)))
            in_dim = x_dim + embed_dim
        else:
            in_dim = x_dim + y_dim
        widths = [in_dim] + [hidden] * (depth - 1) + [1]
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(widths[:-1], widths[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.weights.append(ad.param(rng.uniform(-bound, bound, size=(fan_in, fan_out))))
            self.biases.append(ad.param(rng.uniform(-bound, bound, size=(fan_out,))))

    def parameters(self):
        ps = []
        for w, b in zip(self.weights, self.biases):
            ps += [w, b]
        if self.embed is not None:
            ps.append(self.embed)
        return ps

    def state(self):
        return [p.value.copy() for p in self.parameters()]

    def load_state(self, values):
        for p, v in zip(self.parameters(), values):
            p.value = np.array(v, copy=True)

    def features(self, x, y):
        x = ad.realify(x)
        if x.shape[-1] != self.x_dim:
            raise ShapeError(f"expected x of width {self.x_dim}, got {x.shape[-1]}")
        if self.embed is not None:
            ids = np.asarray(y.value if isinstance(y, ad.Var) else y).reshape(-1)
            if ids.size != x.shape[0]:
                raise ShapeError("one class id per row expected")
            if np.any(ids != np.round(ids)) or ids.min() < 0 or ids.max() >= self.num_classes:
                raise DomainError(f"class ids must be integers in [0, {self.num_classes})")
            return ad.concat([x, ad.take_rows(self.embed, ids.astype(int))])
        y = ad.realify(y)
        if y.ndim == 1:
            y = ad.reshape(y, (-1, 1))
        if y.shape[-1] != self.y_dim:
            raise ShapeError(f"expected y of width {self.y_dim}, got {y.shape[-1]}")
        return ad.concat([x, y])

    def logits(self, x, y):
        h = self.features(x, y)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = ad.leaky_relu(h, self.slope)
        return ad.reshape(h, (h.shape[0],))

    def __call__(self, x, y):
        """Probability that each row is a real sample, shape ``(B,)``."""
        return ad.sigmoid(self.logits(x, y))


def disc_forward(disc, x, y):
    """Plain-array convenience wrapper around a single or batched forward."""
    x = np.asarray(x)
    single = x.ndim == 1
    if single:
        x = x[None]
        y = np.asarray(y).reshape(1, -1) if disc.embed is None else np.asarray([y])
    p = disc(ad.Var(x), y if disc.embed is not None else ad.Var(np.asarray(y)))
    return float(p.value[0]) if single else p.value
