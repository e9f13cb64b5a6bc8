"""Lie-algebra symmetry generator.

A :class:`LieBasis` holds ``c`` learnable ``k x k`` generators. Group
elements are drawn as ``g = exp(sum_i w_i L_i)`` with ``w`` from a
coefficient distribution, and act on data block-wise through a
:class:`RepresentationSpec`.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import autograd as ad
from .linalg import DomainError, ShapeError, mat_exp, matrix_from_obj, matrix_to_obj


@dataclass
class LieBasis:
    """``c`` generators of size ``k x k``.

    With ``block_size`` set, each generator is one ``b x b`` block repeated
    along the diagonal (``kron(I, block)``), so off-block entries are zero by
    construction. ``params`` holds the free entries: ``(c, k, k)`` for a dense
    basis, ``(c, b, b)`` for a block basis.
    """

    params: np.ndarray
    k: int
    block_size: int | None = None

    def __post_init__(self):
        self.params = np.asarray(self.params)
        if not np.iscomplexobj(self.params):
            self.params = self.params.astype(np.float64)
        if self.params.ndim != 3 or self.params.shape[-1] != self.params.shape[-2]:
            raise ShapeError(f"basis params must be (c, d, d), got {self.params.shape}")
        d = self.params.shape[-1]
        if self.block_size is None:
            if d != self.k:
                raise ShapeError(f"dense basis needs {self.k}x{self.k} matrices, got {d}x{d}")
        else:
            if self.k % self.block_size or d != self.block_size:
                raise ShapeError(f"block size {self.block_size} incompatible with k={self.k}")

    @classmethod
    def random(cls, c, k, rng, std=0.2, block_size=None, complex_field=False):
        d = k if block_size is None else block_size
        p = rng.normal(0.0, std, size=(c, d, d))
        if complex_field:
            p = p + 1j * rng.normal(0.0, std, size=(c, d, d))
        return cls(p, k, block_size)

    @classmethod
    def from_matrices(cls, mats):
        mats = np.asarray(mats)
        if mats.ndim == 2:
            mats = mats[None]
        return cls(mats, mats.shape[-1])

    @property
    def channels(self):
        return self.params.shape[0]

    @property
    def is_complex(self):
        return np.iscomplexobj(self.params)

    @property
    def structure(self):
        return "dense" if self.block_size is None else f"block{self.block_size}"

    def matrices(self):
        """The full ``(c, k, k)`` generator stack."""
        return expand_blocks(self.params, self.k, self.block_size)

    def copy(self):
        return LieBasis(self.params.copy(), self.k, self.block_size)

    def normalized(self):
        """Channels rescaled to unit Frobenius norm (scale-free reporting)."""
        norms = np.linalg.norm(self.params.reshape(self.channels, -1), axis=1)
        norms = np.where(norms > 0, norms, 1.0)
        return LieBasis(self.params / norms[:, None, None], self.k, self.block_size)


def expand_blocks(params, k, block_size):
    if block_size is None:
        return params
    reps = k // block_size
    return np.stack([np.kron(np.eye(reps), p) for p in params])


def expand_blocks_var(params, k, block_size):
    """Differentiable version of :func:`expand_blocks` for a Var."""
    if block_size is None:
        return params
    reps = k // block_size
    c = params.shape[0]
    # place the block at each diagonal position via constant 0/1 embeddings
    emb = np.zeros((reps, k, block_size))
    for r in range(reps):
        emb[r, r * block_size:(r + 1) * block_size, :] = np.eye(block_size)
    out = None
    for r in range(reps):
        e = emb[r]
        term = ad.matmul(ad.matmul(e, params), e.T)
        out = term if out is None else out + term
    assert out.shape == (c, k, k)
    return out


@dataclass
class GaussianCoefficients:
    """``w = sigma * eps`` with ``eps`` standard normal; sigma stored as log."""

    log_sigma: np.ndarray
    learnable: bool = False

    @classmethod
    def make(cls, channels, sigma=1.0, learnable=False):
        sigma = np.broadcast_to(np.asarray(sigma, dtype=np.float64), (channels,))
        if np.any(sigma <= 0):
            raise DomainError("Gaussian scale must be positive")
        return cls(np.log(sigma).copy(), learnable)

    @property
    def sigma(self):
        return np.exp(self.log_sigma)

    @property
    def channels(self):
        return self.log_sigma.shape[0]

    def noise(self, count, rng):
        return rng.standard_normal((count, self.channels))

    def sample(self, count, rng):
        if count < 1:
            raise DomainError("count must be >= 1")
        return self.sigma * self.noise(count, rng)

    def to_dict(self):
        return {"kind": "gaussian", "sigma": self.sigma.tolist(), "learnable": self.learnable}


@dataclass
class IntegerGridCoefficients:
    """Uniform draws from the integers ``lo..hi`` (inclusive)."""

    lo: int = -10
    hi: int = 10
    channels: int = 1
    learnable: bool = field(default=False, init=False)

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError("integer grid needs lo < hi")
        if not self.lo <= 0 <= self.hi:
            raise DomainError("integer grid must contain 0")

    def sample(self, count, rng):
        if count < 1:
            raise DomainError("count must be >= 1")
        return rng.integers(self.lo, self.hi + 1, size=(count, self.channels)).astype(np.float64)

    def to_dict(self):
        return {"kind": "int_grid", "lo": self.lo, "hi": self.hi, "channels": self.channels}


def coefficients_from_dict(d):
    if d["kind"] == "gaussian":
        return GaussianCoefficients.make(len(d["sigma"]), d["sigma"], d.get("learnable", False))
    if d["kind"] == "int_grid":
        return IntegerGridCoefficients(int(d["lo"]), int(d["hi"]), int(d["channels"]))
    raise DomainError(f"unknown coefficient distribution {d['kind']!r}")


def sample_coefficients(dist, count, rng):
    return dist.sample(count, rng)


@dataclass(frozen=True)
class RepresentationSpec:
    """How a ``k x k`` group element acts on ``x`` and ``y``.

    ``x`` is split into ``in_blocks`` consecutive length-``k`` blocks, each
    multiplied by ``g``. ``out_blocks=None`` means ``y`` is left unchanged.
    """

    in_blocks: int = 1
    out_blocks: int | None = None

    @property
    def trivial_output(self):
        return self.out_blocks is None

    def check(self, k, n, m):
        if n != self.in_blocks * k:
            raise ShapeError(f"input dim {n} != {self.in_blocks} blocks of {k}")
        if self.out_blocks is not None and m != self.out_blocks * k:
            raise ShapeError(f"output dim {m} != {self.out_blocks} blocks of {k}")


@dataclass
class GroupSample:
    g: np.ndarray
    w: np.ndarray


def sample_group_element(basis, w):
    w = np.asarray(w, dtype=np.float64)
    if w.shape[-1] != basis.channels:
        raise ShapeError(f"need {basis.channels} coefficients, got {w.shape[-1]}")
    a = np.tensordot(w, basis.matrices(), axes=([-1], [0]))
    return GroupSample(mat_exp(a), w)


def act_blocks(g, v, blocks):
    """Multiply each length-k block of ``v`` by ``g`` (batched over rows)."""
    g = np.asarray(g)
    v = np.asarray(v)
    k = g.shape[-1]
    if v.shape[-1] != blocks * k:
        raise ShapeError(f"vector length {v.shape[-1]} != {blocks} x {k}")
    vb = v.reshape(v.shape[:-1] + (blocks, k))
    out = vb @ np.swapaxes(g, -1, -2)
    return out.reshape(v.shape)


def apply_transform(sample, rep, x, y):
    g = sample.g if isinstance(sample, GroupSample) else np.asarray(sample)
    x2 = act_blocks(g, x, rep.in_blocks)
    y2 = np.asarray(y) if rep.trivial_output else act_blocks(g, y, rep.out_blocks)
    return x2, y2


def act_blocks_var(g, v, blocks):
    """Differentiable block action; ``g`` is ``(B, k, k)``, ``v`` is ``(B, blocks*k)``."""
    g, v = ad.as_var(g), ad.as_var(v)
    k = g.shape[-1]
    b = v.shape[0]
    vb = ad.reshape(v, (b, blocks, k))
    out = ad.matmul(vb, ad.transpose(g))
    return ad.reshape(out, (b, blocks * k))


class Generator:
    """Trainable state: basis parameters, coefficient distribution, action."""

    def __init__(self, basis, dist, rep):
        if dist.channels != basis.channels:
            raise ShapeError("distribution and basis disagree on channel count")
        self.basis = basis
        self.dist = dist
        self.rep = rep
        self.basis_var = ad.param(basis.params)
        self.log_sigma_var = (ad.param(dist.log_sigma)
                              if isinstance(dist, GaussianCoefficients) and dist.learnable else None)

    def parameters(self):
        ps = [self.basis_var]
        if self.log_sigma_var is not None:
            ps.append(self.log_sigma_var)
        return ps

    def sync(self):
        """Copy the current Var values back into the basis and distribution."""
        self.basis.params = self.basis_var.value.copy()
        if self.log_sigma_var is not None:
            self.dist.log_sigma = self.log_sigma_var.value.copy()

    def coefficients(self, count, rng):
        """Coefficient batch as a Var (carries gradient to log sigma if learnable)."""
        if self.log_sigma_var is not None:
            eps = self.dist.noise(count, rng)
            return ad.exp(self.log_sigma_var) * eps
        return ad.Var(self.dist.sample(count, rng))

    def matrices_var(self):
        return expand_blocks_var(self.basis_var, self.basis.k, self.basis.block_size)

    def group_elements(self, w):
        """``exp(sum_i w_i L_i)`` for a batch of coefficient rows."""
        mats = self.matrices_var()
        c, k = self.basis.channels, self.basis.k
        a = ad.matmul(w, ad.reshape(mats, (c, k * k)))
        return ad.mat_exp(ad.reshape(a, (w.shape[0], k, k)))

    def transform(self, x, y, rng):
        """Apply one fresh group element per row. Returns ``(x', y', g)``."""
        w = self.coefficients(x.shape[0], rng)
        g = self.group_elements(w)
        x2 = act_blocks_var(g, x, self.rep.in_blocks)
        y2 = ad.as_var(y) if self.rep.trivial_output else act_blocks_var(g, y, self.rep.out_blocks)
        return x2, y2, g


def basis_to_dict(basis, dist=None):
    d = {
        "channels": basis.channels,
        "k": basis.k,
        "field": "complex" if basis.is_complex else "real",
        "structure": basis.structure,
        "block_size": basis.block_size,
        "params": [matrix_to_obj(p) for p in basis.params],
        "matrices": [matrix_to_obj(m) for m in basis.matrices()],
    }
    if dist is not None:
        d["distribution"] = dist.to_dict()
    return d


def basis_from_dict(d):
    params = np.stack([matrix_from_obj(p) for p in d["params"]]) if d["params"] else None
    if params is None:
        raise ShapeError("basis file has no channels")
    basis = LieBasis(params, int(d["k"]), d.get("block_size"))
    dist = coefficients_from_dict(d["distribution"]) if "distribution" in d else None
    return basis, dist


def save_basis(path, basis, dist=None):
    with open(path, "w") as f:
        json.dump(basis_to_dict(basis, dist), f, indent=1)


def load_basis(path):
    with open(path) as f:
        return basis_from_dict(json.load(f))
