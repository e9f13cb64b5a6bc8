"""Working with a discovered basis: invariant metrics, comparison, augmentation."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import autograd as ad
from .generator import LieBasis, act_blocks, sample_group_element
from .linalg import DomainError, ShapeError, SimilarityError
from .optim import Adam


class SolverError(RuntimeError):
    pass


class DegenerateBasis(SolverError):
    pass


class NumericError(RuntimeError):
    pass


def _mats(basis):
    return basis.matrices() if isinstance(basis, LieBasis) else np.asarray(basis)


# -- invariant metric ----------------------------------------------------------

@dataclass
class MetricSolveConfig:
    a: float = 5e-4
    lr: float = 1e-5
    steps: int = 200_000
    norm: str = "max"        # "max" or "frobenius"
    seed: int = 0

    def __post_init__(self):
        if self.a <= 0:
            raise DomainError("anti-collapse coefficient a must be positive")
        if self.steps < 1:
            raise DomainError("steps must be >= 1")
        if self.norm not in ("max", "frobenius"):
            raise DomainError(f"unknown norm {self.norm!r}")


def invariance_residual(L, J):
    """``||L^T J + J L||_F``."""
    L, J = np.asarray(L), np.asarray(J)
    if L.shape != J.shape:
        raise ShapeError(f"shape mismatch {L.shape} vs {J.shape}")
    return float(np.linalg.norm(L.T @ J + J @ L))


def invariance_operator(mats):
    """Stack of ``vec(L^T J + J L)`` maps (row-major vec), shape ``(c, k*k, k*k)``."""
    mats = np.asarray(mats)
    k = mats.shape[-1]
    eye = np.eye(k)
    return np.stack([np.kron(L.T, eye) + np.kron(eye, L.T) for L in mats])


def solve_metric(basis, cfg=None, channels=None):
    """Gradient descent on ``sum_i ||L_i^T J + J L_i||^2 - a ||J||^2``.

    Starts from a seeded random symmetric matrix, symmetrizes after each
    step and returns ``J`` scaled to unit Frobenius norm.
    """
    cfg = cfg or MetricSolveConfig()
    mats = _mats(basis)
    if channels is not None:
        mats = mats[list(channels)]
    if mats.ndim != 3 or mats.shape[0] < 1:
        raise ShapeError("need at least one generator")
    if np.iscomplexobj(mats):
        raise DomainError("metric solve is defined for real bases")
    k = mats.shape[-1]
    ops = invariance_operator(mats)
    hess = np.einsum("cij,cik->jk", ops, ops)
    if np.abs(hess).max() < 1e-14:
        raise DegenerateBasis("basis is zero: only the -a||J||^2 term remains")
    rng = np.random.default_rng(cfg.seed)
    j0 = rng.standard_normal((k, k))
    v = ((j0 + j0.T) / 2).ravel()
    v /= np.linalg.norm(v)
    perm = np.arange(k * k).reshape(k, k).T.ravel()
    lr, a = cfg.lr, cfg.a
    step_op = np.eye(k * k) - 2 * lr * hess
    if cfg.norm == "frobenius":
        step_op = step_op + 2 * lr * a * np.eye(k * k)
    for _ in range(cfg.steps):
        if cfg.norm == "max":
            i = np.argmax(np.abs(v))
            push = 2 * lr * a * v[i]
            v = step_op @ v
            v[i] += push
        else:
            v = step_op @ v
        v = 0.5 * (v + v[perm])
        if not np.isfinite(v).all() or np.abs(v).max() > 1e6:
            raise SolverError("metric solve diverged; try a smaller a or lr")
    J = v.reshape(k, k)
    return J / np.linalg.norm(J)


def metric_nullspace(mats):
    """Symmetric matrices annihilated by every ``J -> L^T J + J L``.

    Builds the linear system column by column from the symmetric basis
    ``E_ab`` and returns an orthonormal basis of the solution space together
    with the singular values.
    """
    mats = np.asarray(mats)
    k = mats.shape[-1]
    sym = []
    for p in range(k):
        for q in range(p, k):
            e = np.zeros((k, k))
            e[p, q] = e[q, p] = 1.0
            sym.append(e / np.linalg.norm(e))
    cols = [np.concatenate([(L.T @ e + e @ L).ravel() for L in mats]) for e in sym]
    A = np.stack(cols, axis=1)
    _, s, vt = np.linalg.svd(A)
    s_full = np.concatenate([s, np.zeros(len(sym) - len(s))])
    null = vt[s_full < 1e-10 * max(1.0, s_full.max())]
    return [sum(c * e for c, e in zip(row, sym)) for row in null], s_full


def metric_edge_features(xi, xj, J):
    """``(||x_i - x_j||_J^2, <x_i, x_j>_J)`` for graph edge messages."""
    xi, xj, J = np.asarray(xi), np.asarray(xj), np.asarray(J)
    d = xi - xj
    return np.einsum("...i,ij,...j->...", d, J, d), np.einsum("...i,ij,...j->...", xi, J, xj)


# -- basis comparison ----------------------------------------------------------

@dataclass
class SimilarityReport:
    channel_cosine: np.ndarray   # best |cos| of each learned channel against truth
    subspace_score: float        # mean cos^2 of principal angles
    principal_cosines: np.ndarray
    mae: float                   # after per-channel optimal scalar alignment
    sign_mae: float              # after sign alignment only (raw scale)
    matching: list               # (learned channel, truth channel)

    def to_dict(self):
        return {
            "channel_cosine": self.channel_cosine.tolist(),
            "subspace_score": self.subspace_score,
            "principal_cosines": self.principal_cosines.tolist(),
            "mae": self.mae,
            "sign_mae": self.sign_mae,
            "matching": [list(map(int, p)) for p in self.matching],
        }


def _orthonormal(vecs, tol=1e-10):
    u, s, _ = np.linalg.svd(vecs.T, full_matrices=False)
    return u[:, s > tol * s.max()]


def principal_cosines(a, b):
    """Cosines of the principal angles between the spans of the rows of a and b."""
    qa, qb = _orthonormal(np.asarray(a)), _orthonormal(np.asarray(b))
    s = np.linalg.svd(qa.conj().T @ qb, compute_uv=False)
    return np.clip(s, 0.0, 1.0)


def compare_bases(learned, truth):
    lm, tm = _mats(learned), _mats(truth)
    if lm.shape[-2:] != tm.shape[-2:]:
        raise ShapeError("bases must act on the same dimension")
    lf, tf = lm.reshape(len(lm), -1), tm.reshape(len(tm), -1)
    ln, tn = np.linalg.norm(lf, axis=1), np.linalg.norm(tf, axis=1)
    if np.any(ln == 0) or np.any(tn == 0):
        raise SimilarityError("zero-norm channel")
    cos = np.real(lf.conj() @ tf.T) / np.outer(ln, tn)
    pcos = principal_cosines(lf, tf)
    score = float(np.mean(pcos ** 2))
    rows, cols = linear_sum_assignment(-np.abs(cos))
    maes, sign_maes = [], []
    for i, j in zip(rows, cols):
        s = np.real(np.vdot(lf[i], tf[j])) / ln[i] ** 2
        maes.append(np.mean(np.abs(s * lf[i] - tf[j])))
        sign_maes.append(np.mean(np.abs(np.sign(s) * lf[i] - tf[j])))
    return SimilarityReport(
        channel_cosine=np.abs(cos).max(axis=1),
        subspace_score=score,
        principal_cosines=pcos,
        mae=float(np.mean(maes)),
        sign_mae=float(np.mean(sign_maes)),
        matching=list(zip(rows.tolist(), cols.tolist())),
    )


def best_channels(learned, truth, count):
    """Indices of the ``count`` learned channels lying closest to span(truth)."""
    lm, tm = _mats(learned), _mats(truth)
    lf = lm.reshape(len(lm), -1)
    q = _orthonormal(tm.reshape(len(tm), -1))
    proj = np.linalg.norm(q.conj().T @ lf.T, axis=0) / np.linalg.norm(lf, axis=1)
    return sorted(np.argsort(-proj, kind="stable")[:count].tolist())


# -- augmentation --------------------------------------------------------------

def _draw_elements(basis, dist, count, rng):
    gs = sample_group_element(basis, dist.sample(count, rng)).g
    bad = np.abs(np.linalg.det(gs)) < 1e-12
    if bad.any():
        # resample singular draws once, then give up
        gs[bad] = sample_group_element(basis, dist.sample(int(bad.sum()), rng)).g
        if np.any(np.abs(np.linalg.det(gs[bad])) < 1e-12):
            raise NumericError("singular group element drawn twice")
    return gs


def augment_predict(model, basis, dist, x, rep, n_samples, rng):
    """Average ``rho_Y(g)^-1 model(rho_X(g) x)`` over sampled group elements.

    For a trivial output action the plain average of ``model(rho_X(g) x)``
    is returned. ``x`` may be a single vector or a batch of rows; each draw
    uses one ``g`` shared by all rows.
    """
    gs = _draw_elements(basis, dist, n_samples, rng)
    total = None
    for g in gs:
        pred = np.asarray(model(act_blocks(g, x, rep.in_blocks)))
        if not rep.trivial_output:
            pred = act_blocks(np.linalg.inv(g), pred, rep.out_blocks)
        total = pred if total is None else total + pred
    return total / n_samples


def augment_dataset(ds, basis, dist, rep, copies, rng, keep_original=True):
    """Dataset enlarged by ``copies`` transformed versions of every row."""
    xs, ys = ([ds.x], [ds.y]) if keep_original else ([], [])
    for _ in range(copies):
        w = dist.sample(len(ds), rng)
        g = sample_group_element(basis, w).g
        xs.append(act_blocks(g, ds.x, rep.in_blocks))
        ys.append(ds.y if rep.trivial_output else act_blocks(g, ds.y, rep.out_blocks))
    return ds.__class__(np.concatenate(xs), np.concatenate(ys), ds.task, ds.num_classes,
                        ds.t_in, ds.t_out, ds.step_dim, dict(ds.info))


def fit_linear(x, y):
    """Least-squares affine map; returns a callable predictor."""
    xa = np.hstack([x, np.ones((len(x), 1))])
    coef, *_ = np.linalg.lstsq(xa, y, rcond=None)
    return lambda v: np.hstack([np.atleast_2d(v), np.ones((len(np.atleast_2d(v)), 1))]) @ coef


def augmentation_benefit(train, test, basis, dist, rep, copies, rng, fit=fit_linear):
    """Test MSE of a predictor fit without and with generator augmentation."""
    plain = fit(train.x, train.y)
    aug = augment_dataset(train, basis, dist, rep, copies, rng)
    augmented = fit(aug.x, aug.y)
    mse_plain = float(np.mean((plain(test.x) - test.y) ** 2))
    mse_aug = float(np.mean((augmented(test.x) - test.y) ** 2))
    return mse_plain, mse_aug


def fit_mlp(x, y, hidden=64, epochs=200, batch_size=64, lr=1e-3, seed=0):
    """Two-hidden-layer leaky-ReLU regressor trained with Adam on squared error."""
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    rng = np.random.default_rng(seed)
    widths = [x.shape[1], hidden, hidden, y.shape[1]]
    params = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        params += [ad.param(rng.uniform(-bound, bound, (fan_in, fan_out))),
                   ad.param(np.zeros(fan_out))]

    def forward(v):
        h = ad.as_var(v)
        for i in range(0, len(params), 2):
            h = h @ params[i] + params[i + 1]
            if i + 2 < len(params):
                h = ad.leaky_relu(h, 0.2)
        return h

    opt = Adam(params, lr)
    n = len(x)
    bs = min(batch_size, n)
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n - bs + 1, bs):
            idx = order[start:start + bs]
            err = forward(x[idx]) - y[idx]
            loss = ad.mean(err * err)
            opt.zero_grad()
            loss.backward()
            opt.step()
    return lambda v: forward(np.atleast_2d(v)).value
