"""Synthetic datasets with known symmetries, and CSV ingestion."""

import csv
from dataclasses import dataclass, field

import numpy as np

from . import algebras
from .linalg import DomainError, ShapeError, mat_exp

REGRESSION = "regression"
CLASSIFICATION = "classification"
TRAJECTORY = "trajectory"
TASKS = (REGRESSION, CLASSIFICATION, TRAJECTORY)


class ParseError(ValueError):
    pass


class SymmetryCheckError(AssertionError):
    pass


@dataclass
class Dataset:
    x: np.ndarray
    y: np.ndarray
    task: str = REGRESSION
    num_classes: int | None = None
    t_in: int | None = None
    t_out: int | None = None
    step_dim: int | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise DomainError(f"unknown task {self.task!r}")
        if self.x.ndim != 2 or len(self.x) != len(self.y):
            raise ShapeError("x must be (N, n) with one y per row")
        if self.task == CLASSIFICATION:
            self.y = np.asarray(self.y).reshape(-1).astype(int)
        elif self.y.ndim == 1:
            self.y = self.y[:, None]
        if self.task == TRAJECTORY:
            if self.x_dim != self.t_in * self.step_dim or self.y_dim != self.t_out * self.step_dim:
                raise ShapeError("trajectory dims must be t_in*step_dim and t_out*step_dim")

    def __len__(self):
        return len(self.x)

    @property
    def x_dim(self):
        return self.x.shape[1]

    @property
    def y_dim(self):
        return 1 if self.task == CLASSIFICATION else self.y.shape[1]

    @property
    def is_complex(self):
        return np.iscomplexobj(self.x) or np.iscomplexobj(self.y)

    @property
    def field(self):
        return "complex" if self.is_complex else "real"

    def subset(self, idx):
        return Dataset(self.x[idx], self.y[idx], self.task, self.num_classes,
                       self.t_in, self.t_out, self.step_dim, dict(self.info))


# -- 2-body circular orbits -------------------------------------------------

def two_body_states(radius, phase, times, mass=1.0, coupling=1.0):
    """Closed-form circular 2-body states, shape ``(N, len(times), 8)``.

    Bodies of equal mass orbit their common centre of mass at the origin at
    distance ``radius`` each; rows are ``[q1x, q1y, p1x, p1y, q2x, q2y, p2x, p2y]``.
    """
    r = np.asarray(radius, dtype=np.float64)[:, None]
    phi = np.asarray(phase, dtype=np.float64)[:, None]
    omega = np.sqrt(coupling * mass / (4.0 * r ** 3))
    ang = omega * np.asarray(times)[None, :] + phi
    c, s = np.cos(ang), np.sin(ang)
    q1 = np.stack([r * c, r * s], axis=-1)
    p1 = mass * omega[..., None] * np.stack([-r * s, r * c], axis=-1)
    return np.concatenate([q1, p1, -q1, -p1], axis=-1)


def two_body_energy(state, mass=1.0, coupling=1.0):
    q1, p1, q2, p2 = state[..., 0:2], state[..., 2:4], state[..., 4:6], state[..., 6:8]
    kinetic = (p1 ** 2).sum(-1) / (2 * mass) + (p2 ** 2).sum(-1) / (2 * mass)
    return kinetic - coupling * mass ** 2 / np.linalg.norm(q1 - q2, axis=-1)


def gen_two_body(count, seed=0, t_in=5, t_out=5, radius=(0.5, 1.5), mass=1.0, dt=0.1,
                 coupling=1.0):
    if count < 1:
        raise DomainError("count must be >= 1")
    lo, hi = radius
    if lo <= 0 or hi < lo:
        raise DomainError("radius range must be positive")
    rng = np.random.default_rng(seed)
    r = rng.uniform(lo, hi, size=count)
    phi = rng.uniform(0.0, 2 * np.pi, size=count)
    times = dt * np.arange(t_in + t_out)
    states = two_body_states(r, phi, times, mass, coupling)
    x = states[:, :t_in].reshape(count, -1)
    y = states[:, t_in:].reshape(count, -1)
    ds = Dataset(x, y, TRAJECTORY, t_in=t_in, t_out=t_out, step_dim=8,
                 info={"generator": "two_body", "mass": mass, "dt": dt, "coupling": coupling})
    check_two_body(ds)
    return ds


def angular_split(ds, train_fraction=0.8):
    """Sort by the starting polar angle of body 1 and cut into train/test."""
    angle = np.mod(np.arctan2(ds.x[:, 1], ds.x[:, 0]), 2 * np.pi)
    order = np.argsort(angle, kind="stable")
    cut = int(round(train_fraction * len(ds)))
    return ds.subset(order[:cut]), ds.subset(order[cut:])


def check_two_body(ds, rows=100, tol=1e-10):
    steps = ds.t_in + ds.t_out
    s = np.concatenate([ds.x, ds.y], axis=1)[:rows].reshape(-1, steps, 8)
    if np.abs(s[..., 0:4] + s[..., 4:8]).max() > tol:
        raise SymmetryCheckError("centre of mass or total momentum not at zero")
    e = two_body_energy(s, ds.info.get("mass", 1.0), ds.info.get("coupling", 1.0))
    if np.abs(e - e[:, :1]).max() > tol:
        raise SymmetryCheckError("energy not conserved along trajectories")


# -- discrete rotation -------------------------------------------------------

def discrete_rotation_target(x, y, z, k):
    """``z / (1 + (angle mod 2pi/k))`` with the angle taken in ``[0, 2pi)``."""
    ang = np.mod(np.arctan2(y, x), 2 * np.pi)
    return z / (1.0 + np.mod(ang, 2 * np.pi / k))


def gen_discrete_rotation(k, count, seed=0):
    if k < 2:
        raise DomainError("k must be >= 2")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((count, 3))
    bad = np.abs(x[:, 0]) < 1e-12
    while bad.any():
        x[bad] = rng.standard_normal((bad.sum(), 3))
        bad = np.abs(x[:, 0]) < 1e-12
    y = discrete_rotation_target(x[:, 0], x[:, 1], x[:, 2], k)
    ds = Dataset(x, y, REGRESSION, info={"generator": "discrete_rotation", "k": k})
    rot = mat_exp(algebras.planar_rotation(k)[0])
    _check_invariant(ds, lambda v: v @ rot.T, lambda v: discrete_rotation_target(*v.T, k), 1e-9)
    return ds


# -- partial permutation -----------------------------------------------------

def partial_permutation_target(x):
    return x[..., 0] + x[..., 1] + x[..., 2] + x[..., 3] ** 2 - x[..., 4] ** 2


def gen_partial_permutation(count, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((count, 5))
    ds = Dataset(x, partial_permutation_target(x), REGRESSION,
                 info={"generator": "partial_permutation"})
    _check_invariant(ds, lambda v: v[:, [2, 0, 1, 3, 4]], partial_permutation_target, 1e-12)
    return ds


# -- SU(2) superpotential ----------------------------------------------------

def su2_target(v):
    """``0.5 d^2 + d`` with ``d = x1 y2 - x2 y1`` for rows ``(x1, x2, y1, y2)``."""
    d = v[..., 0] * v[..., 3] - v[..., 1] * v[..., 2]
    return 0.5 * d ** 2 + d


def gen_su2(count, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((count, 4)) + 1j * rng.standard_normal((count, 4))
    ds = Dataset(x, su2_target(x), REGRESSION, info={"generator": "su2"})
    basis = algebras.su2()
    w = np.random.default_rng(seed + 1).standard_normal(3)
    g = mat_exp(np.tensordot(w, basis, axes=1))

    def act(v):
        return (v.reshape(-1, 2, 2) @ g.T).reshape(-1, 4)

    _check_invariant(ds, act, su2_target, 1e-9)
    return ds


# -- Lorentz-invariant regression -------------------------------------------

def minkowski_norm(x):
    return x[..., 0] ** 2 - (x[..., 1:] ** 2).sum(-1)


def gen_lorentz_invariant(count, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((count, 4))
    ds = Dataset(x, minkowski_norm(x), REGRESSION, info={"generator": "lorentz_invariant"})
    w = np.random.default_rng(seed + 1).normal(0.0, 0.5, size=6)
    lam = mat_exp(np.tensordot(w, algebras.so13(), axes=1))
    _check_invariant(ds, lambda v: v @ lam.T, minkowski_norm, 1e-8)
    return ds


def _check_invariant(ds, act, target, tol, rows=100):
    x = ds.x[:rows]
    diff = np.abs(target(act(x)) - ds.y[:rows, 0])
    scale = np.maximum(1.0, np.abs(ds.y[:rows, 0]))
    if np.max(diff / scale) > tol:
        raise SymmetryCheckError(f"declared symmetry violated by {np.max(diff):.3g}")


GENERATORS = {
    "two_body": gen_two_body,
    "discrete_rotation": gen_discrete_rotation,
    "partial_permutation": gen_partial_permutation,
    "su2": gen_su2,
    "lorentz_invariant": gen_lorentz_invariant,
}


# -- CSV ---------------------------------------------------------------------

def _row_values(ds):
    x = ds.x
    y = ds.y.reshape(len(ds), -1)
    if ds.is_complex:
        def inter(a):
            a = a.astype(np.complex128)
            return np.stack([a.real, a.imag], axis=-1).reshape(len(a), -1)
        return np.concatenate([inter(x), inter(y)], axis=1)
    return np.concatenate([x, y.astype(np.float64)], axis=1)


def save_csv(path, ds, header=False):
    vals = _row_values(ds)
    n_y = ds.y_dim
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        if header:
            w.writerow([f"x{i}" for i in range(ds.x_dim)] + [f"y{i}" for i in range(n_y)])
        for row in vals:
            if ds.task == CLASSIFICATION:
                w.writerow([f"{v:.17g}" for v in row[:-1]] + [str(int(row[-1]))])
            else:
                w.writerow([f"{v:.17g}" for v in row])


def load_csv(path, n, m, task=REGRESSION, field="real", header=False, num_classes=None,
             t_in=None, t_out=None, step_dim=None):
    """Read ``n`` input and ``m`` output values per row.

    Complex files hold two numbers per entry, real part first.
    """
    per = 2 if field == "complex" else 1
    width = per * (n + m)
    rows = []
    with open(path, newline="") as f:
        for lineno, row in enumerate(csv.reader(f), start=1):
            if header and lineno == 1:
                continue
            if not row:
                continue
            if len(row) != width:
                raise ParseError(f"row {lineno}: expected {width} values, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as e:
                raise ParseError(f"row {lineno}: {e}") from None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    a = np.array(rows)
    if field == "complex":
        a = a[:, 0::2] + 1j * a[:, 1::2]
    x, y = a[:, :n], a[:, n:]
    if task == CLASSIFICATION:
        y = y.real.reshape(-1)
        if np.any(y != np.round(y)):
            raise ParseError("classification labels must be integers")
        y = y.astype(int)
        if num_classes is None:
            num_classes = int(y.max()) + 1
    return Dataset(x, y, task, num_classes, t_in, t_out, step_dim, info={"source": str(path)})
