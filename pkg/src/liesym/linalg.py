"""Small dense matrix algebra: exponential, its adjoint, cosine similarity.

Everything here works on real or complex ``ndarray`` values and on stacks of
matrices (leading batch axes). Complex adjoints follow the convention
``grad = dL/dRe + 1j * dL/dIm`` for a real scalar loss ``L``, so the adjoint
of a product ``A @ B`` is ``G @ B^H`` in both fields.
"""

import json

import numpy as np

TAYLOR_DEGREE = 16


class ShapeError(ValueError):
    pass


class DomainError(ValueError):
    pass


class SimilarityError(DomainError):
    """Cosine similarity requested for a zero-norm argument."""


def _herm(a):
    return np.conj(np.swapaxes(a, -1, -2))


def _check_square(a, name="A"):
    a = np.asarray(a)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ShapeError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} has non-finite entries")
    if not np.iscomplexobj(a):
        a = a.astype(np.float64, copy=False)
    return a


def squaring_count(a):
    """Number of squarings used for each matrix in a stack.

    ``s = max(0, ceil(log2 ||A||_F) + 4)``; the scaled matrix then has
    Frobenius norm at most 1/16.
    """
    norms = np.linalg.norm(np.asarray(a), axis=(-2, -1))
    with np.errstate(divide="ignore"):
        s = np.ceil(np.log2(norms)) + 4
    s = np.where(np.isfinite(s), s, 0)
    return np.maximum(s, 0).astype(int)


def _exp_fixed(b, s):
    """Degree-16 Horner series of ``b`` followed by ``s`` squarings.

    Returns the result and the intermediates the adjoint needs.
    """
    eye = np.broadcast_to(np.eye(b.shape[-1], dtype=b.dtype), b.shape)
    horner = [eye]
    t = eye
    for j in range(TAYLOR_DEGREE, 0, -1):
        t = eye + (b @ t) / j
        horner.append(t)
    squares = [t]
    for _ in range(s):
        t = t @ t
        squares.append(t)
    return t, horner, squares


def _exp_fixed_vjp(b, s, gbar):
    _, horner, squares = _exp_fixed(b, s)
    g = gbar
    for x in reversed(squares[:-1]):
        g = g @ _herm(x) + _herm(x) @ g
    bbar = np.zeros_like(g)
    bh = _herm(b)
    # horner[i] is T after step j = 17 - i; T_new = I + B T_old / j
    for i in range(len(horner) - 1, 0, -1):
        j = TAYLOR_DEGREE + 1 - i
        t_old = horner[i - 1]
        bbar = bbar + g @ _herm(t_old) / j
        g = bh @ g / j
    return bbar / 2.0 ** s


def _grouped(a, fn):
    """Apply ``fn(scaled, s)`` to groups of matrices sharing a squaring count."""
    lead = a.shape[:-2]
    flat = a.reshape((-1,) + a.shape[-2:])
    s_all = squaring_count(flat)
    out = np.empty_like(flat)
    for s in np.unique(s_all):
        idx = np.nonzero(s_all == s)[0]
        out[idx] = fn(idx, int(s))
    return out.reshape(lead + a.shape[-2:])


def mat_exp(a):
    """Matrix exponential by scaling and squaring.

    Accepts a single square matrix or a stack ``(..., k, k)``; each matrix
    gets its own squaring count.
    """
    a = _check_square(a)
    flat = a.reshape((-1,) + a.shape[-2:])

    def run(idx, s):
        return _exp_fixed(flat[idx] / 2.0 ** s, s)[0]

    return _grouped(a, run)


def mat_exp_vjp(a, gbar):
    """Adjoint of ``A -> exp(A)`` applied to the cotangent ``gbar``.

    Obtained by running the scaling-and-squaring recurrence backwards, so
    it is the exact derivative of what :func:`mat_exp` computes.
    """
    a = _check_square(a)
    gbar = np.asarray(gbar)
    if gbar.shape != a.shape:
        raise ShapeError(f"cotangent shape {gbar.shape} != input shape {a.shape}")
    if np.iscomplexobj(gbar) and not np.iscomplexobj(a):
        gbar = gbar.real
    flat = a.reshape((-1,) + a.shape[-2:])
    gflat = gbar.reshape(flat.shape).astype(flat.dtype, copy=False)

    def run(idx, s):
        return _exp_fixed_vjp(flat[idx] / 2.0 ** s, s, gflat[idx])

    return _grouped(a, run)


def taylor_exp(a, terms=60):
    """Raw truncated power series; slow and only accurate for modest norms."""
    a = np.asarray(a)
    out = np.eye(a.shape[-1], dtype=a.dtype)
    term = np.eye(a.shape[-1], dtype=a.dtype)
    for n in range(1, terms):
        term = term @ a / n
        out = out + term
    return out


def cosine_sim(a, b):
    """Cosine of the angle between ``vec(a)`` and ``vec(b)``.

    For complex input this is ``Re <a, b>_H / (||a|| ||b||)``.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    na = np.linalg.norm(a.ravel())
    nb = np.linalg.norm(b.ravel())
    if na == 0 or nb == 0:
        raise SimilarityError("cosine similarity undefined for a zero-norm argument")
    dot = np.vdot(a.ravel(), b.ravel()).real
    return float(np.clip(dot / (na * nb), -1.0, 1.0))


# JSON matrix format: {"field": "real"|"complex", "rows": [[...], ...]};
# complex entries are [re, im] pairs.

def matrix_to_obj(m):
    m = np.asarray(m)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {m.shape}")
    if np.iscomplexobj(m):
        rows = [[[float(v.real), float(v.imag)] for v in row] for row in m]
        return {"field": "complex", "rows": rows}
    return {"field": "real", "rows": [[float(v) for v in row] for row in m]}


def matrix_from_obj(obj):
    field = obj.get("field", "real")
    rows = obj["rows"]
    if field == "complex":
        arr = np.array(rows, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[-1] != 2:
            raise ShapeError("complex matrix entries must be [re, im] pairs")
        return arr[..., 0] + 1j * arr[..., 1]
    if field != "real":
        raise DomainError(f"unknown field tag {field!r}")
    arr = np.array(rows, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError("matrix rows must have equal length")
    return arr


def dumps_matrix(m):
    return json.dumps(matrix_to_obj(m))


def loads_matrix(text):
    return matrix_from_obj(json.loads(text))
