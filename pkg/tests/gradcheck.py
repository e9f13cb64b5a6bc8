"""Central finite differences, the oracle for every reverse-mode adjoint."""

import numpy as np

from liesym import autograd as ad


def numeric_grad(f, arrays, i, h=1e-6):
    """d f / d arrays[i] by central differences; complex entries get re + 1j*im."""
    base = [np.array(a, copy=True) for a in arrays]
    x = base[i]
    out = np.zeros_like(x)
    dirs = [1.0, 1j] if np.iscomplexobj(x) else [1.0]
    for idx in np.ndindex(x.shape):
        for d in dirs:
            plus = [a.copy() for a in base]
            minus = [a.copy() for a in base]
            plus[i][idx] += h * d
            minus[i][idx] -= h * d
            diff = (f(*plus) - f(*minus)) / (2 * h)
            out[idx] += diff * d
    return out


def reverse_grads(build, arrays):
    vars_ = [ad.param(a) for a in arrays]
    out = build(*vars_)
    out.backward()
    return [v.grad if v.grad is not None else np.zeros_like(v.value) for v in vars_]


def max_rel_error(build, arrays, h=1e-6):
    """Largest relative discrepancy between reverse-mode and numeric gradients."""
    def scalar(*arrs):
        return float(np.real(build(*[ad.Var(a) for a in arrs]).value))

    worst = 0.0
    for i, g in enumerate(reverse_grads(build, arrays)):
        num = numeric_grad(scalar, arrays, i, h)
        scale = max(np.abs(num).max(), np.abs(g).max(), 1e-8)
        worst = max(worst, np.abs(g - num).max() / scale)
    return worst
