import numpy as np


def _sq(g):
    # complex parameters are two independent real parameters
    if np.iscomplexobj(g):
        return g.real * g.real + 1j * (g.imag * g.imag)
    return g * g


def _scaled(m, v, eps):
    if np.iscomplexobj(m):
        return m.real / (np.sqrt(v.real) + eps) + 1j * (m.imag / (np.sqrt(v.imag) + eps))
    return m / (np.sqrt(v) + eps)


class Adam:
    """Adam over a list of leaf Vars, reading each Var's ``.grad``."""

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.value) for p in self.params]
        self.v = [np.zeros_like(p.value) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for p, m, v in zip(self.params, self.m, self.v):
            if p.grad is None:
                continue
            g = p.grad
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * _sq(g)
            if self.lr == 0:
                continue
            p.value = p.value - self.lr * _scaled(m / bc1, v / bc2, self.eps)
