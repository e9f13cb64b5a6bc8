"""Adversarial training of the symmetry generator against the discriminator."""

import csv
from dataclasses import asdict, dataclass, field

import numpy as np

from . import autograd as ad
from .generator import Generator
from .linalg import DomainError, SimilarityError
from .optim import Adam

PROB_CLAMP = 1e-7


class TrainingDivergence(RuntimeError):
    def __init__(self, epoch, term, value):
        super().__init__(f"non-finite {term} ({value}) at epoch {epoch}")
        self.epoch = epoch
        self.term = term


@dataclass
class TrainingConfig:
    lam: float = 1.0          # weight of the input/output similarity penalty
    eta: float = 0.0          # weight of the channel similarity penalty
    lr_d: float = 2e-4
    lr_g: float = 1e-3
    epochs: int = 100
    batch_size: int = 256
    seed: int = 0
    d_steps: int = 1
    minimax: bool = False     # generator minimizes log(1 - D) instead of -log D
    train_generator: bool = True
    snapshot_every: int = 10
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.lr_d < 0 or self.lr_g < 0 or self.lam < 0 or self.eta < 0:
            raise DomainError("rates and loss weights must be non-negative")
        if self.epochs < 0 or self.batch_size < 1 or self.d_steps < 1:
            raise DomainError("epochs >= 0, batch_size >= 1, d_steps >= 1 required")


@dataclass
class TrainHistory:
    d_loss: list = field(default_factory=list)
    g_loss: list = field(default_factory=list)
    reg: list = field(default_factory=list)
    chreg: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)   # (epoch, basis params)

    def __len__(self):
        return len(self.d_loss)

    def rows(self):
        for i in range(len(self)):
            yield i + 1, self.d_loss[i], self.g_loss[i], self.reg[i], self.chreg[i]

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["epoch", "d_loss", "g_loss", "reg", "chreg"])
            for epoch, *vals in self.rows():
                w.writerow([epoch] + [f"{v:.17g}" for v in vals])


def _log_prob(p):
    return ad.log(ad.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP))


def gan_losses(d_real, d_fake, minimax=False):
    """Discriminator loss and generator loss from batches of probabilities.

    ``d_loss = -mean(log D(real) + log(1 - D(fake)))``. The generator loss is
    ``-mean(log D(fake))``, or ``mean(log(1 - D(fake)))`` with ``minimax``.
    Returns Vars when given Vars, floats otherwise.
    """
    plain = not (isinstance(d_real, ad.Var) or isinstance(d_fake, ad.Var))
    d_real, d_fake = ad.as_var(d_real), ad.as_var(d_fake)
    if d_real.value.size == 0 or d_fake.value.size == 0:
        raise DomainError("empty probability batch")
    d_loss = -(ad.mean(_log_prob(d_real)) + ad.mean(_log_prob(1.0 - d_fake)))
    if minimax:
        g_loss = ad.mean(_log_prob(1.0 - d_fake))
    else:
        g_loss = -ad.mean(_log_prob(d_fake))
    if plain:
        return float(d_loss.value), float(g_loss.value)
    return d_loss, g_loss


def _joint(x, y):
    y = ad.as_var(y)
    if y.ndim == 1:
        y = ad.reshape(y, (-1, 1))
    return ad.concat([ad.realify(x), ad.realify(y)])


def reg_loss(x, y, x2, y2):
    """Cosine similarity between ``(x', y')`` and ``(x, y)``, row-wise.

    Accepts single vectors or row batches of plain arrays.
    """
    x, y, x2, y2 = (np.atleast_1d(np.asarray(a)) for a in (x, y, x2, y2))
    single = x.ndim == 1
    if single:
        x, y, x2, y2 = x[None], y[None], x2[None], y2[None]
    out = ad.cosine_sim(_joint(x2, y2), _joint(x, y)).value
    return float(out[0]) if single else out


def _chreg_var(mats, jitter=1e-12):
    c = mats.shape[0]
    if c < 2:
        return ad.Var(0.0)
    k = mats.shape[-1]
    flat = ad.reshape(mats + jitter * np.eye(k), (c, k * k))
    total = None
    for i in range(c):
        for j in range(i + 1, c):
            term = ad.abs_(ad.cosine_sim(flat[i], flat[j]))
            total = term if total is None else total + term
    return total


def chreg_loss(basis):
    """Sum over channel pairs of ``|cos(L_i, L_j)|``; 0 for a single channel."""
    mats = basis.matrices() if hasattr(basis, "matrices") else np.asarray(basis)
    c = mats.shape[0]
    if c < 2:
        return 0.0
    flat = mats.reshape(c, -1)
    if np.any(np.linalg.norm(flat, axis=1) == 0):
        raise SimilarityError("zero-norm channel in basis")
    return float(_chreg_var(ad.Var(mats), jitter=0.0).value)


TERMS = ("d_loss", "g_loss", "reg", "chreg")


def _check_finite(epoch, terms, values):
    for term, v in zip(terms, values):
        if not np.isfinite(v):
            raise TrainingDivergence(epoch, term, v)


class Trainer:
    """Holds generator, discriminator and their optimizers for stepwise use."""

    def __init__(self, dataset, basis, dist, rep, disc, cfg):
        rep.check(basis.k, dataset.x_dim, dataset.y_dim)
        self.data = dataset
        self.cfg = cfg
        self.gen = Generator(basis, dist, rep)
        self.disc = disc
        self.rng = np.random.default_rng(cfg.seed)
        self.d_opt = Adam(disc.parameters(), cfg.lr_d, cfg.beta1, cfg.beta2, cfg.adam_eps)
        self.g_opt = Adam(self.gen.parameters(), cfg.lr_g, cfg.beta1, cfg.beta2, cfg.adam_eps)

    def _transform(self, xb, yb, track):
        gen = self.gen
        if track:
            return gen.transform(ad.Var(xb), ad.Var(yb), self.rng)[:2]
        saved = gen.basis_var, gen.log_sigma_var
        gen.basis_var = ad.Var(saved[0].value)
        gen.log_sigma_var = None if saved[1] is None else ad.Var(saved[1].value)
        try:
            x2, y2, _ = gen.transform(ad.Var(xb), ad.Var(yb), self.rng)
        finally:
            gen.basis_var, gen.log_sigma_var = saved
        return x2, y2

    def _y_for_disc(self, y):
        return y.value if self.disc.embed is not None else y

    def d_step(self, xb, yb):
        x2, y2 = self._transform(xb, yb, track=False)
        d_real = self.disc(ad.Var(xb), self._y_for_disc(ad.Var(yb)))
        d_fake = self.disc(x2, self._y_for_disc(y2))
        d_loss, _ = gan_losses(d_real, d_fake, self.cfg.minimax)
        self.d_opt.zero_grad()
        d_loss.backward()
        self.d_opt.step()
        return float(d_loss.value)

    def generator_objective(self, xb, yb):
        """Generator loss terms on one batch, as Vars: (adv, reg, chreg, total)."""
        cfg = self.cfg
        x2, y2 = self._transform(xb, yb, track=True)
        d_fake = self.disc(x2, self._y_for_disc(y2))
        if cfg.minimax:
            adv = ad.mean(_log_prob(1.0 - d_fake))
        else:
            adv = -ad.mean(_log_prob(d_fake))
        reg = ad.mean(ad.cosine_sim(_joint(x2, y2), _joint(xb, yb)))
        ch = _chreg_var(self.gen.matrices_var()) if cfg.eta > 0 else ad.Var(0.0)
        total = adv
        if cfg.lam > 0:
            total = total + cfg.lam * reg
        if cfg.eta > 0:
            total = total + cfg.eta * ch
        return adv, reg, ch, total

    def g_step(self, xb, yb):
        adv, reg, ch, total = self.generator_objective(xb, yb)
        self.g_opt.zero_grad()
        self.d_opt.zero_grad()
        total.backward()
        self.g_opt.step()
        self.gen.sync()
        return float(adv.value), float(reg.value), float(ch.value), float(total.value)

    def run(self):
        cfg = self.cfg
        hist = TrainHistory()
        n = len(self.data)
        bs = min(cfg.batch_size, n)
        for epoch in range(1, cfg.epochs + 1):
            order = self.rng.permutation(n)
            sums = np.zeros(4)
            count = 0
            for start in range(0, n - bs + 1, bs):
                idx = order[start:start + bs]
                xb, yb = self.data.x[idx], self.data.y[idx]
                for _ in range(cfg.d_steps):
                    d = self.d_step(xb, yb)
                    _check_finite(epoch, ("d_loss",), (d,))
                if cfg.train_generator:
                    g, r, c, _ = self.g_step(xb, yb)
                    # stop before a non-finite update reaches the next batch
                    _check_finite(epoch, TERMS[1:], (g, r, c))
                else:
                    g = r = c = 0.0
                sums += (d, g, r, c)
                count += 1
            for term, v in zip(TERMS, sums / count):
                getattr(hist, term).append(float(v))
            if cfg.snapshot_every and epoch % cfg.snapshot_every == 0:
                hist.snapshots.append((epoch, self.gen.basis.params.copy()))
        self.gen.sync()
        return self.gen.basis, self.gen.dist, hist


def train(dataset, basis, dist, rep, disc, cfg):
    """Alternate discriminator and generator Adam steps for ``cfg.epochs``.

    ``basis`` and ``dist`` are updated in place and also returned together
    with the per-epoch :class:`TrainHistory`.
    """
    return Trainer(dataset, basis, dist, rep, disc, cfg).run()


def config_dict(cfg):
    return asdict(cfg)
