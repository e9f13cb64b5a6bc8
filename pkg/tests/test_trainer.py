import math

import numpy as np
import pytest

from liesym import algebras
from liesym import autograd as ad
from liesym.datasets import Dataset, gen_discrete_rotation
from liesym.discriminator import Discriminator
from liesym.generator import (GaussianCoefficients, IntegerGridCoefficients, LieBasis,
                              RepresentationSpec)
from liesym.linalg import DomainError, SimilarityError
from liesym.trainer import (TrainHistory, Trainer, TrainingConfig, TrainingDivergence,
                            chreg_loss, gan_losses, reg_loss, train)


def test_uninformative_discriminator_losses():
    d, g = gan_losses(np.full(8, 0.5), np.full(8, 0.5))
    assert d == pytest.approx(2 * math.log(2), abs=1e-15)
    assert g == pytest.approx(math.log(2), abs=1e-15)


def test_perfect_discriminator_limit():
    d, _ = gan_losses(np.ones(4), np.zeros(4))
    assert d == pytest.approx(-2 * math.log(1 - 1e-7), abs=1e-15)
    assert d < 1e-6


def test_losses_match_scalar_formula():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(1, 40))
        pr, pf = rng.uniform(0.01, 0.99, n), rng.uniform(0.01, 0.99, n)
        d_ref = -sum(math.log(a) + math.log(1 - b) for a, b in zip(pr, pf)) / n
        g_ref = -sum(math.log(b) for b in pf) / n
        m_ref = sum(math.log(1 - b) for b in pf) / n
        d, g = gan_losses(pr, pf)
        _, m = gan_losses(pr, pf, minimax=True)
        assert abs(d - d_ref) <= 1e-12 and abs(g - g_ref) <= 1e-12 and abs(m - m_ref) <= 1e-12


def test_empty_batch():
    with pytest.raises(DomainError):
        gan_losses(np.array([]), np.array([]))


def test_reg_loss_examples():
    x, y = np.array([1.0, 2.0]), np.array([3.0])
    assert reg_loss(x, y, x, y) == pytest.approx(1.0)
    assert reg_loss(x, y, -x, -y) == pytest.approx(-1.0)
    assert reg_loss(np.array([1.0, 0.0]), np.array([]), np.array([0.0, 1.0]), np.array([])) == 0.0
    with pytest.raises(SimilarityError):
        reg_loss(np.zeros(2), np.zeros(1), np.ones(2), np.ones(1))


def test_chreg_examples():
    rng = np.random.default_rng(1)
    assert chreg_loss(LieBasis.random(1, 3, rng)) == 0.0
    L = rng.standard_normal((3, 3))
    assert chreg_loss(np.stack([L, 3 * L])) == pytest.approx(1.0)
    assert chreg_loss(np.stack([L, -3 * L])) == pytest.approx(1.0)
    assert chreg_loss(algebras.so3()) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(SimilarityError):
        chreg_loss(np.stack([L, np.zeros((3, 3))]))


def test_invalid_config():
    with pytest.raises(DomainError):
        TrainingConfig(lr_d=-1)
    with pytest.raises(DomainError):
        TrainingConfig(batch_size=0)


def _small_setup(seed=0, n=64, **cfg):
    ds = gen_discrete_rotation(7, n, seed=seed)
    rng = np.random.default_rng(seed)
    basis = LieBasis.random(1, 3, rng)
    disc = Discriminator(3, 1, rng, hidden=16)
    cfg = TrainingConfig(**{"epochs": 2, "batch_size": 16, "seed": seed, "lam": 0.01, **cfg})
    return ds, basis, IntegerGridCoefficients(-10, 10, 1), RepresentationSpec(1, None), disc, cfg


def test_zero_learning_rate_leaves_parameters():
    ds, basis, dist, rep, disc, cfg = _small_setup(epochs=1, lr_d=0.0, lr_g=0.0)
    before_b, before_d = basis.params.copy(), disc.state()
    train(ds, basis, dist, rep, disc, cfg)
    np.testing.assert_array_equal(basis.params, before_b)
    for a, b in zip(disc.state(), before_d):
        np.testing.assert_array_equal(a, b)


def test_identity_start_diagnostics():
    x = np.tile([[0.3, -1.2, 0.7]], (8, 1))
    ds = Dataset(x, np.full((8, 1), 0.4))
    rng = np.random.default_rng(2)
    disc = Discriminator(3, 1, rng, hidden=16)
    basis = LieBasis(np.zeros((1, 3, 3)), 3)
    cfg = TrainingConfig(lam=1.0, eta=0.0, batch_size=8)
    tr = Trainer(ds, basis, GaussianCoefficients.make(1), RepresentationSpec(1, None), disc, cfg)
    adv, reg, _, _ = tr.generator_objective(ds.x, ds.y)
    p = disc(ad.Var(x[:1]), ad.Var(np.array([[0.4]]))).value[0]
    assert float(adv.value) == pytest.approx(-math.log(p), abs=1e-12)
    assert float(reg.value) == pytest.approx(1.0, abs=1e-15)


def test_objective_decomposition():
    for lam, eta in [(0.0, 0.0), (0.5, 0.1)]:
        ds, _, _, rep, disc, cfg = _small_setup(lam=lam, eta=eta)
        basis = LieBasis.random(2, 3, np.random.default_rng(4))
        dist = GaussianCoefficients.make(2)
        tr = Trainer(ds, basis, dist, rep, disc, cfg)
        adv, reg, ch, total = tr.generator_objective(ds.x[:16], ds.y[:16])
        expected = adv.value + lam * reg.value + eta * ch.value
        assert abs(float(total.value) - float(expected)) <= 1e-12
        if lam == eta == 0:
            assert float(total.value) == float(adv.value)


def test_objective_adversarial_term_is_gan_generator_loss():
    ds, basis, dist, rep, disc, cfg = _small_setup(lam=0.0)
    tr = Trainer(ds, basis, dist, rep, disc, cfg)
    state = tr.rng.bit_generator.state
    adv, *_ = tr.generator_objective(ds.x[:16], ds.y[:16])
    tr.rng.bit_generator.state = state
    x2, y2 = tr._transform(ds.x[:16], ds.y[:16], track=False)
    _, g = gan_losses(disc(ad.Var(ds.x[:16]), ad.Var(ds.y[:16])).value, disc(x2, y2).value)
    assert abs(float(adv.value) - g) <= 1e-12


def test_history_length_and_determinism(tmp_path):
    runs = []
    for _ in range(2):
        ds, basis, dist, rep, disc, cfg = _small_setup(seed=5, epochs=3, snapshot_every=1)
        _, _, hist = train(ds, basis, dist, rep, disc, cfg)
        runs.append((basis.params.copy(), hist))
    (b1, h1), (b2, h2) = runs
    assert len(h1) == 3 and len(h1.snapshots) == 3
    np.testing.assert_array_equal(b1, b2)
    h1.to_csv(tmp_path / "a.csv")
    h2.to_csv(tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == "epoch,d_loss,g_loss,reg,chreg"


def test_generator_frozen_when_not_trained():
    ds, basis, dist, rep, disc, cfg = _small_setup(train_generator=False)
    before = basis.params.copy()
    _, _, hist = train(ds, basis, dist, rep, disc, cfg)
    np.testing.assert_array_equal(basis.params, before)
    assert hist.g_loss == [0.0, 0.0]


def test_divergence_reports_epoch_and_term():
    ds, basis, dist, rep, disc, cfg = _small_setup()
    ds.y[3, 0] = np.nan
    with pytest.raises(TrainingDivergence) as err:
        train(ds, basis, dist, rep, disc, cfg)
    assert err.value.epoch == 1 and err.value.term == "d_loss"


def test_history_csv_round_trips_floats(tmp_path):
    h = TrainHistory([0.1 + 1e-16, 1 / 3], [2.0, 3.0], [0.5, 0.25], [0.0, 0.0])
    h.to_csv(tmp_path / "h.csv")
    rows = (tmp_path / "h.csv").read_text().splitlines()[1:]
    assert [float(r.split(",")[1]) for r in rows] == h.d_loss
