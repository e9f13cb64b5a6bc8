# %% [markdown]
# # Lorentz symmetry and the metric it preserves
#
# Targets are the Minkowski norm `E^2 - |p|^2` of Gaussian 4-vectors. We learn
# 7 generators (one more than so(1,3) has) with the channel penalty pushing
# them apart, then recover the invariant metric from the learned algebra alone.

# %%
import numpy as np

from liesym import Discriminator, GaussianCoefficients, LieBasis, RepresentationSpec
from liesym import algebras, gen_lorentz_invariant
from liesym.analysis import MetricSolveConfig, best_channels, compare_bases, solve_metric
from liesym.linalg import cosine_sim
from liesym.trainer import TrainingConfig, train

ds = gen_lorentz_invariant(10000, seed=0)
rng = np.random.default_rng(0)
basis = LieBasis.random(7, 4, rng)
disc = Discriminator(4, 1, rng, hidden=512)
cfg = TrainingConfig(lam=1.0, eta=0.1, epochs=100, seed=0)
basis, dist, hist = train(ds, basis, GaussianCoefficients.make(7), RepresentationSpec(1, None),
                          disc, cfg)

# %% [markdown]
# Learned channels only match the textbook boosts and rotations up to a
# change of basis, so the comparison uses principal angles between spans.

# %%
truth = algebras.so13()
channels = best_channels(basis, truth, 6)
report = compare_bases(basis.matrices()[channels], truth)
print("channels", channels)
print("principal cosines", report.principal_cosines.round(4))
print("subspace score", round(report.subspace_score, 4))

# %% [markdown]
# A metric `J` is invariant when `L^T J + J L = 0` for every generator.

# %%
J = solve_metric(basis, MetricSolveConfig(), channels)
print(J.round(3))
print("cos to diag(1,-1,-1,-1):", cosine_sim(J, algebras.minkowski()))
