# %% [markdown]
# # Finding rotation symmetry in 2-body orbits
#
# Each sample is 5 past and 5 future states of two equal masses on a circular
# orbit. A state is `[q1, p1, q2, p2]` with 2D positions and momenta, so the
# natural rotation acts on 4 pairs of coordinates at once. We ask the generator
# for a single 2x2 block repeated along the diagonal of an 8x8 matrix and let
# the adversarial game decide what that block should be.

# %%
import numpy as np

from liesym import Discriminator, GaussianCoefficients, LieBasis, RepresentationSpec, gen_two_body
from liesym import algebras
from liesym.linalg import cosine_sim
from liesym.trainer import TrainingConfig, train

ds = gen_two_body(5000, seed=0)
print(ds.x.shape, ds.y.shape)

# %% [markdown]
# The 8x8 group element acts on each of the 5 input steps and 5 output steps.

# %%
rng = np.random.default_rng(0)
basis = LieBasis.random(1, 8, rng, block_size=2)
dist = GaussianCoefficients.make(1, 1.0)
rep = RepresentationSpec(in_blocks=5, out_blocks=5)
disc = Discriminator(40, 40, rng, hidden=128)
print("initial block\n", basis.params[0].round(3))

# %%
basis, dist, hist = train(ds, basis, dist, rep, disc, TrainingConfig(lam=1.0, epochs=100, seed=0))
print("d_loss every 10 epochs:", np.round(hist.d_loss[::10], 4))

# %% [markdown]
# The scale of a continuous generator carries no meaning (the coefficient
# distribution can absorb it), so we compare directions only.

# %%
block = basis.params[0]
print("learned block\n", block.round(3))
print("|cos| to [[0,-1],[1,0]]:", abs(cosine_sim(block, algebras.ROT2)))
