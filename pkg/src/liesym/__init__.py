"""Adversarial discovery of Lie group symmetries in labeled data."""

from .analysis import (MetricSolveConfig, SimilarityReport, augment_predict, compare_bases,
                       invariance_residual, solve_metric)
from .datasets import (Dataset, gen_discrete_rotation, gen_lorentz_invariant,
                       gen_partial_permutation, gen_su2, gen_two_body, load_csv, save_csv)
from .discriminator import Discriminator
from .generator import (GaussianCoefficients, Generator, IntegerGridCoefficients, LieBasis,
                        RepresentationSpec, apply_transform, sample_group_element)
from .linalg import cosine_sim, mat_exp, mat_exp_vjp
from .trainer import TrainHistory, TrainingConfig, chreg_loss, gan_losses, reg_loss, train

__version__ = "0.1.0"
