"""Score-based generative modeling numerics at desk scale.

Subpackages/modules:
  schedule   — OU time maps, regularizer, early stopping
  targets    — analytic targets with smoothed-density/score oracles
  kde_score  — KDE score estimators (regularized / truncated)
  relunet    — constructive ReLU network builders with error certificates
  mlp        — trainable MLP + denoising score matching
  sampler    — forward/reverse SDE simulation
  metrics    — divergences, losses, rate fitting
  harness    — CLI and experiment suites
"""

__version__ = "0.1.0"
