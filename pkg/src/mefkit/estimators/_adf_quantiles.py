"""Null-distribution quantiles of the unit-root t-statistic
(constant case), generated by scripts/gen_adf_quantiles.py
from 500000 random walks of length 1000 with seed 20240801.
"""
import numpy as np

PROBS = np.array([
    0.001,
    0.0025,
    0.005,
    0.01,
    0.02,
    0.03,
    0.05,
    0.075,
    0.1,
    0.15,
    0.2,
    0.3,
    0.4,
    0.5,
    0.6,
    0.7,
    0.8,
    0.9,
    0.95,
    0.975,
    0.99,
    0.999,
])

QUANTILES = np.array([
    -4.1027541899010025,
    -3.8571633898341195,
    -3.649485877257146,
    -3.4380706864937705,
    -3.207890750460895,
    -3.06248822339282,
    -2.865510380446821,
    -2.6994508878216297,
    -2.572587632555825,
    -2.375752246965141,
    -2.219460838979939,
    -1.9706972326024694,
    -1.762793446494258,
    -1.565564296468043,
    -1.366552870366665,
    -1.1422055136466567,
    -0.8600584824560418,
    -0.43719442419849963,
    -0.0757376095086938,
    0.2394291276398256,
    0.6107277230516222,
    1.3884242973540315,
])
