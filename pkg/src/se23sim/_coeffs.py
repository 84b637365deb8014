"""Series coefficients for the inverse-Jacobian expansion.

BERNOULLI_OVER_FACT[k] = B_k^+ / k! with the B_1 = +1/2 sign convention,
so that sum_k BERNOULLI_OVER_FACT[k] * x^k = x / (1 - exp(-x)).  Evaluated
exactly with Fractions and frozen here; keep in sync with _purepy/_core.
"""

import numpy as np

BERNOULLI_OVER_FACT = np.array([
    1.0,
    0.5,
    0.08333333333333333,
    0.0,
    -0.001388888888888889,
    0.0,
    3.306878306878307e-05,
    0.0,
    -8.267195767195768e-07,
    0.0,
    2.08767569878681e-08,
    0.0,
    -5.284190138687493e-10,
    0.0,
    1.3382536530684679e-11,
    0.0,
    -3.3896802963225827e-13,
    0.0,
    8.586062056277845e-15,
    0.0,
    -2.174868698558062e-16,
    0.0,
    5.5090028283602295e-18,
    0.0,
    -1.3954464685812522e-19,
    0.0,
    3.534707039629467e-21,
    0.0,
    -8.953517427037546e-23,
    0.0,
    2.267952452337683e-24,
    0.0,
    -5.744790668872202e-26,
    0.0,
    1.455172475614865e-27,
    0.0,
    -3.6859949406653103e-29,
    0.0,
    9.336734257095045e-31,
    0.0,
    -2.36502241570063e-32,
    0.0,
])

SERIES_MAX_TERMS = 40
SERIES_TOL = 1e-14
