"""Frozen oracle values and shared generators for the test suite.

The Bhattacharyya expectations were computed by an independent pure-python
closed-form evaluation (Gauss-Jordan inverse + elimination determinant) over
the exact pair sequence `frozen_gaussian_pairs` reproduces.
"""

import random

import numpy as np

from antijam.mjpf import Gaussian

BHATT_EXPECTED = [
    0.59568181121, 0.338849900844, 0.27149141931, 0.939622244212,
    1.282437925128, 1.611168927091, 0.812137552345, 0.616093344906,
    0.525692104739, 0.641710106117, 1.557681472813, 0.810342248707,
    0.505736225441, 0.661865508769, 0.793124230898, 0.59781834547,
    0.855981303469, 0.352246016929, 0.60214956273, 0.938324703759,
]

# brute-force direct summation over the 2-point support
SKL_TWO_POINT = 3.5155593237379517

CHI2_49_AT_1PCT = 74.919


def frozen_gaussian_pairs():
    rng = random.Random(20240)
    pairs = []
    for _ in range(20):
        n = 4
        mu1 = [rng.uniform(-2, 2) for _ in range(n)]
        mu2 = [rng.uniform(-2, 2) for _ in range(n)]

        def spd():
            a = [[rng.uniform(-1, 1) for _ in range(n)] for _ in range(n)]
            return [
                [sum(a[i][k] * a[j][k] for k in range(n)) + (1.0 if i == j else 0.0)
                 for j in range(n)]
                for i in range(n)
            ]

        s1, s2 = spd(), spd()
        pairs.append(
            (Gaussian(np.array(mu1), np.array(s1)), Gaussian(np.array(mu2), np.array(s2)))
        )
    return pairs


def random_simplex(rng, n):
    v = rng.exponential(size=n)
    return v / v.sum()
