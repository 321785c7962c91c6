"""Matrix-exponential and truncation-radius references for the solver tests."""
import numpy as np
import mpmath as mp
from scipy.linalg import expm

np.set_printoptions(precision=17)

A = np.array([[-2.0, 1, 0], [1, -2, 1], [0, 1, -2]])
print("3-site expm(A)1:", repr(expm(A) @ np.ones(3)))
# 3-site with v = (0.5, 1.0, -0.3), kappa = 0.7, t = 1.3
k = 0.7
B = np.array([[-2 * k + 0.5, k, 0], [k, -2 * k + 1.0, k], [0, k, -2 * k - 0.3]])
print("3-site v kappa=0.7 t=1.3:", repr(expm(1.3 * B) @ np.ones(3)))


def I(y):
    return y * mp.asinh(y) - mp.sqrt(1 + y * y) + 1


def smallest_R(cond):
    R = 1
    while not cond(R):
        R += 1
    return R


L = 8 * mp.log(10)
# -2 kappa t I(R/(2 kappa t)) + 2 d kappa t < log(1e-8) with kappa=1, t=2, d=1
print("R formula (4 I(R/4) - 4 > 8 ln 10):", smallest_R(lambda R: 4 * I(mp.mpf(R) / 4) - 4 > L))
print("R printed (2 I(R/4) - 2 > 8 ln 10):", smallest_R(lambda R: 2 * I(mp.mpf(R) / 4) - 2 > L))
