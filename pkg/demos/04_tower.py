"""Stacking the construction: a four-variable mean from three-variable ones.

Four copies of the symmetric geometric three-variable mean drive a
four-variable recursion.  On commuting scalars it must return the plain
geometric mean, so (1, 2, 3, 4) goes to 24 ** (1/4).

Run: python demos/04_tower.py
"""
import numpy as np

from alm_means import alm
from alm_means import kubo_ando as ka

inner = alm.build_alm_multimean((ka.geometric(),) * 3)
tower = alm.build_alm_n_multimean([inner] * 4)

value = tower(*(np.array([[float(v)]]) for v in (1, 2, 3, 4)))[0, 0]
print("tower(1, 2, 3, 4) =", value)
print("24 ** (1/4)       =", 24 ** 0.25)
print("finite-difference weights:", np.round(alm.estimate_weight_vector(tower), 8))

rng = np.random.default_rng(3)
mats = []
for _ in range(4):
    g = rng.standard_normal((2, 2))
    mats.append(g @ g.T + np.eye(2))
print("tower on 2x2 matrices:\n", tower(*mats))
