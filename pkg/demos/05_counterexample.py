"""A recursion that does not converge.

Six arithmetic five-variable means, each putting zero weight on some
arguments, give a periodic weight matrix.  The library refuses the
construction; forcing it shows a distance floor that never decays.

Run: python demos/05_counterexample.py
"""
import numpy as np

from alm_means import alm
from alm_means.errors import NonConverged, NotAffinelyDominated

even, odd = [0.0, 0.5, 0.5, 0.0, 0.0], [0.5, 0.5, 0.0, 0.0, 0.0]
means = [alm.arithmetic_multimean(even if k % 2 == 0 else odd) for k in range(6)]
mats = [np.array([[float(k + 1)]]) for k in range(6)]

try:
    alm.alm_compute_n(means, mats)
except NotAffinelyDominated as exc:
    print("rejected:", exc)

try:
    alm.alm_compute_n(means, mats, alm.AlmConfig(max_iter=200, unsafe_allow=True))
except NonConverged as exc:
    dists = [t.max_distance for t in exc.outcome.trace]
    print("forced run: NonConverged after", exc.outcome.iterations, "steps")
    print("max pairwise distance, steps 0-9:", np.round(dists[:10], 4))
    print("max pairwise distance, last 5:   ", np.round(dists[-5:], 4))
    print("members at the end:", [round(float(m[0, 0]), 4) for m in exc.outcome.members])
