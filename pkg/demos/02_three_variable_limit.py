"""The three-variable recursion converging to a common limit.

Each step replaces (A, B, C) by (B s1 C, C s2 A, A s3 B).  The three members
draw together while the weighted aggregate p1 A + p2 B + p3 C only shrinks.

Run: python demos/02_three_variable_limit.py
"""
import numpy as np

from alm_means import alm
from alm_means import kubo_ando as ka

rng = np.random.default_rng(7)
mats = []
for _ in range(3):
    g = rng.standard_normal((3, 3))
    mats.append(g @ g.T + 0.5 * np.eye(3))

triple = (ka.geometric(0.5), ka.harmonic(1 / 3), ka.geometric(0.25))
out = alm.alm_compute(triple, *mats)

print("weights p:", np.round(out.p, 6))
print(f"{'step':>4}  {'max pairwise distance':>22}  {'|S_n - S_n+1|':>14}")
for rec in out.trace[:12]:
    print(f"{rec.iteration:>4}  {rec.max_distance:>22.3e}  {rec.step_frobenius:>14.3e}")
print(f"... stopped after {out.iterations} steps ({out.stop_reason})")
print("most negative eigenvalue of S_n - S_n+1 seen:", out.s_monotone_violation)
print("limit:\n", np.round(out.limit, 8))

# the limit sits between the weighted harmonic and arithmetic means
arith = sum(p * m for p, m in zip(out.p, mats))
harm = np.linalg.inv(sum(p * np.linalg.inv(m) for p, m in zip(out.p, mats)))
print("min eig(limit - harmonic):", np.linalg.eigvalsh(out.limit - harm)[0])
print("min eig(arithmetic - limit):", np.linalg.eigvalsh(arith - out.limit)[0])
