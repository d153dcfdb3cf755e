"""Two-variable operator means on small matrices.

Run: python demos/01_two_variable_means.py
"""
import numpy as np

from alm_means import kubo_ando as ka

a = np.array([[2.0, 1.0], [1.0, 2.0]])
b = np.array([[3.0, 0.0], [0.0, 1.0]])

print("A =\n", a, "\nB =\n", b)
for kind in ka.BUILTIN_KINDS:
    sigma = ka.make_mean(kind, 0.5)
    print(f"\n{sigma}:\n", np.round(ka.evaluate(sigma, a, b), 6))

# harmonic <= geometric <= arithmetic in Loewner order
h, g, m = (ka.evaluate(ka.make_mean(k, 0.5), a, b) for k in ("harmonic", "geometric", "arithmetic"))
print("\nsmallest eigenvalue of geometric - harmonic:", np.linalg.eigvalsh(g - h)[0])
print("smallest eigenvalue of arithmetic - geometric:", np.linalg.eigvalsh(m - g)[0])

# the adjoint swaps arithmetic and harmonic and fixes geometric
for kind in ka.BUILTIN_KINDS:
    print(f"adjoint of {kind}: {ka.adjoint(ka.make_mean(kind, 0.3)).kind}")
