"""Where the aggregate weights come from.

Row k of the weight matrix says how much the next k-th member draws on the
current ones.  Its left Perron vector p is the set of weights the aggregate
uses, and powers of the matrix converge to rows equal to p.

Run: python demos/03_weights_and_perron.py
"""
import numpy as np

from alm_means import stochastic

r = (0.5, 1 / 3, 0.25)
prof = stochastic.gamma_from_weights_3(*r)
print("weight matrix:\n", np.round(prof.gamma, 4))
print("p (closed form):", prof.p, " times 11:", np.round(prof.p * 11, 10))
print("p (eigen solve):", stochastic.perron_vector(prof.gamma))
print("rows of the 50th power:\n", np.linalg.matrix_power(prof.gamma, 50))
print("spectral gap:", prof.spectral_gap)

print("\nperiodic matrices never settle:")
for name, g in (("3x3 cyclic shift", stochastic.cyclic_shift(3)),
                ("6x6 shift of averages", stochastic.cyclic_averaging_gamma())):
    primitive, _ = stochastic.check_primitive(g)
    drift = np.abs(np.linalg.matrix_power(g, 201) - np.linalg.matrix_power(g, 200)).max()
    print(f"  {name}: primitive={primitive}, |G^201 - G^200| = {drift}")
