"""Scattering data of an exceptional potential and a generic one.

Run with ``python demos/01_scattering_data.py``.  Prints, for the tuned
square-well pair (a zero-energy resonance) and for a Gaussian well, the
zero-energy classification, the transmission coefficient near k = 0 and
the worst unitarity defect on the grid.
"""
import numpy as np

from dscatter.jost import MINUS, PLUS, compute_jost
from dscatter.potential import builtin, sample
from dscatter.scattering import classify, count_bound_states, scattering_data

k = np.linspace(0.0, 4.0, 401)  # the k = 0 row is extrapolated, so keep dk small
for name in ("square_well_pair", "gaussian"):
    p = sample(builtin(name), 20.0, 2049)
    jp, jm = compute_jost(p, k, PLUS), compute_jost(p, k, MINUS)
    cls, w0, a = classify(jp, jm)
    s = scattering_data(jp, jm)
    print(f"{name}: {cls.value}, W(0) = {abs(w0):.2e}, bound states = {count_bound_states(jp)}")
    # the generic transmission vanishes linearly, the exceptional one tends to a nonzero limit
    for kk, T in zip(s.k[[0, 1, 2, 50]], s.T[[0, 1, 2, 50]]):
        print(f"   k = {kk:.2f}   T = {T.real:+.6f}{T.imag:+.6f}i")
    print(f"   max | |T|^2 + |R|^2 - 1 | = {np.max(s.unitarity_defect()[1:]):.1e}")
