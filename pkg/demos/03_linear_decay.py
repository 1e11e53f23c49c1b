"""Linear dispersion with a zero-energy resonance.

Evolves odd data under e^{-itH} for the exceptional square-well pair and
fits the decay of sup|u(t)|.  The fitted slope is close to -1/2, the free
rate: the resonance does not slow the decay of odd data.
"""
import math
import warnings

import numpy as np

from dscatter.factorization import evolve_linear, fit_loglog_slope
from dscatter.potential import builtin, sample
from dscatter.transform import build_basis

warnings.simplefilter("ignore")
p = sample(builtin("square_well_pair"), 256.0, 8193)
b = build_basis(p, math.pi / (2 * p.h), 8193)
u0 = b.x * np.exp(-(b.x**2))
ts = np.geomspace(5.0, 50.0, 8)
sup = [np.max(np.abs(evolve_linear(b, u0, t).values)) for t in ts]
for t, s in zip(ts, sup):
    print(f"t = {t:6.2f}   sup|u| = {s:.4e}   sqrt(t) sup|u| = {math.sqrt(t) * s:.4f}")
print(f"log-log slope {fit_loglog_slope(ts, sup):.3f}")
