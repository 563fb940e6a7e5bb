"""
Decoherence and revivals of a reduced state
===========================================

A spin-1/2 coupled to a large spin loses purity quickly and recovers it
periodically.  The same tool run on the commutant of total rotations of
a spin-3 and two spin-1/2 particles shows a slow revival.
"""

import numpy as np

from irrepscatter import StateReductionMap, decompose, purity_timeseries, transpose
from irrepscatter.fixtures import big_spin_setup, hydrogen_setup

h, psi, gens = big_spin_setup(l=100)
rmap = StateReductionMap.from_bpt(decompose(gens).bpt)
times = np.arange(0, 2 * np.pi, 0.005)
series = purity_timeseries(h, np.outer(psi, psi.conj()), rmap, times)
print("spin-100: min purity", series.purity.min().round(4))
for t, p in list(series)[::90]:
    print(f"  t={t:6.3f}  purity={p:.4f}  " + "#" * int(40 * p))

h, psi, gens = hydrogen_setup(l=3)
rmap = StateReductionMap.from_bpt(transpose(decompose(gens).bpt))
times = np.arange(0, 80, 0.01)
series = purity_timeseries(h, np.outer(psi, psi.conj()), rmap, times)
late = times > 10
print("hydrogen-like l=3: purity returns to", series.purity[late].max().round(6),
      "at t =", times[late][np.argmax(series.purity[late])].round(2))
