"""
Coarse position and momentum on a lattice
=========================================

Measure position, then momentum, then position again with cell widths
w_x and w_p.  The state-averaged probability that both position outcomes
agree interpolates between quantum behaviour (w_x w_p small) and
classical behaviour (w_x w_p large), and sits near 0.656 along the curve
w_x w_p = d.
"""

from irrepscatter import LatticeConfig, on_curve_value, p_agree_bounds, p_agree_closed, regime_scan
from irrepscatter.lattice import diagonal_grid

d = 4096
print("on the curve w_x w_p = d, d =", d)
for w in (1, 2, 3, 4, 15, 16, 32, 64):
    print(f"  w_p={w:3d}  {on_curve_value(d, w):.4f}")

d = 1024
print("\ndiagonal w_x = w_p = w, d =", d)
for row in regime_scan(d, diagonal_grid(d)):
    b = p_agree_bounds(d, row.w_x)
    bound = f"<= {b.upper:.4f}" if b.upper is not None else (f">= {b.lower:.4f}" if b.lower is not None else "")
    print(f"  w={row.w_x:5d}  {row.closed:.6f}  {bound}")

print("\nclosed form, d=1024, w_x=w_p=32:", p_agree_closed(LatticeConfig(1024, 32, 32)))
