# Why a classical bit and the square gbit are ruled out.
import numpy as np

from gptw import builtin, check_continuous_reversibility, check_nse_geometric, replay

np.set_printoptions(precision=3, suppress=True)

bit = builtin("classical(2)")
print(bit.space.extreme_points().points)   # the two deterministic states
print(len(bit.group.elements), "reversible maps")  # identity and swap

r = check_continuous_reversibility(bit)
print("bit, continuity:", r.status, "|", r.reason, r.witness)

# The square: four pure states, and the D4 symmetry group.
sq = builtin("square_gbit")
print(sq.space.extreme_points().points)
for E, on in sq.space.facets():
    print("facet effect", E, "touches vertices", on)

r = check_nse_geometric(sq.space)
print("square, NSE:", r.status)
for key, val in r.witness.items():
    print(f"  {key:12s}", val)

# E reads 1 on omega1 and omega2, 0 on omega_prime; E_prime still tells omega1 from omega2.
w = r.witness
print("E on the three states:", [float(w["E"] @ w[s]) for s in ("omega1", "omega2", "omega_prime")])
print("E' on omega1, omega2: ", float(w["E_prime"] @ w["omega1"]), float(w["E_prime"] @ w["omega2"]))
print("witness replays:", replay(r, sq))
