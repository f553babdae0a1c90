# Which ball dimensions admit a non-product reversible evolution of two gbits?
# The scan keeps generators that pass first-order tangency conditions, then
# discards irreducible pieces that bend states outside or do not close.
import time

from gptw import interaction_scan

print(" d  local  first-order  retained  interaction  seconds")
for d in (2, 3, 4, 5):
    t = time.perf_counter()
    r = interaction_scan(d)
    dt = time.perf_counter() - t
    print(f"{d:2d}  {r.local_dim:5d}  {r.first_order_dim:11d}  {r.solution_dim:8d}  "
          f"{str(r.has_interaction):11s}  {dt:6.1f}")

r3 = interaction_scan(3)
print("d = 3 retains the adjoint su(4) images:", r3.contains_quantum,
      f"(residual {r3.max_quantum_residual:.1e})")
for c in r3.components:
    print("  component dim", c.dim, "multiplicity", c.multiplicity, "->", c.reason)
print(r3.label)
