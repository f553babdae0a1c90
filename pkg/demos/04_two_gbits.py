# States of two gbits: product, separable, entangled, and an inconsistent foil.
import numpy as np

from gptw import (BallSpace, BipartiteState, marginals, product_effect_consistency,
                  separable_hull_membership, tensor_state)
from gptw.theories import bloch_to_density

S = BallSpace(3)
up, down = np.array([1, 0, 0, 1.0]), np.array([1, 0, 0, -1.0])

mixture = 0.5 * tensor_state(up, up) + 0.5 * tensor_state(down, down)
singlet = BipartiteState(1.0, np.zeros(3), np.zeros(3), -np.eye(3)).to_vector()
foil = BipartiteState(1.0, np.zeros(3), np.zeros(3), -1.5 * np.eye(3)).to_vector()

print("singlet marginals:", *marginals(singlet, S, S))
print("singlet spectrum: ", np.round(np.linalg.eigvalsh(bloch_to_density(singlet, 2).matrix), 12))

U = [[1, 0, 0, 0]]
for name, w in (("mixture", mixture), ("singlet", singlet), ("foil", foil)):
    cons = product_effect_consistency(w, U, U, (S, S))
    sep = separable_hull_membership(w, S, S, samples=900)
    print(f"{name:8s} product effects in [{cons.min_value:+.3f}, {cons.max_value:+.3f}]  "
          f"consistent={cons.passed}  {sep.label}")
