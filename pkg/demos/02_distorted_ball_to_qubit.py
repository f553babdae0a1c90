# Start from a Bloch ball seen through an unknown linear distortion and recover the qubit.
import numpy as np

from gptw import BallSpace, Theory, TransformationGroup, reconstruct_pipeline

np.set_printoptions(precision=4, suppress=True)
rng = np.random.default_rng(7)

L0 = rng.standard_normal((4, 4))
while np.linalg.cond(L0) > 10:
    L0 = rng.standard_normal((4, 4))
print("hidden distortion, cond =", round(np.linalg.cond(L0), 3))

space = BallSpace(3, frame=L0)               # states x = L0 (u, u*w)
group = TransformationGroup.ball(3, frame=L0)  # rotations seen through the same lens
print("unit effect in these coordinates:", space.unit_effect)

res = reconstruct_pipeline(Theory("mystery", space, group), samples=2000)
for rep in res.reports:
    print(f"{rep.postulate:11s} {rep.status:5s} {rep.reason}")

L = res.frame_map
print("recovered L, cond =", round(np.linalg.cond(L), 3))
print(L @ L0)  # block diag(1, orthogonal): equal to the identity up to a rotation

pure = space.sample_pure(5, seed=1)
rho = res.density_map()
for x in pure:
    print(np.round(np.linalg.eigvalsh(rho(x)), 12))  # rank-one projectors
