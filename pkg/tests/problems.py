"""Random small assignment problems assembled from a pool of qubit POVMs."""
import numpy as np

from ncwb.assign import ProblemBuilder
from ncwb.scenarios import I2, qubit_projector


def _pool():
    z, zm = qubit_projector("z"), qubit_projector("z", -1)
    x, xm = qubit_projector("x"), qubit_projector("x", -1)
    y, ym = qubit_projector("y"), qubit_projector("y", -1)
    return [
        [z, zm], [x, xm], [y, ym],
        [I2 / 2, I2 / 2],
        [I2 / 4, I2 / 4, I2 / 2],
        [I2 / 2, z / 2, zm / 2],
        [I2 / 2, x / 2, xm / 2],
        [z / 2, zm / 2, x / 2, xm / 2],
        [z / 2, zm / 2, y / 2, ym / 2],
        [x / 2, xm / 2, y / 2, ym / 2],
        [z, zm / 2, zm / 2],
        [I2 / 3, 2 * I2 / 3],
        [I2 / 3, I2 / 3, I2 / 3],
        [I2],
    ]


POOL = _pool()


def random_problem(rng, max_effects=12, mode="deterministic"):
    """Pick POVMs at random until the effect budget is reached; add coarse-graining sums."""
    b = ProblemBuilder()
    order = rng.permutation(len(POOL))
    for i in order[: rng.integers(1, 5)]:
        trial = ProblemBuilder()
        trial.effects = list(b.effects)
        for e in POOL[i]:
            trial.effect(e)
        if len(trial.effects) > max_effects:
            continue
        b.povm(POOL[i])
    if rng.random() < 0.4:
        halves = [e for e in b.effects if np.allclose(e, I2 / 2)]
        parts = [(qubit_projector(a) / 2, qubit_projector(a, -1) / 2) for a in "zxy"]
        for p, q in parts:
            idx = [i for i, e in enumerate(b.effects) if np.allclose(e, p) or np.allclose(e, q)]
            if halves and len(idx) == 2:
                b.sum(I2 / 2, [p, q])
                break
    return b.build(mode)
