import numpy as np
import pytest

from radialspec import Atom, AtomicMeasure


def random_measure(rng, max_atoms=10, eps=0.25, beta_range=(1.0, 10.0),
                   p_wall=0.15, min_first=None):
    """Random half-line measure in the (eps, beta_range) class.

    With probability p_wall an atom is a hard wall (beta exactly 1).
    """
    n = int(rng.integers(0, max_atoms + 1))
    t = (min_first if min_first is not None else eps) * (1.0 + rng.random())
    atoms = []
    for _ in range(n):
        if rng.random() < p_wall:
            beta = 1.0
        else:
            beta = float(rng.uniform(*beta_range))
        atoms.append(Atom(float(t), beta))
        t += eps + float(rng.exponential(0.8))
    return AtomicMeasure(tuple(atoms), eps)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
