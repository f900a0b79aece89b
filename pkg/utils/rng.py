"""
Counter-based random streams for Monte Carlo replications.

Replication ``i`` under master seed ``s`` always draws from the same Philox
stream, derived from ``SeedSequence(s, spawn_key=(i,))``. Results therefore
do not depend on how replications are split across workers or in which
order they run.
"""
import numpy as np

from exceptions import InvalidArgumentError


def replication_stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent generator for replication ``index`` of a run seeded with ``master_seed``."""
    if master_seed < 0 or index < 0:
        raise InvalidArgumentError("seed and replication index must be non-negative")
    sequence = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(sequence))
