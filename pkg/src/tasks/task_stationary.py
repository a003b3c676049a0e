from logging import Logger
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from src.boson_entanglement.dynamics import (build_liouvillian, commutant_dimension, domain_sectors, evolve_exact,
                                             fidelity, normalized_identities, stationary_states, trace_distance,
                                             vacuum)
from src.boson_entanglement.entanglement import negativity_mixture
from src.boson_entanglement.states import is_block_diagonal
from src.experiment import ExperimentConfig
from src.utils.constants import EXIT_OK


def task_stationary(key: str, experiment: ExperimentConfig, options, logger: Logger) -> Tuple[Dict[str, pd.DataFrame], int]:
    """
    Stationary states on the sectors reachable from the initial state, compared with the vacuum, the
    weighted identities and the initial state evolved to the end of the time grid.
    """
    logger.info(f"Starting task: {key}")
    gen = experiment.generator()
    rho0 = experiment.initial_mixture()
    bip = experiment.bipartition
    L = build_liouvillian(gen, rho0.N_max, rho0.M, sectors=domain_sectors(gen, rho0.particle_numbers))

    states = stationary_states(L)
    kernel_dimension = states[0].diagnostics.get('kernel_dimension', len(states)) if states else 0
    logger.info(f"Found {len(states)} stationary states (kernel dimension {kernel_dimension}).")

    commutant = np.nan
    if gen.conserves_number:
        commutant = commutant_dimension(gen, rho0.N_max, rho0.M)
        logger.info(f"Commutant dimension on N={rho0.N_max}: {commutant}.")

    t_end = float(experiment.times[-1])
    evolved = evolve_exact(L, rho0, t_end)
    empty = vacuum(rho0.M)
    rows = []
    for index, state in enumerate(states):
        rows.append({
            'index': index,
            'kernel_dimension': kernel_dimension,
            'sectors': ";".join(str(N) for N in state.particle_numbers),
            'fidelity_vacuum': fidelity(state, empty),
            'fidelity_identity': fidelity(state, normalized_identities(state)),
            'negativity': negativity_mixture(state, bip),
            'block_diagonal': all(is_block_diagonal(rho, bip) for _, rho in state.components),
            'trace_distance_asymptotic': trace_distance(evolved, state),
            'commutant_dimension': commutant,
        })
    return {'stationary': pd.DataFrame(rows)}, EXIT_OK
