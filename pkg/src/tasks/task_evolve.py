from logging import Logger
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from src.boson_entanglement.analysis import (bound_rate, check_dephasing_preconditions, check_loss_preconditions,
                                             select_bound)
from src.boson_entanglement.dynamics import build_liouvillian, domain_sectors, evolve_trajectory
from src.boson_entanglement.entanglement import negativity_mixture
from src.boson_entanglement.states import is_block_diagonal
from src.experiment import ExperimentConfig
from src.utils.constants import BOUND_MARGIN_TOL, EXIT_INVARIANT, EXIT_OK
from src.utils.exceptions import PreconditionViolated

PRECONDITION_CHECKS = {
    'loss': check_loss_preconditions,
    'dephasing': check_dephasing_preconditions,
}


def applicable_bound(experiment: ExperimentConfig, rho0, logger: Logger) -> Optional[str]:
    """Bound whose preconditions the experiment meets, if any."""
    gen = experiment.generator()
    check = select_bound(gen)
    if check is None or len(rho0.components) != 1:
        return None
    rho = rho0.components[0][1]
    try:
        PRECONDITION_CHECKS[check](gen, rho.N, experiment.bipartition)
    except PreconditionViolated as error:
        logger.debug(f"No {check} bound column: {error}")
        return None
    if is_block_diagonal(rho, experiment.bipartition):
        return None
    return check


def bound_column(experiment: ExperimentConfig, rho0, check: str, times: np.ndarray, workers: int) -> np.ndarray:
    """e^{-t rate} times the negativity of the hamiltonian-only flow."""
    gen = experiment.generator()
    rho = rho0.components[0][1]
    hamiltonian_only = build_liouvillian(gen.hamiltonian_only(), rho.N, rho.M, sectors=[rho.N])
    states = evolve_trajectory(hamiltonian_only, rho0, times, workers=workers)
    values = np.array([negativity_mixture(state, experiment.bipartition) for state in states])
    return np.exp(-times * bound_rate(check, gen, rho.N, rho.M)) * values


def task_evolve(key: str, experiment: ExperimentConfig, options, logger: Logger) -> Tuple[Dict[str, pd.DataFrame], int]:
    """
    Evolve the initial state over the time grid and tabulate negativity, trace and positivity.

    The oracle column is filled only when options.oracle is set. A bound_rhs column is filled when the
    loss or dephasing bound applies; a violated bound sets the invariant exit code.

    Args:
        key: Task name.
        experiment: Parsed experiment.
        options: Run options (oracle, workers).
        logger: Logger instance for logging messages.

    Returns:
        ({'evolution': table}, exit code).
    """
    logger.info(f"Starting task: {key}")
    gen = experiment.generator()
    rho0 = experiment.initial_mixture()
    bip = experiment.bipartition
    times = experiment.times

    L = build_liouvillian(gen, rho0.N_max, rho0.M, sectors=domain_sectors(gen, rho0.particle_numbers))
    logger.debug(f"Liouvillian dimension {L.dimension} on sectors {L.sectors}.")
    states = evolve_trajectory(L, rho0, times, workers=options.workers)

    evolution = pd.DataFrame({
        't': times,
        'negativity_formula': [negativity_mixture(state, bip) for state in states],
        'negativity_oracle': ([negativity_mixture(state, bip, "oracle") for state in states]
                              if options.oracle else np.nan),
        'trace': [state.diagnostics.get('trace', 1.0) for state in states],
        'min_eigenvalue': [state.min_eigenvalue for state in states],
        'bound_rhs': np.nan,
    })

    exit_code = EXIT_OK
    check = applicable_bound(experiment, rho0, logger)
    if check is not None:
        evolution['bound_rhs'] = bound_column(experiment, rho0, check, times, options.workers)
        margin = float(np.min(evolution['negativity_formula'] - evolution['bound_rhs']))
        logger.info(f"{check} bound margin along the trajectory: {margin:.3e}.")
        if margin < -BOUND_MARGIN_TOL:
            logger.warning(f"The {check} bound is violated (margin {margin:.3e}).")
            exit_code = EXIT_INVARIANT

    logger.info(f"Evolved {len(times)} time points; final negativity {evolution['negativity_formula'].iloc[-1]:.6g}.")
    return {'evolution': evolution}, exit_code
