from logging import Logger
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from src.boson_entanglement.analysis import example_negativity, threshold_time
from src.experiment import ExperimentConfig
from src.utils.constants import (EXIT_INVARIANT, EXIT_OK, THRESHOLD_AFTER_FACTOR, THRESHOLD_BEFORE_FACTOR,
                                 THRESHOLD_ENTANGLED_MIN, THRESHOLD_SEPARABLE_MAX)


def task_threshold(key: str, experiment: ExperimentConfig, options, logger: Logger) -> Tuple[Dict[str, pd.DataFrame], int]:
    """
    Separation times of the worked examples, cross-checked on their closed-form evolutions.

    Each case gets t*, plus the oracle negativity just before (0.9 t*) and just after (1.01 t*); a
    case that is not entangled before or not separable after sets the invariant exit code.
    """
    logger.info(f"Starting task: {key}")
    energies = experiment.threshold.energies
    rows = []
    exit_code = EXIT_OK
    for case in experiment.threshold.cases:
        t_star = threshold_time(case.example, case.p, case.rates)
        before = after = np.nan
        if t_star is not None and np.isfinite(t_star):
            before = example_negativity(case.example, case.p, case.rates, energies, THRESHOLD_BEFORE_FACTOR * t_star)
            after = example_negativity(case.example, case.p, case.rates, energies, THRESHOLD_AFTER_FACTOR * t_star)
            if before <= THRESHOLD_ENTANGLED_MIN or after >= THRESHOLD_SEPARABLE_MAX:
                logger.warning(f"{case.example} p={case.p}: threshold cross-check failed "
                               f"(before {before:.3e}, after {after:.3e}).")
                exit_code = EXIT_INVARIANT
        logger.info(f"{case.example} p={case.p} rates={list(case.rates)}: t* = {t_star}")
        rows.append({
            'example': case.example,
            'p': case.p,
            'rate': float(sum(case.rates)),
            't_star': np.nan if t_star is None else t_star,
            'negativity_before': before,
            'negativity_after': after,
        })
    return {'threshold': pd.DataFrame(rows)}, exit_code
