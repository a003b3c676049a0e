from logging import Logger
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from src.boson_entanglement.analysis import decay_regime_scan, largen_asymptotic, largen_exact
from src.experiment import ExperimentConfig
from src.utils.constants import EXIT_OK
from src.utils.utils import map_ordered


def _cell(spec, t: float) -> dict:
    exact = largen_exact(spec, np.zeros(spec.M), t)
    row = {
        'N': spec.N,
        't': t,
        'peak_parameter': spec.peak_parameter(t),
        'negativity_exact': exact,
        'negativity_asymptotic': np.nan,
        'relative_error': np.nan,
        'gate_passed': False,
    }
    if t > 0:
        estimate = largen_asymptotic(spec, t)
        row['negativity_asymptotic'] = estimate.value
        row['gate_passed'] = estimate.gate_passed
        if exact > 0:
            row['relative_error'] = abs(estimate.value - exact) / exact
    return row


def task_large_n(key: str, experiment: ExperimentConfig, options, logger: Logger) -> Tuple[Dict[str, pd.DataFrame], int]:
    """
    Exact against asymptotic negativity of the large-N family on every (N, t) cell, plus decay fits.

    Returns:
        ({'large_n': cells, 'decay_fits': one row per N}, exit code).
    """
    logger.info(f"Starting task: {key}")
    specs = experiment.large_n.specs()
    times = experiment.times
    cells = [(spec, float(t)) for spec in specs for t in times]
    rows = map_ordered(lambda cell: _cell(*cell), cells, workers=options.workers)
    tables = {'large_n': pd.DataFrame(rows)}

    positive = times[times > 0]
    if len(positive) >= 2:
        tables['decay_fits'] = decay_regime_scan(specs, positive, workers=options.workers)
        for _, fit in tables['decay_fits'].iterrows():
            logger.info(f"N={fit['N']}: preferred {fit['preferred']} decay, "
                        f"algebraic exponent {fit['algebraic_exponent']:.4f}.")
    else:
        logger.warning("Decay fits need at least two positive grid times; skipped.")
    return tables, EXIT_OK
