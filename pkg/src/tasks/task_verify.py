from logging import Logger
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.boson_entanglement.analysis import (check_decoherence_equality, check_dephasing_bound, check_loss_bound,
                                             check_proposition, example_negativity, is_fock_diagonal, select_bound,
                                             threshold_time)
from src.boson_entanglement.dynamics import (analytic_dephasing_example, analytic_loss_example, build_liouvillian,
                                             domain_sectors, evolve_trajectory)
from src.boson_entanglement.entanglement import negativity_mixture
from src.experiment import ExperimentConfig
from src.utils.constants import (AGREEMENT_TOL, ANALYTIC_TOL, DECOHERENCE_TOL, EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK,
                                 THRESHOLD_AFTER_FACTOR, THRESHOLD_BEFORE_FACTOR, THRESHOLD_ENTANGLED_MIN,
                                 THRESHOLD_SEPARABLE_MAX)
from src.utils.exceptions import (NegativeEigenvalueInR, PositivityViolation, PreconditionViolated,
                                  TraceNotPreserved)

BOUND_CHECKS = {
    'loss': check_loss_bound,
    'dephasing': check_dephasing_bound,
}


def _row(check: str, status: str, value: float = np.nan, detail: str = "") -> dict:
    return {'check': check, 'status': status, 'value': value, 'detail': detail}


def _status(passed: bool) -> str:
    return "passed" if passed else "failed"


def _max_block_difference(first: Dict[int, np.ndarray], second: Dict[int, np.ndarray]) -> float:
    difference = 0.0
    for N in set(first) | set(second):
        a, b = first.get(N), second.get(N)
        block = a - b if a is not None and b is not None else (a if a is not None else b)
        difference = max(difference, float(np.max(np.abs(block))))
    return difference


def _analytic_check(experiment: ExperimentConfig, states, times) -> dict:
    worked = experiment.worked_example()
    if worked is None:
        return _row("analytic_example", "not_applicable", detail="not one of the worked examples")
    example, rates, energies = worked
    p = experiment.initial_state.params["p"]
    deviation = 0.0
    for t, state in zip(times, states):
        if example == "loss":
            expected = analytic_loss_example(p, rates[0], energies, t).blocks()
        else:
            expected = {2: np.asarray(analytic_dephasing_example(p, rates, energies, t).matrix)}
        deviation = max(deviation, _max_block_difference(state.blocks(), expected))
    return _row("analytic_example", _status(deviation <= ANALYTIC_TOL), deviation,
                f"{example} example against its closed form")


def _threshold_check(experiment: ExperimentConfig) -> dict:
    worked = experiment.worked_example()
    if worked is None:
        return _row("threshold", "not_applicable", detail="not one of the worked examples")
    example, rates, energies = worked
    p = experiment.initial_state.params["p"]
    t_star = threshold_time(example, p, rates)
    if t_star is None or not np.isfinite(t_star):
        return _row("threshold", "not_applicable", detail=f"separation time is {t_star}")
    before = example_negativity(example, p, rates, energies, THRESHOLD_BEFORE_FACTOR * t_star)
    after = example_negativity(example, p, rates, energies, THRESHOLD_AFTER_FACTOR * t_star)
    passed = before > THRESHOLD_ENTANGLED_MIN and after < THRESHOLD_SEPARABLE_MAX
    return _row("threshold", _status(passed), t_star,
                f"negativity {before:.3e} before and {after:.3e} after t*")


def _decoherence_check(experiment: ExperimentConfig, gen, rho0, times) -> dict:
    if len(rho0.components) != 1 or select_bound(gen) != "dephasing":
        return _row("decoherence_equality", "not_applicable", detail="needs fixed N and pure dephasing")
    rho = rho0.components[0][1]
    if not is_fock_diagonal(gen.hamiltonian, rho.N, rho.M):
        return _row("decoherence_equality", "not_applicable", detail="the Hamiltonian is not Fock-diagonal")
    deviation = max(check_decoherence_equality(gen, rho, float(t)) for t in times)
    return _row("decoherence_equality", _status(deviation <= DECOHERENCE_TOL), deviation)


def _bound_checks(experiment: ExperimentConfig, gen, rho0, times, workers: int,
                  logger: Logger) -> Tuple[List[dict], Optional[pd.DataFrame]]:
    selected = select_bound(gen)
    rows, frames = [], []
    for check, function in BOUND_CHECKS.items():
        name = f"{check}_bound"
        if check != selected:
            rows.append(_row(name, "not_applicable", detail=f"the jumps are not {check} jumps"))
            continue
        if len(rho0.components) != 1:
            rows.append(_row(name, "not_applicable", detail="bounds are stated for fixed-N initial states"))
            continue
        try:
            trace = function(gen, rho0, times, experiment.bipartition, workers=workers)
        except PreconditionViolated as error:
            logger.warning(f"{name}: {error}")
            rows.append(_row(name, "precondition_violated", detail=str(error)))
            continue
        frames.append(trace.to_frame())
        if not trace.applicable:
            rows.append(_row(name, "not_applicable", trace.margin, "block-diagonal initial state"))
        else:
            rows.append(_row(name, _status(trace.holds), trace.margin, f"rate {trace.rate:.6g}"))
    return rows, (pd.concat(frames, ignore_index=True) if frames else None)


def _proposition_check(L, rho0, times, bip, workers: int) -> dict:
    try:
        result = check_proposition(L, rho0, times, bip, workers=workers)
    except PreconditionViolated as error:
        return _row("proposition", "not_applicable", detail=str(error))
    return _row("proposition", _status(result.holds), result.minimum,
                "minimum negativity of a block-preserving flow")


def summary_exit_code(summary: pd.DataFrame) -> int:
    if (summary['status'] == "failed").any():
        return EXIT_INVARIANT
    if (summary['status'] == "precondition_violated").any():
        return EXIT_CONFIG
    return EXIT_OK


def task_verify(key: str, experiment: ExperimentConfig, options, logger: Logger) -> Tuple[Dict[str, pd.DataFrame], int]:
    """
    Run every check that applies to the configured system and summarise it, one row per check.

    Checks: formula against oracle negativity, trace and positivity along the trajectory, the
    decoherence equality, the closed form and separation time of the worked examples, the loss and
    dephasing bounds, and positivity of the negativity along block-preserving flows.

    Returns:
        ({'summary', 'evolution', 'bounds'} tables, exit code): 2 if a check failed, else 1 if a
        precondition was violated, else 0.
    """
    logger.info(f"Starting task: {key}")
    gen = experiment.generator()
    rho0 = experiment.initial_mixture()
    bip = experiment.bipartition
    times = experiment.times
    L = build_liouvillian(gen, rho0.N_max, rho0.M, sectors=domain_sectors(gen, rho0.particle_numbers))

    rows = []
    tables = {}
    try:
        states = evolve_trajectory(L, rho0, times, workers=options.workers)
    except (PositivityViolation, TraceNotPreserved) as error:
        logger.warning(f"Evolution failed: {error}")
        states = None
        rows.append(_row("trace_positivity", "failed", detail=str(error)))

    if states is not None:
        traces = np.array([state.diagnostics.get('trace', 1.0) for state in states])
        min_eigenvalue = min(state.min_eigenvalue for state in states)
        rows.append(_row("trace_positivity", "passed", min_eigenvalue,
                         f"max trace deviation {np.max(np.abs(traces - 1)):.3e}"))
        try:
            formula = np.array([negativity_mixture(state, bip) for state in states])
            oracle = np.array([negativity_mixture(state, bip, "oracle") for state in states])
            deviation = float(np.max(np.abs(formula - oracle)))
            rows.append(_row("formula_oracle_agreement", _status(deviation <= AGREEMENT_TOL), deviation))
        except NegativeEigenvalueInR as error:
            formula = oracle = np.full(len(times), np.nan)
            rows.append(_row("formula_oracle_agreement", "failed", detail=str(error)))
        tables['evolution'] = pd.DataFrame({
            't': times, 'negativity_formula': formula, 'negativity_oracle': oracle,
            'trace': traces, 'min_eigenvalue': [state.min_eigenvalue for state in states],
        })
        rows.append(_analytic_check(experiment, states, times))

    rows.append(_decoherence_check(experiment, gen, rho0, times))
    bound_rows, bounds = _bound_checks(experiment, gen, rho0, times, options.workers, logger)
    rows.extend(bound_rows)
    if bounds is not None:
        tables['bounds'] = bounds
        if 'evolution' in tables:
            tables['evolution']['bound_rhs'] = bounds['rhs'].to_numpy()
    if 'evolution' in tables and 'bound_rhs' not in tables['evolution']:
        tables['evolution']['bound_rhs'] = np.nan
    rows.append(_proposition_check(L, rho0, times, bip, options.workers))
    rows.append(_threshold_check(experiment))

    summary = pd.DataFrame(rows, columns=['check', 'status', 'value', 'detail'])
    tables = {'summary': summary, **tables}
    for row in rows:
        logger.info(f"{row['check']:<26} {row['status']:<22} {row['detail']}")
    return tables, summary_exit_code(summary)
