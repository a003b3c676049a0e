"""
Bound checks along trajectories, separability thresholds of the worked examples and the large-N
asymptotics of dephased diagonal-class states.
"""
import logging
from math import factorial
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.integrate import simpson
from scipy.special import gamma

from src.boson_entanglement.classes.asymptotic_spec import AsymptoticSpec
from src.boson_entanglement.classes.density_matrix import NumberMixture, SectorDensityMatrix
from src.boson_entanglement.classes.fock_state import Bipartition, Ladder, OperatorSpec
from src.boson_entanglement.classes.lindblad import LindbladGenerator, Liouvillian
from src.boson_entanglement.classes.reports import AsymptoticEstimate, BoundTrace, PropositionCheck
from src.boson_entanglement.dynamics import (analytic_dephasing_example, analytic_loss_example, build_liouvillian,
                                             domain_sectors, evolve_exact, evolve_trajectory)
from src.boson_entanglement.entanglement import negativity, negativity_mixture
from src.boson_entanglement.fock_core import is_local_operator, ladder_matrix, local_particle_numbers, occupation_matrix
from src.boson_entanglement.states import EXAMPLE_M, _check_probability, is_block_diagonal
from src.utils.constants import (ASYMPTOTIC_MAX_TS, ASYMPTOTIC_MIN_PEAK, BOUND_MARGIN_TOL, FIT_MAX_TS,
                                 HERMITICITY_TOL)
from src.utils.exceptions import BoundViolated, ConstraintViolation, PreconditionViolated, ValidityGateFailed
from src.utils.utils import map_ordered

logger = logging.getLogger(__name__)

StateLike = Union[SectorDensityMatrix, NumberMixture]
EXAMPLES = ("loss", "dephasing")


# --------------------------------------------------------------------------------------------------
# Preconditions
# --------------------------------------------------------------------------------------------------

def _single_sector(rho0: StateLike) -> SectorDensityMatrix:
    if isinstance(rho0, SectorDensityMatrix):
        return rho0
    if len(rho0.components) != 1:
        raise PreconditionViolated(
            f"Bounds are stated for fixed-N initial states; got sectors {rho0.particle_numbers}.")
    return rho0.components[0][1]


def _active_jumps(gen: LindbladGenerator):
    return [(rate, operator) for rate, operator in gen.jumps if rate > 0]


def is_number_operator(operator: OperatorSpec) -> bool:
    """True iff the operator is exactly a_j^dag a_j for some mode j."""
    terms = operator.simplified().terms
    if len(terms) != 1 or len(terms[0][1]) != 2:
        return False
    mode = terms[0][1][0][0]
    return terms == OperatorSpec.number(mode).terms


def couples_blocks(hamiltonian: OperatorSpec, N: int, bip: Bipartition) -> bool:
    """True iff H has matrix elements between different local particle numbers on the N-sector."""
    matrix = ladder_matrix(hamiltonian, N, bip.M)
    k = local_particle_numbers(N, bip)
    return bool(np.any(np.abs(matrix[k[:, None] != k[None, :]]) > HERMITICITY_TOL))


def is_fock_diagonal(hamiltonian: OperatorSpec, N: int, M: int) -> bool:
    matrix = ladder_matrix(hamiltonian, N, M)
    return not np.any(np.abs(matrix - np.diag(np.diag(matrix))) > HERMITICITY_TOL)


def _check_hamiltonian_blocks(gen: LindbladGenerator, N: int, bip: Bipartition):
    if couples_blocks(gen.hamiltonian, N, bip):
        raise PreconditionViolated(
            "The Hamiltonian couples different local particle numbers, so its eigenvectors are not "
            "block-diagonal across the bipartition.")


def check_loss_preconditions(gen: LindbladGenerator, N: int, bip: Bipartition):
    """
    Raises:
        PreconditionViolated: A jump is not a product of A-side and B-side annihilators, or H mixes blocks.
    """
    for index, (rate, operator) in enumerate(_active_jumps(gen)):
        if operator.ladders() - {Ladder.ANNIHILATE}:
            raise PreconditionViolated(f"Jump {index} contains creation operators; the loss bound needs losses.")
        if not is_local_operator(operator, bip):
            raise PreconditionViolated(
                f"Jump {index} straddles the bipartition: it is not a product of an A-side and a B-side operator.")
    _check_hamiltonian_blocks(gen, N, bip)


def check_dephasing_preconditions(gen: LindbladGenerator, N: int, bip: Bipartition):
    """
    Raises:
        PreconditionViolated: A jump is not a number operator, or H mixes blocks.
    """
    for index, (rate, operator) in enumerate(_active_jumps(gen)):
        if not is_number_operator(operator):
            raise PreconditionViolated(f"Jump {index} is not a number operator a_j^dag a_j.")
    _check_hamiltonian_blocks(gen, N, bip)


# --------------------------------------------------------------------------------------------------
# Bounds
# --------------------------------------------------------------------------------------------------

def loss_rate(gen: LindbladGenerator, N: int, M: int) -> float:
    """eta: largest eigenvalue of sum_j lambda_j A_j^dag A_j on the N-sector."""
    total = 0
    for rate, operator in _active_jumps(gen):
        jump = ladder_matrix(operator, N, M)
        if jump.shape[0]:
            total = total + rate * (jump.conj().T @ jump)
    if isinstance(total, int):
        return 0.0
    return float(np.linalg.eigvalsh((total + total.conj().T) / 2)[-1])


def dephasing_rate(gen: LindbladGenerator, N: int) -> float:
    return N ** 2 * sum(rate for rate, _ in gen.jumps) / 2


def _negativity_trajectory(L: Liouvillian, rho0: NumberMixture, times: Sequence[float], bip: Bipartition,
                           method: str = "formula", workers: int = 1) -> np.ndarray:
    states = evolve_trajectory(L, rho0, times, workers=workers)
    return np.array([negativity_mixture(state, bip, method) for state in states])


def _bound_trace(check: str, gen: LindbladGenerator, rho: SectorDensityMatrix, times: Sequence[float],
                 bip: Bipartition, rate: float, strict: bool, workers: int) -> BoundTrace:
    times = np.asarray(times, dtype=float)
    initial = NumberMixture.from_state(rho)
    full = build_liouvillian(gen, rho.N, rho.M, sectors=domain_sectors(gen, [rho.N]))
    hamiltonian_only = build_liouvillian(gen.hamiltonian_only(), rho.N, rho.M, sectors=[rho.N])
    lhs = _negativity_trajectory(full, initial, times, bip, workers=workers)
    rhs = np.exp(-times * rate) * _negativity_trajectory(hamiltonian_only, initial, times, bip, workers=workers)
    applicable = not is_block_diagonal(rho, bip)
    trace = BoundTrace(check=check, times=times, lhs=lhs, rhs=rhs, rate=rate, applicable=applicable)
    if not applicable:
        logger.debug(f"{check} bound: block-diagonal initial state, trace recorded but not asserted.")
    elif not trace.holds:
        message = f"{check} bound violated: margin {trace.margin:.3e} below -{BOUND_MARGIN_TOL:.0e}."
        if strict:
            raise BoundViolated(message)
        logger.warning(message)
    return trace


def check_loss_bound(gen: LindbladGenerator, rho0: StateLike, times: Sequence[float], bip: Bipartition,
                     strict: bool = False, workers: int = 1) -> BoundTrace:
    """
    Negativity under losses against e^{-t eta} times the negativity of the hamiltonian-only flow.

    Args:
        gen: Generator whose jumps are products of annihilators local to each side.
        rho0: Fixed-N initial state.
        times: Time grid.
        bip: Bipartition.
        strict: Raise BoundViolated instead of logging a warning.
        workers: Ordered worker pool size for the time grid.

    Raises:
        PreconditionViolated: See check_loss_preconditions.
    """
    rho = _single_sector(rho0)
    check_loss_preconditions(gen, rho.N, bip)
    eta = loss_rate(gen, rho.N, rho.M)
    logger.debug(f"Loss bound on N={rho.N}: eta={eta:.6g}.")
    return _bound_trace("loss", gen, rho, times, bip, eta, strict, workers)


def check_dephasing_bound(gen: LindbladGenerator, rho0: StateLike, times: Sequence[float], bip: Bipartition,
                          strict: bool = False, workers: int = 1) -> BoundTrace:
    """Negativity under dephasing against e^{-t N^2 sum_j lambda_j / 2} times the hamiltonian-only negativity."""
    rho = _single_sector(rho0)
    check_dephasing_preconditions(gen, rho.N, bip)
    return _bound_trace("dephasing", gen, rho, times, bip, dephasing_rate(gen, rho.N), strict, workers)


def check_decoherence_equality(gen: LindbladGenerator, rho0: StateLike, t: float) -> float:
    """
    Maximum deviation of |<k|rho_t|k'>| from e^{-t sum_j lambda_j (k_j - k'_j)^2 / 2} |<k|rho_0|k'>|,
    relative to the largest |<k|rho_0|k'>|.

    Holds exactly for dephasing with a Fock-diagonal Hamiltonian; a hopping Hamiltonian breaks it.

    Raises:
        PreconditionViolated: A jump is not a number operator.
    """
    rho = _single_sector(rho0)
    rates = np.zeros(rho.M)
    for index, (rate, operator) in enumerate(gen.jumps):
        if rate == 0:
            continue
        if not is_number_operator(operator):
            raise PreconditionViolated(f"Jump {index} is not a number operator a_j^dag a_j.")
        mode = operator.terms[0][1][0][0]
        rates[mode - 1] += rate
    L = build_liouvillian(gen, rho.N, rho.M, sectors=[rho.N])
    evolved = evolve_exact(L, NumberMixture.from_state(rho), t).blocks()[rho.N]
    occupations = occupation_matrix(rho.N, rho.M).astype(float)
    differences = occupations[:, None, :] - occupations[None, :, :]
    damping = np.exp(-t * (differences ** 2 @ rates) / 2)
    expected = damping * np.abs(rho.matrix)
    scale = float(np.max(np.abs(rho.matrix)))
    return float(np.max(np.abs(np.abs(evolved) - expected))) / scale


# --------------------------------------------------------------------------------------------------
# Worked-example thresholds
# --------------------------------------------------------------------------------------------------

def threshold_time(example: str, p: float, rates: Sequence[float]) -> Optional[float]:
    """
    Time after which the worked example becomes separable.

    Args:
        example: 'loss' (rate lambda_0) or 'dephasing' (rate sum_j lambda_j).
        p: Mixing probability.
        rates: Jump rates.

    Returns:
        None when the state is separable at t = 0 (p <= 1/2); inf when it never disentangles.
    """
    if example not in EXAMPLES:
        raise ConstraintViolation(f"Unknown worked example '{example}'; expected one of {EXAMPLES}.")
    _check_probability(p)
    if any(rate < 0 for rate in rates):
        raise ConstraintViolation("Rates must be non-negative.")
    if p <= 0.5:
        return None
    rate = float(sum(rates))
    if p == 1 or rate == 0:
        return float('inf')
    return 2.0 / rate * np.log(p / (1 - p))


def example_negativity(example: str, p: float, rates: Sequence[float], energies: Sequence[float], t: float,
                       method: str = "oracle") -> float:
    """Negativity of the closed-form evolved worked example across the modes {1, 2} | {3, 4}."""
    bip = Bipartition(2, EXAMPLE_M)
    if example == "loss":
        return negativity_mixture(analytic_loss_example(p, rates[0], energies, t), bip, method)
    if example == "dephasing":
        return negativity(analytic_dephasing_example(p, rates, energies, t), bip, method)
    raise ConstraintViolation(f"Unknown worked example '{example}'; expected one of {EXAMPLES}.")


# --------------------------------------------------------------------------------------------------
# Large N
# --------------------------------------------------------------------------------------------------

def largen_exact(spec: AsymptoticSpec, energies: Sequence[float], t: float) -> float:
    """
    (sum |coefficient_t| - 1) / 2 for a dephased diagonal-class state, every coefficient damped by
    e^{-t sum_j lambda_j (k_j - l_j)^2 / 2}. The phases from the energies drop out of the moduli.
    """
    if len(energies) != spec.M:
        raise ConstraintViolation(f"Expected {spec.M} mode energies, got {len(energies)}.")
    if not np.isfinite(t) or t < 0:
        raise ConstraintViolation(f"Time must be finite and non-negative, got {t}.")
    total = float(np.sum(np.abs(spec.table.values) * np.exp(-t * spec.damping_rates)))
    return max(0.5 * (total - 1.0), 0.0)


def _stencil(order: int, half_width: int) -> np.ndarray:
    """Central finite-difference weights for the order-th derivative on offsets -q..q (unit spacing)."""
    offsets = np.arange(-half_width, half_width + 1, dtype=float)
    vandermonde = np.vander(offsets, increasing=True).T
    rhs = np.zeros(len(offsets))
    rhs[order] = factorial(order)
    return np.linalg.solve(vandermonde, rhs)


def derivative_integral(spec: AsymptoticSpec, n: int) -> float:
    """
    sum_{sigma, sigma'} int dx |d^{2n}/dy^{2n} R(x + y/2, x - y/2)|_{y=0} with R = N rho.

    At fixed x = (k + l) / (2N) a step in y moves (k, l) to (k + 1, l - 1), a spacing of 2/N. The
    derivative is evaluated at y = 0 before the modulus is taken.
    """
    N = spec.N
    half_width = n + 1
    weights = _stencil(2 * n, half_width)
    sums = np.arange(2 * half_width, 2 * N - 2 * half_width + 1, 2)
    if len(sums) < 3:
        raise ConstraintViolation(f"N={N} is too small for a {2 * n}-th derivative stencil.")
    x = sums / (2 * N)
    step = 2.0 / N
    total = 0.0
    for grid in spec.table.dense(N).values():
        R = N * grid
        centre = sums // 2
        derivative = sum(w * R[centre + i, centre - i] for w, i in zip(weights, range(-half_width, half_width + 1)))
        total += simpson(np.abs(derivative) / step ** (2 * n), x=x)
    return float(total)


def largen_asymptotic(spec: AsymptoticSpec, t: float, strict: bool = False) -> AsymptoticEstimate:
    """
    Truncated series -1/2 + 2^{1/(2a)} Gamma(1 + 1/(2a)) / (tS)^{1/(2a)} + corrections of order N^{-2n}.

    Valid when t S N^{2 alpha} >= 10 and t S <= 1; outside that window the estimate is flagged, or
    ValidityGateFailed is raised when strict.
    """
    if not t > 0:
        raise ConstraintViolation(f"The asymptotic series needs t > 0, got {t}.")
    alpha = spec.alpha
    ts = t * spec.S
    peak = spec.peak_parameter(t)
    leading = 2 ** (1 / (2 * alpha)) * gamma(1 + 1 / (2 * alpha)) / ts ** (1 / (2 * alpha))
    corrections = []
    for n in range(1, spec.n_terms + 1):
        if spec.N < 2 * n + 4:
            logger.debug(f"N={spec.N} is too small for the order-{2 * n} stencil; series truncated at n={n - 1}.")
            break
        power = (2 * n + 1) / (2 * alpha)
        prefactor = 2 ** power * gamma(1 + power) / (factorial(2 * n + 1) * spec.N ** (2 * n) * ts ** power)
        corrections.append(float(prefactor * derivative_integral(spec, n)))
    gate_passed = peak >= ASYMPTOTIC_MIN_PEAK and ts <= ASYMPTOTIC_MAX_TS
    estimate = AsymptoticEstimate(value=float(-0.5 + leading + sum(corrections)), leading=float(leading),
                                  corrections=tuple(corrections), peak_parameter=peak, ts=ts,
                                  gate_passed=gate_passed)
    logger.debug(f"N={spec.N}: leading term / N = {leading / spec.N:.3e} at tS={ts:.3g}.")
    if not gate_passed:
        message = (f"Asymptotic gate failed for N={spec.N}, t={t}: tSN^(2a)={peak:.3g} "
                   f"(need >= {ASYMPTOTIC_MIN_PEAK}), tS={ts:.3g} (need <= {ASYMPTOTIC_MAX_TS}).")
        if strict:
            raise ValidityGateFailed(message, estimate)
        logger.warning(message)
    return estimate


def _rms_log_residual(predicted: np.ndarray, observed: np.ndarray) -> float:
    predicted = np.clip(predicted, np.finfo(float).tiny, None)
    return float(np.sqrt(np.mean((np.log(predicted) - np.log(observed)) ** 2)))


def _decay_fit(spec: AsymptoticSpec, times: np.ndarray) -> dict:
    energies = np.zeros(spec.M)
    values = np.array([largen_exact(spec, energies, t) for t in times])
    ts = times * spec.S
    window = (spec.peak_parameter(1.0) * times >= ASYMPTOTIC_MIN_PEAK) & (ts <= FIT_MAX_TS)
    window_applied = int(window.sum()) >= 3
    if not window_applied:
        logger.warning(f"N={spec.N}: fewer than 3 grid points in the validity window; fitting the full grid.")
        window = np.ones(len(times), dtype=bool)
    mask = window & (values > 0)
    row = {
        'N': spec.N, 'alpha': spec.alpha, 'n_points': int(mask.sum()), 'window_applied': window_applied,
        'algebraic_exponent': np.nan, 'algebraic_residual': np.nan,
        'exponential_rate': np.nan, 'exponential_residual': np.nan, 'preferred': None,
        'monotone': bool(np.all(np.diff(values) <= 1e-12)),
    }
    if mask.sum() < 2:
        return row
    t_fit, observed = times[mask], values[mask]
    slope, intercept = np.polyfit(np.log(t_fit), np.log(observed + 0.5), 1)
    algebraic = np.exp(intercept) * t_fit ** slope - 0.5
    decay, offset = np.polyfit(t_fit, np.log(observed), 1)
    exponential = np.exp(offset + decay * t_fit)
    row.update({
        'algebraic_exponent': float(slope), 'algebraic_residual': _rms_log_residual(algebraic, observed),
        'exponential_rate': float(-decay), 'exponential_residual': _rms_log_residual(exponential, observed),
    })
    row['preferred'] = "algebraic" if row['algebraic_residual'] < row['exponential_residual'] else "exponential"
    logger.debug(f"N={spec.N}: window {t_fit[0]:.3g}..{t_fit[-1]:.3g}, preferred {row['preferred']}.")
    return row


def decay_regime_scan(specs: Sequence[AsymptoticSpec], times: Sequence[float], workers: int = 1) -> pd.DataFrame:
    """
    Fit algebraic (N + 1/2 ~ t^a) and exponential (N ~ e^{-gamma t}) decay models to exact trajectories.

    Returns:
        One row per spec with the fitted parameters, residuals, the preferred model and monotonicity.
    """
    times = np.sort(np.asarray(times, dtype=float))
    if len(times) < 2 or times[0] <= 0:
        raise ConstraintViolation("The decay scan needs at least two strictly positive times.")
    rows = map_ordered(lambda spec: _decay_fit(spec, times), specs, workers=workers)
    return pd.DataFrame(rows)


# --------------------------------------------------------------------------------------------------
# Block-preserving flows
# --------------------------------------------------------------------------------------------------

def first_separable_time(L: Liouvillian, rho0: NumberMixture, times: Sequence[float], bip: Bipartition,
                         tol: float = 1e-10) -> Optional[float]:
    """First sampled time at which the negativity is at most tol, or None."""
    times = np.asarray(times, dtype=float)
    values = _negativity_trajectory(L, rho0, times, bip)
    below = np.nonzero(values <= tol)[0]
    return float(times[below[0]]) if len(below) else None


def _non_block_diagonal(rho0: NumberMixture, bip: Bipartition) -> bool:
    return any(not is_block_diagonal(rho, bip) for _, rho in rho0.components)


def check_proposition(L: Liouvillian, rho0: NumberMixture, times: Sequence[float], bip: Bipartition,
                      workers: int = 1) -> PropositionCheck:
    """
    Negativity along a flow that cannot superimpose different blocks, started from a state that is not
    block-diagonal; the check holds when it stays positive at every sampled time.

    Raises:
        PreconditionViolated: The flow mixes blocks or the initial state is block-diagonal.
    """
    if not L.preserves_blocks(bip):
        raise PreconditionViolated("The Liouvillian superimposes different blocks of the bipartition.")
    if not _non_block_diagonal(rho0, bip):
        raise PreconditionViolated("The initial state is block-diagonal.")
    times = np.asarray(times, dtype=float)
    return PropositionCheck(times=times, negativities=_negativity_trajectory(L, rho0, times, bip, workers=workers))


def proposition_inputs(gen: LindbladGenerator, rho0: NumberMixture) -> Liouvillian:
    """Liouvillian on the sectors the initial state can reach."""
    return build_liouvillian(gen, rho0.N_max, rho0.M, sectors=domain_sectors(gen, rho0.particle_numbers))


def select_bound(gen: LindbladGenerator) -> Optional[str]:
    """'dephasing' when every active jump is a number operator, 'loss' when every one is a pure annihilator."""
    jumps = [operator for _, operator in _active_jumps(gen)]
    if not jumps:
        return None
    if all(is_number_operator(operator) for operator in jumps):
        return "dephasing"
    if all(operator.ladders() == {Ladder.ANNIHILATE} for operator in jumps):
        return "loss"
    return None


def bound_rate(check: str, gen: LindbladGenerator, N: int, M: int) -> float:
    return loss_rate(gen, N, M) if check == "loss" else dephasing_rate(gen, N)
