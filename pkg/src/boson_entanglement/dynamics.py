"""
Lindblad dynamics on the direct sum of fixed-N sectors.

Density-matrix blocks are vectorised row-major, so vec(A rho B) = (A kron B^T) vec(rho). The
generator -i[H, rho] + sum_j lambda_j (A_j rho A_j^dag - 1/2 {A_j^dag A_j, rho}) becomes a dense
superoperator whose feed terms A_j rho A_j^dag map sector N to sector N + d_j (d_j <= 0).
"""
import logging
from math import ceil
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from src.boson_entanglement.classes.density_matrix import NumberMixture, SectorDensityMatrix
from src.boson_entanglement.classes.fock_state import OperatorSpec
from src.boson_entanglement.classes.lindblad import LindbladGenerator, Liouvillian
from src.boson_entanglement.fock_core import ladder_matrix, sector_dimension, sector_index
from src.boson_entanglement.states import EXAMPLE_M, EXAMPLE_N, _check_probability, example_vectors
from src.utils.constants import (EIG_CONDITION_LIMIT, EVOLUTION_POSITIVITY_TOL, HERMITICITY_TOL, NULL_SPACE_RCOND,
                                 RK4_DEFAULT_STEPS, TRACE_PRESERVATION_TOL)
from src.utils.exceptions import ConstraintViolation, ModeOutOfRange, TraceNotPreserved
from src.utils.utils import map_ordered

logger = logging.getLogger(__name__)


# --------------------------------------------------------------------------------------------------
# Named generators
# --------------------------------------------------------------------------------------------------

def diagonal_hamiltonian(energies: Sequence[float]) -> OperatorSpec:
    """H = sum_j eps_j a_j^dag a_j."""
    hamiltonian = OperatorSpec.zero()
    for j, energy in enumerate(energies, start=1):
        hamiltonian = hamiltonian + energy * OperatorSpec.number(j)
    return hamiltonian


def hopping_hamiltonian(amplitudes: Sequence[float], energies: Optional[Sequence[float]] = None) -> OperatorSpec:
    """H = -sum_j tau_j (a_j^dag a_{j+1} + a_{j+1}^dag a_j) on an open chain, plus optional on-site energies."""
    hamiltonian = diagonal_hamiltonian(energies) if energies is not None else OperatorSpec.zero()
    for j, amplitude in enumerate(amplitudes, start=1):
        hop = OperatorSpec.create(j) * OperatorSpec.annihilate(j + 1)
        hamiltonian = hamiltonian + (-amplitude) * (hop + hop.dagger())
    return hamiltonian


def dephasing_jumps(rates: Sequence[float]) -> Tuple[Tuple[float, OperatorSpec], ...]:
    """A_j = a_j^dag a_j with rate lambda_j."""
    return tuple((float(rate), OperatorSpec.number(j)) for j, rate in enumerate(rates, start=1))


def loss_jumps(rates: Sequence[float]) -> Tuple[Tuple[float, OperatorSpec], ...]:
    """A_j = a_j with rate lambda_j."""
    return tuple((float(rate), OperatorSpec.annihilate(j)) for j, rate in enumerate(rates, start=1))


# --------------------------------------------------------------------------------------------------
# Superoperator
# --------------------------------------------------------------------------------------------------

def build_liouvillian(gen: LindbladGenerator, N_max: int, M: int,
                      sectors: Optional[Iterable[int]] = None) -> Liouvillian:
    """
    Dense Liouvillian on sectors 0..N_max (or an explicit sector list).

    Args:
        gen: Lindblad generator.
        N_max: Largest particle number; ignored when sectors is given.
        M: Mode count.
        sectors: Explicit sector list; every feed term must land inside it.

    Returns:
        Liouvillian with blocks (N_out, N_in).
    """
    if sectors is None:
        if N_max < 0:
            raise ConstraintViolation(f"N_max must be non-negative, got {N_max}.")
        sectors = tuple(range(N_max + 1))
    sectors = tuple(sorted(set(int(N) for N in sectors)))
    if not sectors or sectors[0] < 0:
        raise ConstraintViolation(f"Sectors must be non-negative particle numbers, got {sectors}.")
    if gen.max_mode > M:
        raise ModeOutOfRange(f"Generator acts on mode {gen.max_mode} but the system has {M} modes.")

    blocks: Dict[Tuple[int, int], np.ndarray] = {}
    for N in sectors:
        dim = sector_dimension(N, M)
        identity = np.eye(dim)
        hamiltonian = ladder_matrix(gen.hamiltonian, N, M)
        asymmetry = np.max(np.abs(hamiltonian - hamiltonian.conj().T), initial=0.0)
        if asymmetry > HERMITICITY_TOL * max(1.0, float(np.max(np.abs(hamiltonian), initial=0.0))):
            raise ConstraintViolation(f"Hamiltonian is not Hermitian on sector N={N}.")
        block = -1j * (np.kron(hamiltonian, identity) - np.kron(identity, hamiltonian.T))
        for rate, operator in gen.jumps:
            if rate == 0:
                continue
            jump = ladder_matrix(operator, N, M)
            if jump.shape[0] == 0:
                continue
            anticommutator = jump.conj().T @ jump
            block = block - rate / 2 * (np.kron(anticommutator, identity) + np.kron(identity, anticommutator.T))
            feed = rate * np.kron(jump, jump.conj())
            target = N + operator.net_change
            if target == N:
                block = block + feed
            elif target in sectors:
                blocks[(target, N)] = blocks.get((target, N), 0) + feed
            elif np.any(jump):
                raise ConstraintViolation(
                    f"Jump operator feeds sector N={target}, outside the sector list {sectors}.")
        blocks[(N, N)] = block

    diagnostics = {"characteristic_time": gen.characteristic_time(M)}
    logger.debug(f"Built Liouvillian on sectors {sectors} (M={M}); characteristic time "
                 f"{diagnostics['characteristic_time']:.4g}.")
    return Liouvillian(M=M, sectors=sectors, blocks=blocks, diagnostics=diagnostics)


def domain_sectors(gen: LindbladGenerator, particle_numbers: Iterable[int]) -> Tuple[int, ...]:
    """Smallest sector list closed under the generator's feed terms."""
    particle_numbers = sorted(set(particle_numbers))
    if gen.conserves_number:
        return tuple(particle_numbers)
    return tuple(range(max(particle_numbers) + 1))


# --------------------------------------------------------------------------------------------------
# Evolution
# --------------------------------------------------------------------------------------------------

def _mixture_from_vector(L: Liouvillian, vector: np.ndarray, diagnostics: dict) -> NumberMixture:
    blocks = L.devectorize(vector)
    trace = float(sum(np.trace(block).real for block in blocks.values()))
    if abs(trace - 1.0) > TRACE_PRESERVATION_TOL:
        raise TraceNotPreserved(f"Evolved trace is {trace!r}; the generator is not trace preserving.")
    diagnostics = dict(diagnostics, trace=trace)
    return NumberMixture.from_blocks(blocks, L.M, positivity_tol=EVOLUTION_POSITIVITY_TOL, diagnostics=diagnostics)


def _check_time(t: float):
    if not np.isfinite(t) or t < 0:
        raise ConstraintViolation(f"Time must be finite and non-negative, got {t}.")


def propagate_vector(L: Liouvillian, vector: np.ndarray, t: float) -> Tuple[np.ndarray, str]:
    """e^{tL} vector by eigendecomposition when the eigenvectors are well conditioned, else expm."""
    if t == 0:
        return vector.copy(), "identity"
    eigenvalues, vectors, inverse, condition = L.spectral
    if inverse is not None and condition <= EIG_CONDITION_LIMIT:
        return vectors @ (np.exp(t * eigenvalues) * (inverse @ vector)), "eig"
    logger.debug(f"Eigenvector condition {condition:.3e} above {EIG_CONDITION_LIMIT:.0e}; using expm.")
    return scipy.linalg.expm(t * L.matrix) @ vector, "expm"


def evolve_exact(L: Liouvillian, rho0: NumberMixture, t: float) -> NumberMixture:
    """
    rho_t = e^{tL}[rho_0].

    Raises:
        PositivityViolation: An evolved component has an eigenvalue below -1e-8.
        TraceNotPreserved: The total trace drifts by more than 1e-9.
    """
    _check_time(t)
    vector, method = propagate_vector(L, L.vectorize(rho0), t)
    return _mixture_from_vector(L, vector, {
        "method": method, "t": t, "condition_number": L.spectral[3] if method == "eig" else None,
    })


def evolve_rk4(L: Liouvillian, rho0: NumberMixture, t: float, dt: Optional[float] = None) -> NumberMixture:
    """Classical fourth-order Runge-Kutta with ceil(t / dt) equal steps; dt defaults to t / 1000."""
    _check_time(t)
    if dt is None:
        dt = t / RK4_DEFAULT_STEPS if t > 0 else 1.0
    if not dt > 0:
        raise ConstraintViolation(f"dt must be positive, got {dt}.")
    vector = L.vectorize(rho0)
    steps = int(ceil(t / dt - 1e-12)) if t > 0 else 0
    if steps:
        h = t / steps
        matrix = L.matrix
        for _ in range(steps):
            k1 = matrix @ vector
            k2 = matrix @ (vector + h / 2 * k1)
            k3 = matrix @ (vector + h / 2 * k2)
            k4 = matrix @ (vector + h * k3)
            vector = vector + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return _mixture_from_vector(L, vector, {"method": "rk4", "t": t, "steps": steps})


def evolve_trotter(L_a: Liouvillian, L_b: Liouvillian, rho0: NumberMixture, t: float, n: int) -> NumberMixture:
    """(e^{t L_a / n} e^{t L_b / n})^n applied to rho_0; L_b acts first in every step."""
    _check_time(t)
    if int(n) != n or n < 1:
        raise ConstraintViolation(f"Trotter step count must be a positive integer, got {n}.")
    if L_a.M != L_b.M or L_a.sectors != L_b.sectors:
        raise ConstraintViolation("Trotter factors must share the mode count and sector list.")
    step_a = scipy.linalg.expm(t / n * L_a.matrix)
    step_b = scipy.linalg.expm(t / n * L_b.matrix)
    vector = L_a.vectorize(rho0)
    for _ in range(int(n)):
        vector = step_a @ (step_b @ vector)
    return _mixture_from_vector(L_a, vector, {"method": "trotter", "t": t, "steps": int(n)})


def evolve_trajectory(L: Liouvillian, rho0: NumberMixture, times: Sequence[float],
                      workers: int = 1) -> List[NumberMixture]:
    """evolve_exact at every grid time, in grid order."""
    return map_ordered(lambda t: evolve_exact(L, rho0, float(t)), times, workers=workers)


# --------------------------------------------------------------------------------------------------
# Stationary states and distances
# --------------------------------------------------------------------------------------------------

def _jordan_parts(blocks: Dict[int, np.ndarray]) -> Tuple[Dict[int, np.ndarray], Dict[int, np.ndarray]]:
    scale = max(float(np.max(np.abs(b), initial=0.0)) for b in blocks.values())
    positive, negative = {}, {}
    for N, block in blocks.items():
        eigenvalues, vectors = np.linalg.eigh((block + block.conj().T) / 2)
        eigenvalues = np.where(np.abs(eigenvalues) > 1e-10 * scale, eigenvalues, 0.0)
        positive[N] = (vectors * np.clip(eigenvalues, 0, None)) @ vectors.conj().T
        negative[N] = (vectors * np.clip(-eigenvalues, 0, None)) @ vectors.conj().T
    return positive, negative


def stationary_states(L: Liouvillian) -> List[NumberMixture]:
    """
    Density matrices spanning ker(L).

    The null space is made Hermitian, every element is split into its positive and negative parts
    (both stationary for a trace-preserving positive semigroup) and a linearly independent subset of
    the normalised parts is returned.
    """
    kernel = scipy.linalg.null_space(L.matrix, rcond=NULL_SPACE_RCOND)
    dimension = kernel.shape[1]
    logger.debug(f"Liouvillian kernel dimension {dimension}.")
    if dimension == 0:
        raise TraceNotPreserved("The Liouvillian has a trivial kernel; it cannot be trace preserving.")

    candidates = []
    for column in kernel.T:
        blocks = L.devectorize(column)
        for hermitian in ({N: (b + b.conj().T) / 2 for N, b in blocks.items()},
                          {N: (b - b.conj().T) / 2j for N, b in blocks.items()}):
            if max(np.max(np.abs(b), initial=0.0) for b in hermitian.values()) < 1e-12:
                continue
            candidates.extend(_jordan_parts(hermitian))

    selected: List[np.ndarray] = []
    states: List[NumberMixture] = []
    for part in candidates:
        trace = sum(np.trace(b).real for b in part.values())
        if trace < 1e-10:
            continue
        normalized = {N: b / trace for N, b in part.items()}
        vector = np.concatenate([normalized[N].ravel() for N in L.sectors])
        if np.linalg.matrix_rank(np.array(selected + [vector]), tol=1e-8) == len(selected) + 1:
            selected.append(vector)
            states.append(NumberMixture.from_blocks(normalized, L.M, diagnostics={"kernel_dimension": dimension}))
        if len(states) == dimension:
            break
    return states


def commutant_dimension(gen: LindbladGenerator, N: int, M: int) -> int:
    """
    Dimension of the operators on the N-sector commuting with H and with every A_j, A_j^dag of nonzero rate.

    1 certifies a unique stationary state whenever a full-rank stationary state exists.
    """
    dim = sector_dimension(N, M)
    identity = np.eye(dim)
    operators = [ladder_matrix(gen.hamiltonian, N, M)]
    for rate, operator in gen.jumps:
        if rate == 0:
            continue
        if operator.net_change != 0:
            raise ConstraintViolation("The commutant is defined here for number-conserving jumps only.")
        jump = ladder_matrix(operator, N, M)
        operators.extend([rate * jump, rate * jump.conj().T])
    constraints = np.vstack([np.kron(o, identity) - np.kron(identity, o.T) for o in operators])
    return int(scipy.linalg.null_space(constraints, rcond=NULL_SPACE_RCOND).shape[1])


def trace_distance(first: NumberMixture, second: NumberMixture) -> float:
    """(1/2) sum_N || p_N rho_N - q_N sigma_N ||_1."""
    blocks_1, blocks_2 = first.blocks(), second.blocks()
    total = 0.0
    for N in set(blocks_1) | set(blocks_2):
        difference = blocks_1.get(N, 0) - blocks_2.get(N, 0)
        total += float(np.sum(np.abs(np.linalg.eigvalsh(np.atleast_2d(difference)))))
    return 0.5 * total


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    eigenvalues, vectors = np.linalg.eigh(matrix)
    return (vectors * np.sqrt(np.clip(eigenvalues, 0, None))) @ vectors.conj().T


def fidelity(first: NumberMixture, second: NumberMixture) -> float:
    """Uhlmann fidelity (sum_N || sqrt(p_N rho_N) sqrt(q_N sigma_N) ||_1)^2."""
    blocks_1, blocks_2 = first.blocks(), second.blocks()
    overlap = 0.0
    for N in set(blocks_1) & set(blocks_2):
        product = _psd_sqrt(blocks_1[N]) @ _psd_sqrt(blocks_2[N])
        overlap += float(np.sum(np.linalg.svd(product, compute_uv=False)))
    return overlap ** 2


def vacuum(M: int) -> NumberMixture:
    return NumberMixture.from_state(SectorDensityMatrix(0, M, np.ones((1, 1))))


def normalized_identities(mixture: NumberMixture) -> NumberMixture:
    """sum_N p_N 1_N / d_N with the weights of the given mixture."""
    return NumberMixture(tuple((w, SectorDensityMatrix.maximally_mixed(rho.N, rho.M)) for w, rho in mixture.components))


# --------------------------------------------------------------------------------------------------
# Worked examples in closed form
# --------------------------------------------------------------------------------------------------

def _check_example_parameters(p: float, rates: Sequence[float], energies: Sequence[float], t: float):
    _check_probability(p)
    _check_time(t)
    if len(energies) != EXAMPLE_M:
        raise ConstraintViolation(f"The worked examples need {EXAMPLE_M} mode energies, got {len(energies)}.")
    if any(rate < 0 for rate in rates):
        raise ConstraintViolation("Rates must be non-negative.")


def analytic_loss_example(p: float, lambda_0: float, energies: Sequence[float], t: float) -> NumberMixture:
    """
    Closed-form evolution of example_state(p) under A_0 = a_1 a_3 and H = sum_j eps_j a_j^dag a_j.

    The vacuum carries weight p/2 (1 - e^{-t lambda_0}); the two-particle sector keeps psi_2, psi_3 and
    the unnormalised psi_1(t) = (e^{-it(eps_2+eps_4)}|0,1,0,1> + e^{-t(lambda_0/2 + i(eps_1+eps_3))}|1,0,1,0>)/sqrt(2).
    """
    _check_example_parameters(p, [lambda_0], energies, t)
    e1, e2, e3, e4 = energies
    index = sector_index(EXAMPLE_N, EXAMPLE_M)
    psi_1 = np.zeros(len(index), dtype=complex)
    psi_1[index[(0, 1, 0, 1)]] = np.exp(-1j * t * (e2 + e4)) / np.sqrt(2)
    psi_1[index[(1, 0, 1, 0)]] = np.exp(-t * (lambda_0 / 2 + 1j * (e1 + e3))) / np.sqrt(2)
    _, psi_2, psi_3 = example_vectors()
    two_particle = (p * np.outer(psi_1, psi_1.conj())
                    + (1 - p) / 2 * (np.outer(psi_2, psi_2.conj()) + np.outer(psi_3, psi_3.conj())))
    vacuum_weight = p / 2 * (1 - np.exp(-t * lambda_0))
    weight = float(np.trace(two_particle).real)
    return NumberMixture((
        (vacuum_weight, SectorDensityMatrix(0, EXAMPLE_M, np.ones((1, 1)))),
        (weight, SectorDensityMatrix(EXAMPLE_N, EXAMPLE_M, two_particle / weight)),
    ), diagnostics={"method": "analytic", "t": t})


def analytic_dephasing_example(p: float, rates: Sequence[float], energies: Sequence[float],
                               t: float) -> SectorDensityMatrix:
    """
    Closed-form evolution of example_state(p) under dephasing A_j = a_j^dag a_j and diagonal H: the
    |1,0,1,0><0,1,0,1| coherence is damped by e^{-t sum_j lambda_j / 2} and rotated by
    e^{it(eps_2 + eps_4 - eps_1 - eps_3)}.
    """
    if len(rates) != EXAMPLE_M:
        raise ConstraintViolation(f"The dephasing example needs {EXAMPLE_M} rates, got {len(rates)}.")
    _check_example_parameters(p, rates, energies, t)
    e1, e2, e3, e4 = energies
    rho = np.array(_example_matrix(p))
    index = sector_index(EXAMPLE_N, EXAMPLE_M)
    i, j = index[(1, 0, 1, 0)], index[(0, 1, 0, 1)]
    coherence = p / 2 * np.exp(-t * sum(rates) / 2) * np.exp(1j * t * (e2 + e4 - e1 - e3))
    rho[i, j] = coherence
    rho[j, i] = np.conj(coherence)
    return SectorDensityMatrix(EXAMPLE_N, EXAMPLE_M, rho)


def _example_matrix(p: float) -> np.ndarray:
    psi_1, psi_2, psi_3 = example_vectors()
    return (p * np.outer(psi_1, psi_1.conj())
            + (1 - p) / 2 * (np.outer(psi_2, psi_2.conj()) + np.outer(psi_3, psi_3.conj())))
