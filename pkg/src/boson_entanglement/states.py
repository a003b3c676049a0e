"""
Sector density matrices in the separable basis, the worked example state and the diagonal class.
"""
import logging
from typing import List, Mapping, Optional, Tuple, Union

import numpy as np

from src.boson_entanglement.classes.asymptotic_spec import CoefficientTable
from src.boson_entanglement.classes.density_matrix import (BlockDecomposition, SectorDensityMatrix,
                                                           convex_combination)
from src.boson_entanglement.classes.fock_state import Bipartition, FockState, Ladder, OperatorSpec, SeparableLabel
from src.boson_entanglement.fock_core import (block_index_table, label_to_state, ladder_matrix,
                                              local_particle_numbers, occupation_matrix, sector_dimension,
                                              sector_index)
from src.utils.constants import BLOCK_TOL, HERMITICITY_TOL, INTEGER_SHIFT_TOL
from src.utils.exceptions import (ConstraintViolation, InvalidProbability, ModeOutOfRange, PositivityViolation)

logger = logging.getLogger(__name__)

EXAMPLE_N = 2
EXAMPLE_M = 4


def to_separable_basis(rho: SectorDensityMatrix, bip: Bipartition) -> BlockDecomposition:
    """
    Regroup the sector matrix into coefficients rho_{k sigma sigma', l tau tau'}.

    Args:
        rho: State on the N-particle sector.
        bip: Bipartition with bip.M == rho.M.

    Returns:
        BlockDecomposition with one 4-index block per (k, l), 0 <= k, l <= N.
    """
    _check_modes(rho, bip)
    table = block_index_table(rho.N, bip)
    blocks = {}
    for k, rows in table.items():
        for l, columns in table.items():
            block = rho.matrix[np.ix_(rows.ravel(), columns.ravel())]
            blocks[(k, l)] = block.reshape(rows.shape + columns.shape)
    return BlockDecomposition(rho.N, bip, blocks)


def is_block_diagonal(rho: SectorDensityMatrix, bip: Bipartition, tol: float = BLOCK_TOL) -> bool:
    """True iff every coefficient between different local numbers k != l is at most tol in magnitude."""
    if tol <= 0:
        raise ConstraintViolation(f"tol must be positive, got {tol}.")
    _check_modes(rho, bip)
    k = local_particle_numbers(rho.N, bip)
    off_block = k[:, None] != k[None, :]
    return not np.any(np.abs(rho.matrix[off_block]) > tol)


def _check_modes(rho: SectorDensityMatrix, bip: Bipartition):
    if rho.M != bip.M:
        raise ModeOutOfRange(f"State has {rho.M} modes, bipartition expects {bip.M}.")


def _check_probability(p: float):
    if not isinstance(p, (int, float)) or isinstance(p, bool) or not 0.0 <= p <= 1.0:
        raise InvalidProbability(f"Probability must lie in [0, 1], got {p!r}.")


def example_vectors() -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """psi_1 = (|0,1,0,1> + |1,0,1,0>)/sqrt(2), psi_2 = |0,1,1,0>, psi_3 = |1,0,0,1> on (N=2, M=4)."""
    index = sector_index(EXAMPLE_N, EXAMPLE_M)
    dim = len(index)
    psi_1, psi_2, psi_3 = (np.zeros(dim, dtype=complex) for _ in range(3))
    psi_1[index[(0, 1, 0, 1)]] = psi_1[index[(1, 0, 1, 0)]] = 1 / np.sqrt(2)
    psi_2[index[(0, 1, 1, 0)]] = 1.0
    psi_3[index[(1, 0, 0, 1)]] = 1.0
    return psi_1, psi_2, psi_3


def example_state(p: float) -> SectorDensityMatrix:
    """
    p |psi_1><psi_1| + (1-p)/2 (|psi_2><psi_2| + |psi_3><psi_3|): block-diagonal, entangled iff p > 1/2.
    """
    _check_probability(p)
    psi_1, psi_2, psi_3 = example_vectors()
    matrix = (p * np.outer(psi_1, psi_1.conj())
              + (1 - p) / 2 * (np.outer(psi_2, psi_2.conj()) + np.outer(psi_3, psi_3.conj())))
    return SectorDensityMatrix(EXAMPLE_N, EXAMPLE_M, matrix)


def separable_pure(poly_a: OperatorSpec, poly_b: OperatorSpec, bip: Bipartition) -> SectorDensityMatrix:
    """
    Normalised P(a^dag) Q(a^dag)|0> with P on the A modes and Q on the B modes.

    Raises:
        ModeOutOfRange: A polynomial touches the other side's modes.
        ConstraintViolation: A polynomial contains annihilation operators.
        EmptyState: The resulting vector is zero.
    """
    for name, poly, modes in (("A", poly_a, bip.modes_a), ("B", poly_b, bip.modes_b)):
        if not poly.modes() <= set(modes):
            raise ModeOutOfRange(f"Side {name} polynomial acts on modes {sorted(poly.modes())}, "
                                 f"allowed {list(modes)}.")
        if Ladder.ANNIHILATE in poly.ladders():
            raise ConstraintViolation(f"Side {name} polynomial must contain creation operators only.")
    n_b = poly_b.net_change
    vacuum = np.ones(1, dtype=complex)
    psi = ladder_matrix(poly_a, n_b, bip.M) @ (ladder_matrix(poly_b, 0, bip.M) @ vacuum)
    return SectorDensityMatrix.from_pure(n_b + poly_a.net_change, bip.M, psi)


def _shifted_partner(row: FockState, k: int, l: int, bip: Bipartition, alpha: float,
                     c: Tuple[float, ...]) -> FockState:
    """
    Column Fock state paired with a row state in the diagonal class.

    Each occupation moves by c_j |k - l|^alpha: down on side A and up on side B when k > l,
    the other way round when k < l.
    """
    if k == l:
        return row
    magnitude = abs(k - l) ** alpha
    direction = 1 if k > l else -1
    occupations = []
    for j, occupation in enumerate(row.occupations):
        shift = c[j] * magnitude
        if abs(shift - round(shift)) > INTEGER_SHIFT_TOL:
            raise ConstraintViolation(f"Shift c_{j + 1}|k-l|^alpha = {shift} is not an integer.")
        sign = -direction if j < bip.m else direction
        occupations.append(occupation + sign * int(round(shift)))
    N = row.total()
    if (any(o < 0 for o in occupations) or sum(occupations[:bip.m]) != l
            or sum(occupations[bip.m:]) != N - l):
        raise ConstraintViolation(
            f"(alpha, c) cannot pair {row} (k={k}) with an {N}-particle Fock state of local number l={l}.")
    return FockState(tuple(occupations))


def diagonal_class_pattern(N: int, bip: Bipartition, table: CoefficientTable, alpha: float,
                           c: Tuple[float, ...]) -> List[Tuple[FockState, FockState]]:
    """(row, column) Fock states of every table entry, in table order."""
    pattern = []
    for k, l, sigma, sigma_prime in table.keys.tolist():
        row = label_to_state(SeparableLabel(k, sigma, sigma_prime), N, bip)
        pattern.append((row, _shifted_partner(row, k, l, bip, alpha, tuple(c))))
    return pattern


def diagonal_class_state(N: int, M: int, bip: Bipartition,
                         R: Union[CoefficientTable, Mapping[Tuple[int, int, int, int], complex]],
                         alpha: float, c: Tuple[float, ...]) -> SectorDensityMatrix:
    """
    State with coefficients rho_{k sigma sigma', l sigma sigma'} supplied by R and zero elsewhere.

    Args:
        N: Particle number.
        M: Mode count.
        bip: Bipartition.
        R: Table keyed by (k, l, sigma, sigma'); the row label (k, sigma, sigma') fixes the Fock state
           and the column follows the occupation shift c_j |k - l|^alpha. The table supplies
           missing Hermitian partners by conjugation.
        alpha: Positive exponent.
        c: Non-negative coefficient per mode.

    Raises:
        ConstraintViolation: (alpha, c) cannot reproduce the index pattern, or R is not a density matrix.
    """
    if bip.M != M or len(c) != M:
        raise ConstraintViolation(f"Need a bipartition of {M} modes and {M} coefficients c_j.")
    if alpha <= 0 or any(x < 0 for x in c):
        raise ConstraintViolation("alpha must be positive and every c_j non-negative.")
    if M == 2 and (alpha != 1 or tuple(c) != (1, 1)):
        raise ConstraintViolation("Two-mode states force alpha = c_1 = c_2 = 1.")
    table = R if isinstance(R, CoefficientTable) else CoefficientTable.from_mapping(R)
    index = sector_index(N, M)
    matrix = np.zeros((len(index), len(index)), dtype=complex)
    for (row, column), value in zip(diagonal_class_pattern(N, bip, table, alpha, c), table.values):
        matrix[index[row.occupations], index[column.occupations]] = value
    if not np.allclose(matrix, matrix.conj().T, rtol=0.0, atol=HERMITICITY_TOL):
        raise ConstraintViolation("Partner entries (l, k, sigma, sigma') do not land on the transposed positions.")
    try:
        return SectorDensityMatrix(N, M, matrix)
    except PositivityViolation as error:
        raise ConstraintViolation(f"Coefficient table is not positive semidefinite: {error}") from error


def two_mode_table(rho: SectorDensityMatrix) -> CoefficientTable:
    """Coefficient table of a two-mode state (m = 1), keyed (k, l, 0, 0)."""
    if rho.M != 2:
        raise ConstraintViolation(f"two_mode_table needs M = 2, got M={rho.M}.")
    return CoefficientTable.from_two_mode_matrix(rho.N, rho.matrix)


def flat_two_mode_table(N: int) -> CoefficientTable:
    return CoefficientTable.flat_two_mode(N)


def apply_local_phase(rho: SectorDensityMatrix, mode: int, theta: float) -> SectorDensityMatrix:
    """U rho U^dag with U = exp(-i theta a_j^dag a_j)."""
    if not 1 <= mode <= rho.M:
        raise ModeOutOfRange(f"Mode {mode} outside [1, {rho.M}].")
    phases = np.exp(-1j * theta * occupation_matrix(rho.N, rho.M)[:, mode - 1])
    return SectorDensityMatrix(rho.N, rho.M, phases[:, None] * rho.matrix * phases.conj()[None, :])


def random_sector_state(N: int, M: int, rng: np.random.Generator,
                        rank: Optional[int] = None) -> SectorDensityMatrix:
    """Ginibre-sampled density matrix of the given rank (full rank by default)."""
    dim = sector_dimension(N, M)
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ConstraintViolation(f"rank must lie in [1, {dim}], got {rank}.")
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    matrix = g @ g.conj().T
    matrix = (matrix + matrix.conj().T) / 2
    return SectorDensityMatrix(N, M, matrix / np.trace(matrix).real)


def _random_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    vector = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return vector / np.linalg.norm(vector)


def random_product_vector(N: int, bip: Bipartition, rng: np.random.Generator,
                          k: Optional[int] = None) -> np.ndarray:
    """Random P(a^dag) Q(a^dag)|0> with k particles on side A, as a sector vector."""
    k = int(rng.integers(0, N + 1)) if k is None else k
    rows = block_index_table(N, bip)[k]
    side_a = _random_vector(rows.shape[0], rng)
    side_b = _random_vector(rows.shape[1], rng)
    psi = np.zeros(sector_dimension(N, bip.M), dtype=complex)
    psi[rows.ravel()] = np.outer(side_a, side_b).ravel()
    return psi


def random_separable_state(N: int, M: int, bip: Bipartition, rng: np.random.Generator,
                           n_terms: int = 3) -> SectorDensityMatrix:
    """Convex combination of n_terms random pure separable states."""
    if bip.M != M:
        raise ModeOutOfRange(f"Bipartition of {bip.M} modes used with M={M}.")
    states = [SectorDensityMatrix.from_pure(N, M, random_product_vector(N, bip, rng)) for _ in range(n_terms)]
    return convex_combination(states, rng.dirichlet(np.ones(n_terms)))


def random_non_block_diagonal_state(N: int, M: int, bip: Bipartition, rng: np.random.Generator,
                                    local_numbers: Optional[Tuple[int, int]] = None) -> SectorDensityMatrix:
    """
    Random pure superposition of two product states with different local numbers k.
    """
    if N < 1:
        raise ConstraintViolation("A non-block-diagonal state needs N >= 1.")
    if bip.M != M:
        raise ModeOutOfRange(f"Bipartition of {bip.M} modes used with M={M}.")
    if local_numbers is None:
        local_numbers = tuple(int(k) for k in rng.choice(N + 1, size=2, replace=False))
    k1, k2 = local_numbers
    if k1 == k2:
        raise ConstraintViolation("The two local numbers must differ.")
    amplitudes = _random_vector(2, rng)
    psi = (amplitudes[0] * random_product_vector(N, bip, rng, k1)
           + amplitudes[1] * random_product_vector(N, bip, rng, k2))
    return SectorDensityMatrix.from_pure(N, M, psi)
