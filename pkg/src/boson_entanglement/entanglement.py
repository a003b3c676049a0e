"""
Negativity of fixed-N boson states across a mode bipartition.

negativity_formula evaluates the block closed form: for every pair (k, l) the coefficient block is
rearranged into the matrix F_{k,l} with R_{k,l} = F^dag F, and the negativity is
(sum Tr sqrt(R_{k,l}) - 1) / 2. negativity_oracle diagonalises the partial transpose directly.
"""
import logging
from enum import Enum
from typing import List, Tuple

import numpy as np

from src.boson_entanglement.classes.density_matrix import NumberMixture, SectorDensityMatrix
from src.boson_entanglement.classes.fock_state import Bipartition
from src.boson_entanglement.classes.reports import NegativityReport
from src.boson_entanglement.fock_core import block_index_table, local_particle_numbers
from src.boson_entanglement.states import is_block_diagonal, to_separable_basis
from src.utils.constants import PPT_TOL, R_NEGATIVE_TOL
from src.utils.exceptions import ConstraintViolation, ModeOutOfRange, NegativeEigenvalueInR

logger = logging.getLogger(__name__)

HostLabel = Tuple[int, int, int, int]


class Verdict(str, Enum):
    SEPARABLE = "separable"
    PPT = "ppt"
    ENTANGLED = "entangled"


def negativity_formula(rho: SectorDensityMatrix, bip: Bipartition) -> NegativityReport:
    """
    Negativity from the R_{k,l} blocks.

    Tr sqrt(R_{k,l}) is the sum of singular values of F_{k,l}; the eigenvalues of R_{k,l} are still
    checked, since R is positive semidefinite by construction.

    Raises:
        NegativeEigenvalueInR: An eigenvalue of some R_{k,l} is below -1e-9.
    """
    decomposition = to_separable_basis(rho, bip)
    per_block = {}
    for (k, l), block in decomposition.blocks.items():
        dim_a_k, dim_b_k, dim_a_l, dim_b_l = block.shape
        factor = block.transpose(2, 1, 0, 3).reshape(dim_a_l * dim_b_k, dim_a_k * dim_b_l)
        if not np.any(factor):
            per_block[(k, l)] = 0.0
            continue
        r_eigenvalues = np.linalg.eigvalsh(factor.conj().T @ factor)
        if r_eigenvalues[0] < -R_NEGATIVE_TOL:
            raise NegativeEigenvalueInR(f"R_({k},{l}) has eigenvalue {r_eigenvalues[0]:.3e}.")
        singular_values = np.linalg.svd(factor, compute_uv=False)
        per_block[(k, l)] = float(np.sum(singular_values))
    total = sum(per_block.values())
    value = 0.5 * (total - 1.0)
    return NegativityReport(value=max(value, 0.0), per_block=per_block, method="formula")


def partial_transpose(rho: SectorDensityMatrix, bip: Bipartition) -> Tuple[np.ndarray, List[HostLabel]]:
    """
    Partial transpose on side A, on the host space spanned by |k, sigma>_A (x) |N - l, tau'>_B for the
    local numbers k, l present in the state.

    Returns:
        (matrix, host labels (a, sigma, b, sigma')) with a, b the A-side and B-side particle counts.
    """
    if rho.M != bip.M:
        raise ModeOutOfRange(f"State has {rho.M} modes, bipartition expects {bip.M}.")
    N = rho.N
    table = block_index_table(N, bip)
    local = local_particle_numbers(N, bip)
    support = np.any(np.abs(rho.matrix) > 0, axis=1)
    present = sorted({int(k) for k in local[support]}) or [int(local[0])]

    a_offsets, a_size = {}, 0
    b_offsets, b_size = {}, 0
    for k in present:
        a_offsets[k] = a_size
        a_size += table[k].shape[0]
    for k in present:
        b_offsets[N - k] = b_size
        b_size += table[k].shape[1]

    host = np.zeros((a_size, b_size, a_size, b_size), dtype=complex)
    for k in present:
        rows = table[k]
        ra, rb = a_offsets[k], b_offsets[N - k]
        for l in present:
            columns = table[l]
            ca, cb = a_offsets[l], b_offsets[N - l]
            block = rho.matrix[np.ix_(rows.ravel(), columns.ravel())].reshape(rows.shape + columns.shape)
            host[ra:ra + rows.shape[0], rb:rb + rows.shape[1], ca:ca + columns.shape[0], cb:cb + columns.shape[1]] = block

    transposed = host.transpose(2, 1, 0, 3).reshape(a_size * b_size, a_size * b_size)
    a_labels = [(k, sigma) for k in present for sigma in range(table[k].shape[0])]
    b_labels = [(N - k, sigma_prime) for k in present for sigma_prime in range(table[k].shape[1])]
    labels = [(a, sigma, b, sigma_prime) for a, sigma in a_labels for b, sigma_prime in b_labels]
    return transposed, labels


def negativity_oracle(rho: SectorDensityMatrix, bip: Bipartition) -> NegativityReport:
    """Sum of the magnitudes of the negative eigenvalues of the partial transpose."""
    transposed, _ = partial_transpose(rho, bip)
    eigenvalues = np.linalg.eigvalsh(transposed)
    return NegativityReport(value=float(-np.sum(eigenvalues[eigenvalues < 0])), method="oracle")


def negativity(rho: SectorDensityMatrix, bip: Bipartition, method: str = "formula") -> float:
    if method == "formula":
        return negativity_formula(rho, bip).value
    if method == "oracle":
        return negativity_oracle(rho, bip).value
    raise ConstraintViolation(f"Unknown negativity method '{method}'.")


def negativity_mixture(mixture: NumberMixture, bip: Bipartition, method: str = "formula") -> float:
    """sum_N p_N N(rho^(N)); the vacuum and other single-block sectors contribute zero."""
    return float(sum(weight * negativity(rho, bip, method) for weight, rho in mixture.components))


def is_ppt(rho: SectorDensityMatrix, bip: Bipartition, tol: float = PPT_TOL) -> bool:
    if tol <= 0:
        raise ConstraintViolation(f"tol must be positive, got {tol}.")
    transposed, _ = partial_transpose(rho, bip)
    return bool(np.linalg.eigvalsh(transposed)[0] >= -tol)


def separability_verdict(rho: SectorDensityMatrix, bip: Bipartition, tol: float = PPT_TOL) -> Verdict:
    """
    ENTANGLED for non-block-diagonal or NPT states; SEPARABLE for block-diagonal PPT states whose
    populated blocks are at most 2 x 3 (where PPT is sufficient); otherwise only PPT.
    """
    if not is_block_diagonal(rho, bip) or not is_ppt(rho, bip, tol):
        return Verdict.ENTANGLED
    table = block_index_table(rho.N, bip)
    local = local_particle_numbers(rho.N, bip)
    for k, rows in table.items():
        if np.trace(rho.matrix[np.ix_(local == k, local == k)]).real <= tol:
            continue
        dim_a, dim_b = rows.shape
        if min(dim_a, dim_b) > 1 and (min(dim_a, dim_b) > 2 or dim_a * dim_b > 6):
            return Verdict.PPT
    return Verdict.SEPARABLE
