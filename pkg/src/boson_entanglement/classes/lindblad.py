import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Mapping, Optional, Tuple

import numpy as np
import scipy.linalg

from src.boson_entanglement.classes.density_matrix import NumberMixture
from src.boson_entanglement.classes.fock_state import Bipartition, OperatorSpec
from src.boson_entanglement.fock_core import ladder_matrix, local_particle_numbers, sector_dimension
from src.utils.exceptions import ConstraintViolation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LindbladGenerator:
    """
    Hamiltonian plus weighted jump operators of a Lindblad master equation (hbar = 1).

    Attributes:
        hamiltonian (OperatorSpec): Number-conserving Hermitian operator.
        jumps (tuple): (rate lambda_j >= 0, operator A_j) pairs; each A_j changes N by a fixed amount <= 0.
    """
    hamiltonian: OperatorSpec = field(default_factory=OperatorSpec.zero)
    jumps: Tuple[Tuple[float, OperatorSpec], ...] = ()

    def __post_init__(self):
        if self.hamiltonian.net_change != 0:
            raise ConstraintViolation("The Hamiltonian must conserve the particle number.")
        jumps = []
        for rate, operator in self.jumps:
            rate = float(rate)
            if not np.isfinite(rate) or rate < 0:
                raise ConstraintViolation(f"Jump rates must be finite and non-negative, got {rate}.")
            if operator.net_change > 0:
                raise ConstraintViolation(
                    "Jump operators that add particles cannot be represented on a truncated sector sum.")
            jumps.append((rate, operator))
        object.__setattr__(self, 'jumps', tuple(jumps))

    def hamiltonian_only(self) -> "LindbladGenerator":
        return LindbladGenerator(hamiltonian=self.hamiltonian)

    def noise_only(self) -> "LindbladGenerator":
        return LindbladGenerator(jumps=self.jumps)

    @property
    def max_rate(self) -> float:
        return max((rate for rate, _ in self.jumps), default=0.0)

    @property
    def max_mode(self) -> int:
        return max([self.hamiltonian.max_mode()] + [op.max_mode() for _, op in self.jumps])

    @property
    def conserves_number(self) -> bool:
        return all(op.net_change == 0 for rate, op in self.jumps if rate > 0)

    def characteristic_time(self, M: int) -> float:
        """Inverse of the largest rate or single-mode energy scale; inf for the zero generator."""
        scale = self.max_rate
        if not self.hamiltonian.is_zero():
            scale = max(scale, float(np.max(np.abs(ladder_matrix(self.hamiltonian, 1, M)))))
        return 1.0 / scale if scale > 0 else float('inf')


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """
    Superoperator on the direct sum of sectors, acting on row-major vectorised sector blocks.

    Attributes:
        M (int): Mode count.
        sectors (tuple): Particle numbers of the domain, ascending.
        blocks (dict): (N_out, N_in) -> matrix mapping vec(rho_{N_in}) to d/dt vec(rho_{N_out}).
        diagnostics (dict): Construction record (characteristic time).
    """
    M: int
    sectors: Tuple[int, ...]
    blocks: Mapping[Tuple[int, int], np.ndarray]
    diagnostics: Dict[str, object] = field(default_factory=dict)

    @cached_property
    def offsets(self) -> Dict[int, int]:
        offsets, start = {}, 0
        for N in self.sectors:
            offsets[N] = start
            start += sector_dimension(N, self.M) ** 2
        return offsets

    @property
    def dimension(self) -> int:
        return sum(sector_dimension(N, self.M) ** 2 for N in self.sectors)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Dense superoperator over the whole direct sum."""
        matrix = np.zeros((self.dimension, self.dimension), dtype=complex)
        for (n_out, n_in), block in self.blocks.items():
            r, c = self.offsets[n_out], self.offsets[n_in]
            matrix[r:r + block.shape[0], c:c + block.shape[1]] += block
        matrix.setflags(write=False)
        return matrix

    @cached_property
    def spectral(self) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray], float]:
        """(eigenvalues, eigenvectors, inverse eigenvectors, condition number of the eigenvectors)."""
        eigenvalues, vectors = scipy.linalg.eig(self.matrix)
        condition = float(np.linalg.cond(vectors))
        inverse = None
        if np.isfinite(condition):
            try:
                inverse = scipy.linalg.inv(vectors)
            except (np.linalg.LinAlgError, ValueError):
                condition = float('inf')
        logger.debug(f"Liouvillian of dimension {self.dimension}: eigenvector condition number {condition:.3e}.")
        return eigenvalues, vectors, inverse, condition

    def vectorize(self, mixture: NumberMixture) -> np.ndarray:
        if mixture.M != self.M:
            raise ConstraintViolation(f"State has {mixture.M} modes, Liouvillian {self.M}.")
        vector = np.zeros(self.dimension, dtype=complex)
        for N, block in mixture.blocks().items():
            if N not in self.offsets:
                raise ConstraintViolation(f"Sector N={N} is outside the Liouvillian domain {self.sectors}.")
            vector[self.offsets[N]:self.offsets[N] + block.size] = block.ravel()
        return vector

    def devectorize(self, vector: np.ndarray) -> Dict[int, np.ndarray]:
        blocks = {}
        for N in self.sectors:
            dim = sector_dimension(N, self.M)
            start = self.offsets[N]
            blocks[N] = np.asarray(vector[start:start + dim * dim]).reshape(dim, dim)
        return blocks

    def derivative(self, mixture: NumberMixture) -> Dict[int, np.ndarray]:
        """d rho / dt per sector."""
        return self.devectorize(self.matrix @ self.vectorize(mixture))

    def trace_residual(self) -> float:
        """max |Tr L[X]| over unit basis operators X; zero for a trace-preserving generator."""
        functional = np.concatenate([np.eye(sector_dimension(N, self.M)).ravel() for N in self.sectors])
        return float(np.max(np.abs(functional @ self.matrix), initial=0.0))

    def __add__(self, other: "Liouvillian") -> "Liouvillian":
        if not isinstance(other, Liouvillian):
            return NotImplemented
        if other.M != self.M or other.sectors != self.sectors:
            raise ConstraintViolation("Liouvillians must share the mode count and sector list to be added.")
        blocks = {key: np.array(value) for key, value in self.blocks.items()}
        for key, value in other.blocks.items():
            blocks[key] = blocks[key] + value if key in blocks else np.array(value)
        return Liouvillian(self.M, self.sectors, blocks)

    def preserves_blocks(self, bip: Bipartition, tol: float = 1e-12) -> bool:
        """
        True iff block-diagonal inputs (equal local numbers k on both sides) are mapped to
        block-diagonal outputs, i.e. the flow cannot superimpose different blocks.
        """
        scale = max(float(np.max(np.abs(self.matrix), initial=0.0)), 1.0)
        for (n_out, n_in), block in self.blocks.items():
            k_in = local_particle_numbers(n_in, bip)
            k_out = local_particle_numbers(n_out, bip)
            diagonal_in = (k_in[:, None] == k_in[None, :]).ravel()
            off_diagonal_out = (k_out[:, None] != k_out[None, :]).ravel()
            leak = block[np.ix_(off_diagonal_out, diagonal_in)]
            if leak.size and np.max(np.abs(leak)) > tol * scale:
                return False
        return True
