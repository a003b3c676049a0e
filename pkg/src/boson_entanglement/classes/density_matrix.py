from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Tuple

import numpy as np

from src.boson_entanglement.classes.fock_state import Bipartition, FockState
from src.boson_entanglement.fock_core import block_index_table, sector_dimension, sector_index
from src.utils.constants import (DROP_WEIGHT, EVOLUTION_POSITIVITY_TOL, HERMITICITY_TOL, POSITIVITY_TOL,
                                 TRACE_TOL, WEIGHT_TOL)
from src.utils.exceptions import ConstraintViolation, EmptyState, PositivityViolation


@dataclass(frozen=True, eq=False)
class SectorDensityMatrix:
    """
    Density matrix on the N-particle sector of M modes, in canonical Fock order.

    Attributes:
        N (int): Particle number.
        M (int): Mode count.
        matrix (np.ndarray): Read-only complex (dim, dim) array.
        positivity_tol (float): Accepted magnitude of negative eigenvalues.
    """
    N: int
    M: int
    matrix: np.ndarray
    positivity_tol: float = field(default=POSITIVITY_TOL, repr=False)

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        dim = sector_dimension(self.N, self.M)
        if matrix.shape != (dim, dim):
            raise ConstraintViolation(f"Sector (N={self.N}, M={self.M}) needs a {dim}x{dim} matrix, "
                                      f"got shape {matrix.shape}.")
        asymmetry = np.max(np.abs(matrix - matrix.conj().T))
        if asymmetry > HERMITICITY_TOL:
            raise ConstraintViolation(f"Density matrix is not Hermitian (max |rho - rho^dag| = {asymmetry:.3e}).")
        trace = np.trace(matrix).real
        if abs(trace - 1.0) > TRACE_TOL:
            raise ConstraintViolation(f"Density matrix trace is {trace!r}, expected 1.")
        min_eigenvalue = float(np.linalg.eigvalsh(matrix)[0])
        if min_eigenvalue < -self.positivity_tol:
            raise PositivityViolation(
                f"Density matrix on sector N={self.N} has eigenvalue {min_eigenvalue:.3e} "
                f"below tolerance -{self.positivity_tol:.1e}.")
        matrix.setflags(write=False)
        object.__setattr__(self, 'matrix', matrix)
        object.__setattr__(self, '_min_eigenvalue', min_eigenvalue)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def min_eigenvalue(self) -> float:
        return self._min_eigenvalue

    @classmethod
    def from_pure(cls, N: int, M: int, psi: np.ndarray) -> "SectorDensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise EmptyState("Cannot build a density matrix from the zero vector.")
        psi = psi / norm
        return cls(N, M, np.outer(psi, psi.conj()))

    @classmethod
    def from_fock(cls, state: FockState) -> "SectorDensityMatrix":
        index = sector_index(state.total(), state.M)
        psi = np.zeros(len(index), dtype=complex)
        psi[index[state.occupations]] = 1.0
        return cls.from_pure(state.total(), state.M, psi)

    @classmethod
    def maximally_mixed(cls, N: int, M: int) -> "SectorDensityMatrix":
        """The normalised identity 1_N / d_N."""
        dim = sector_dimension(N, M)
        return cls(N, M, np.eye(dim, dtype=complex) / dim)


@dataclass(frozen=True, eq=False)
class NumberMixture:
    """
    Mixture sum_N p_N rho^(N) over distinct particle numbers; no coherences across sectors.

    Attributes:
        components (tuple): (weight, SectorDensityMatrix) pairs sorted by N.
        diagnostics (dict): Free-form record of how the mixture was produced.
    """
    components: Tuple[Tuple[float, SectorDensityMatrix], ...]
    diagnostics: Dict[str, object] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        components = tuple(sorted(((float(w), rho) for w, rho in self.components), key=lambda c: c[1].N))
        if not components:
            raise EmptyState("A number mixture needs at least one component.")
        numbers = [rho.N for _, rho in components]
        if len(set(numbers)) != len(numbers):
            raise ConstraintViolation(f"Particle numbers of a mixture must be distinct, got {numbers}.")
        if len({rho.M for _, rho in components}) != 1:
            raise ConstraintViolation("All mixture components must share the mode count.")
        weights = np.array([w for w, _ in components])
        if np.any(weights < -WEIGHT_TOL):
            raise ConstraintViolation(f"Mixture weights must be non-negative, got {weights.tolist()}.")
        if abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise ConstraintViolation(f"Mixture weights sum to {weights.sum()!r}, expected 1.")
        object.__setattr__(self, 'components', components)

    @classmethod
    def from_state(cls, rho: SectorDensityMatrix) -> "NumberMixture":
        return cls(((1.0, rho),))

    @classmethod
    def from_blocks(cls, blocks: Mapping[int, np.ndarray], M: int,
                    positivity_tol: float = EVOLUTION_POSITIVITY_TOL,
                    diagnostics: Optional[dict] = None) -> "NumberMixture":
        """
        Build a mixture from unnormalised sector blocks p_N rho^(N).

        Blocks are Hermitised, blocks with trace in [-positivity_tol, DROP_WEIGHT] are dropped, and each
        normalised component accepts negative eigenvalues down to -positivity_tol / p_N.
        """
        components = []
        for N in sorted(blocks):
            block = np.asarray(blocks[N], dtype=complex)
            block = (block + block.conj().T) / 2
            weight = float(np.trace(block).real)
            if weight < -positivity_tol:
                raise PositivityViolation(f"Sector N={N} carries negative weight {weight:.3e}.")
            if weight <= DROP_WEIGHT:
                continue
            components.append((weight, SectorDensityMatrix(N, M, block / weight,
                                                           positivity_tol=positivity_tol / weight)))
        total = sum(w for w, _ in components)
        components = tuple((w / total, rho) for w, rho in components)
        return cls(components, diagnostics=dict(diagnostics or {}))

    @property
    def M(self) -> int:
        return self.components[0][1].M

    @property
    def particle_numbers(self) -> Tuple[int, ...]:
        return tuple(rho.N for _, rho in self.components)

    @property
    def N_max(self) -> int:
        return max(self.particle_numbers)

    def weight(self, N: int) -> float:
        return next((w for w, rho in self.components if rho.N == N), 0.0)

    def sector(self, N: int) -> Optional[SectorDensityMatrix]:
        return next((rho for _, rho in self.components if rho.N == N), None)

    def blocks(self) -> Dict[int, np.ndarray]:
        """Unnormalised sector blocks p_N rho^(N)."""
        return {rho.N: w * np.asarray(rho.matrix) for w, rho in self.components}

    @property
    def min_eigenvalue(self) -> float:
        return min(rho.min_eigenvalue for _, rho in self.components)


def convex_combination(states: Iterable[SectorDensityMatrix], weights: Iterable[float]) -> SectorDensityMatrix:
    """Convex combination of density matrices on one common sector."""
    states = list(states)
    weights = np.asarray(list(weights), dtype=float)
    if not states:
        raise EmptyState("Convex combination of no states.")
    if len(weights) != len(states) or np.any(weights < 0) or abs(weights.sum() - 1.0) > WEIGHT_TOL:
        raise ConstraintViolation("Convex weights must be non-negative, one per state and sum to 1.")
    if len({(rho.N, rho.M) for rho in states}) != 1:
        raise ConstraintViolation("Convex combination requires states on the same sector.")
    matrix = sum(w * np.asarray(rho.matrix) for w, rho in zip(weights, states))
    return SectorDensityMatrix(states[0].N, states[0].M, matrix / weights.sum())


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    """
    Coefficients rho_{k sigma sigma', l tau tau'} grouped by (k, l).

    Attributes:
        N (int): Particle number.
        bip (Bipartition): Bipartition used for the labels.
        blocks (dict): (k, l) -> array of shape (dim A_k, dim B_{N-k}, dim A_l, dim B_{N-l}).
    """
    N: int
    bip: Bipartition
    blocks: Mapping[Tuple[int, int], np.ndarray]

    @property
    def local_numbers(self) -> Tuple[int, ...]:
        return tuple(range(self.N + 1))

    def block(self, k: int, l: int) -> np.ndarray:
        return self.blocks[(k, l)]

    def reassemble(self) -> np.ndarray:
        table = block_index_table(self.N, self.bip)
        dim = sector_dimension(self.N, self.bip.M)
        matrix = np.zeros((dim, dim), dtype=complex)
        for (k, l), block in self.blocks.items():
            rows, columns = table[k].ravel(), table[l].ravel()
            matrix[np.ix_(rows, columns)] = block.reshape(len(rows), len(columns))
        return matrix
