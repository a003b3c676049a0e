"""
Fock-sector enumeration, the bipartite separable labelling and ladder-operator matrices.

Sector states are ordered lexicographically decreasing, e.g. (2,0), (1,1), (0,2). The same order
ranks the A-side and B-side sub-occupations, which fixes the (k, sigma, sigma') labels.
"""
import logging
from functools import lru_cache
from math import comb
from typing import Dict, Tuple

import numpy as np

from src.boson_entanglement.classes.fock_state import Bipartition, FockState, Ladder, OperatorSpec, SeparableLabel
from src.utils.exceptions import ConstraintViolation, ModeOutOfRange

logger = logging.getLogger(__name__)


def sector_dimension(N: int, M: int) -> int:
    return comb(N + M - 1, N)


@lru_cache(maxsize=None)
def enumerate_sector(N: int, M: int) -> Tuple[FockState, ...]:
    """
    All Fock states with N particles in M modes, in canonical (lexicographically decreasing) order.

    Args:
        N: Particle number, N >= 0.
        M: Mode count, M >= 1.

    Returns:
        Tuple of C(N+M-1, N) FockStates.
    """
    if N < 0 or M < 1:
        raise ConstraintViolation(f"enumerate_sector needs N >= 0 and M >= 1, got N={N}, M={M}.")
    return tuple(FockState(occupations) for occupations in _compositions(N, M))


def _compositions(N: int, M: int):
    if M == 1:
        yield (N,)
        return
    for first in range(N, -1, -1):
        for rest in _compositions(N - first, M - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def sector_index(N: int, M: int) -> Dict[Tuple[int, ...], int]:
    """Map from occupation tuple to its position in enumerate_sector(N, M)."""
    return {state.occupations: i for i, state in enumerate(enumerate_sector(N, M))}


def separable_label(state: FockState, bip: Bipartition) -> SeparableLabel:
    if state.M != bip.M:
        raise ModeOutOfRange(f"State has {state.M} modes, bipartition expects {bip.M}.")
    side_a, side_b = state.split(bip.m)
    k = side_a.total()
    return SeparableLabel(
        k=k,
        sigma=sector_index(k, bip.m)[side_a.occupations],
        sigma_prime=sector_index(side_b.total(), bip.M - bip.m)[side_b.occupations],
    )


def label_to_state(label: SeparableLabel, N: int, bip: Bipartition) -> FockState:
    """Inverse of separable_label within the N-particle sector."""
    if not 0 <= label.k <= N:
        raise ConstraintViolation(f"Local number k={label.k} outside [0, {N}].")
    states_a = enumerate_sector(label.k, bip.m)
    states_b = enumerate_sector(N - label.k, bip.M - bip.m)
    if not 0 <= label.sigma < len(states_a) or not 0 <= label.sigma_prime < len(states_b):
        raise ConstraintViolation(
            f"Label {label} out of range: sigma < {len(states_a)}, sigma' < {len(states_b)} required.")
    return FockState(states_a[label.sigma].occupations + states_b[label.sigma_prime].occupations)


@lru_cache(maxsize=None)
def block_index_table(N: int, bip: Bipartition) -> Dict[int, np.ndarray]:
    """
    For each local number k, the sector indices of the Fock states labelled (k, sigma, sigma').

    Returns:
        Dict k -> read-only integer array of shape (dim A_k, dim B_{N-k}).
    """
    index = sector_index(N, bip.M)
    table = {}
    for k in range(N + 1):
        states_a = enumerate_sector(k, bip.m)
        states_b = enumerate_sector(N - k, bip.M - bip.m)
        rows = np.array([
            [index[a.occupations + b.occupations] for b in states_b] for a in states_a
        ], dtype=int)
        rows.setflags(write=False)
        table[k] = rows
    return table


@lru_cache(maxsize=None)
def local_particle_numbers(N: int, bip: Bipartition) -> np.ndarray:
    """Number of A-side particles of every state of the N-sector, in sector order."""
    numbers = np.array([sum(s.occupations[:bip.m]) for s in enumerate_sector(N, bip.M)], dtype=int)
    numbers.setflags(write=False)
    return numbers


@lru_cache(maxsize=None)
def occupation_matrix(N: int, M: int) -> np.ndarray:
    """Integer array (dim, M) of the sector's occupation vectors."""
    occupations = np.array([s.occupations for s in enumerate_sector(N, M)], dtype=int).reshape(-1, M)
    occupations.setflags(write=False)
    return occupations


@lru_cache(maxsize=4096)
def ladder_matrix(spec: OperatorSpec, N_from: int, M: int) -> np.ndarray:
    """
    Matrix of a creation/annihilation polynomial from the N_from sector to N_from + net change.

    Args:
        spec: Operator whose terms all change the particle number by the same amount.
        N_from: Source sector.
        M: Mode count.

    Returns:
        Read-only complex array (dim target, dim source); zero rows if the target sector is empty.
    """
    if spec.max_mode() > M:
        raise ModeOutOfRange(f"Operator acts on mode {spec.max_mode()} but the system has {M} modes.")
    N_to = N_from + spec.net_change
    source = enumerate_sector(N_from, M)
    if N_to < 0:
        matrix = np.zeros((0, len(source)), dtype=complex)
        matrix.setflags(write=False)
        return matrix
    target_index = sector_index(N_to, M)
    matrix = np.zeros((len(target_index), len(source)), dtype=complex)
    for column, state in enumerate(source):
        for coefficient, word in spec.terms:
            amplitude, occupations = _apply_word(word, state.occupations)
            if amplitude:
                matrix[target_index[occupations], column] += coefficient * amplitude
    matrix.setflags(write=False)
    return matrix


def _apply_word(word, occupations):
    occupations = list(occupations)
    amplitude = 1.0
    for mode, ladder in reversed(word):
        j = mode - 1
        if ladder is Ladder.ANNIHILATE:
            if occupations[j] == 0:
                return 0.0, None
            amplitude *= np.sqrt(occupations[j])
            occupations[j] -= 1
        else:
            amplitude *= np.sqrt(occupations[j] + 1)
            occupations[j] += 1
    return amplitude, tuple(occupations)


def is_local_operator(spec: OperatorSpec, bip: Bipartition, tol: float = 1e-12) -> bool:
    """
    True iff the operator factorises as (A-side polynomial) x (B-side polynomial).

    Ladder operators of different modes commute, so each word splits into its A-side and B-side
    sub-words; the operator is local iff the coefficient matrix indexed by (A word, B word) has rank
    at most one.
    """
    spec = spec.simplified()
    if spec.max_mode() > bip.M:
        raise ModeOutOfRange(f"Operator acts on mode {spec.max_mode()} but the system has {bip.M} modes.")
    rows: Dict[tuple, int] = {}
    columns: Dict[tuple, int] = {}
    entries = []
    for coefficient, word in spec.terms:
        word_a = tuple(f for f in word if f[0] <= bip.m)
        word_b = tuple(f for f in word if f[0] > bip.m)
        entries.append((rows.setdefault(word_a, len(rows)), columns.setdefault(word_b, len(columns)), coefficient))
    if not entries:
        return True
    coefficients = np.zeros((len(rows), len(columns)), dtype=complex)
    for r, c, value in entries:
        coefficients[r, c] += value
    singular_values = np.linalg.svd(coefficients, compute_uv=False)
    return bool(np.all(singular_values[1:] <= tol * max(singular_values[0], 1.0)))
