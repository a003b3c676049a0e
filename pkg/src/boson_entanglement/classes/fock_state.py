from dataclasses import dataclass
from enum import Enum
from numbers import Number
from typing import Dict, FrozenSet, Iterable, List, Tuple, Union

from src.utils.exceptions import ConfigInvalid, ConstraintViolation, MixedParticleChange, ModeOutOfRange


class Ladder(str, Enum):
    CREATE = "create"
    ANNIHILATE = "annihilate"

    @property
    def change(self) -> int:
        return 1 if self is Ladder.CREATE else -1

    def adjoint(self) -> "Ladder":
        return Ladder.ANNIHILATE if self is Ladder.CREATE else Ladder.CREATE


Word = Tuple[Tuple[int, Ladder], ...]


@dataclass(frozen=True)
class FockState:
    """
    Occupation-number vector (k_1, ..., k_M) over M modes.

    Attributes:
        occupations (tuple): Non-negative particle counts, one per mode.
    """
    occupations: Tuple[int, ...]

    def __post_init__(self):
        occupations = tuple(int(k) for k in self.occupations)
        if any(k < 0 for k in occupations):
            raise ConstraintViolation(f"Occupations must be non-negative, got {occupations}.")
        object.__setattr__(self, 'occupations', occupations)

    @property
    def M(self) -> int:
        return len(self.occupations)

    def total(self) -> int:
        return sum(self.occupations)

    def split(self, m: int) -> Tuple["FockState", "FockState"]:
        return FockState(self.occupations[:m]), FockState(self.occupations[m:])

    def __str__(self):
        return "|" + ",".join(str(k) for k in self.occupations) + ">"


@dataclass(frozen=True)
class Bipartition:
    """
    Split of the M modes into A = {1..m} and B = {m+1..M}.
    """
    m: int
    M: int

    def __post_init__(self):
        if not 1 <= self.m < self.M:
            raise ConstraintViolation(f"Bipartition needs 1 <= m < M, got m={self.m}, M={self.M}.")

    @property
    def modes_a(self) -> range:
        return range(1, self.m + 1)

    @property
    def modes_b(self) -> range:
        return range(self.m + 1, self.M + 1)

    def side_of(self, mode: int) -> str:
        if not 1 <= mode <= self.M:
            raise ModeOutOfRange(f"Mode {mode} outside [1, {self.M}].")
        return 'A' if mode <= self.m else 'B'


@dataclass(frozen=True)
class SeparableLabel:
    """(k, sigma, sigma_prime): k particles on side A arranged as sigma, N - k on side B as sigma_prime."""
    k: int
    sigma: int
    sigma_prime: int


@dataclass(frozen=True)
class OperatorSpec:
    """
    Polynomial in creation and annihilation operators.

    Each term is (coefficient, word). A word lists (mode, ladder) factors written left to right as
    in the operator product, so the rightmost factor acts first. Modes are 1-based.

    Attributes:
        terms (tuple): Tuple of (complex coefficient, word) pairs.
    """
    terms: Tuple[Tuple[complex, Word], ...] = ()

    def __post_init__(self):
        normalized = []
        for coefficient, word in self.terms:
            word = tuple((int(mode), Ladder(ladder)) for mode, ladder in word)
            if any(mode < 1 for mode, _ in word):
                raise ModeOutOfRange(f"Mode indices are 1-based, got word {word}.")
            normalized.append((complex(coefficient), word))
        object.__setattr__(self, 'terms', tuple(normalized))

    # Builders

    @classmethod
    def identity(cls) -> "OperatorSpec":
        return cls(((1.0, ()),))

    @classmethod
    def zero(cls) -> "OperatorSpec":
        return cls(())

    @classmethod
    def create(cls, mode: int) -> "OperatorSpec":
        return cls(((1.0, ((mode, Ladder.CREATE),)),))

    @classmethod
    def annihilate(cls, mode: int) -> "OperatorSpec":
        return cls(((1.0, ((mode, Ladder.ANNIHILATE),)),))

    @classmethod
    def number(cls, mode: int) -> "OperatorSpec":
        return cls.create(mode) * cls.annihilate(mode)

    # Algebra

    def __add__(self, other: "OperatorSpec") -> "OperatorSpec":
        if not isinstance(other, OperatorSpec):
            return NotImplemented
        return OperatorSpec(self.terms + other.terms).simplified()

    def __neg__(self) -> "OperatorSpec":
        return -1.0 * self

    def __sub__(self, other: "OperatorSpec") -> "OperatorSpec":
        return self + (-other)

    def __mul__(self, other: Union["OperatorSpec", Number]) -> "OperatorSpec":
        if isinstance(other, OperatorSpec):
            return OperatorSpec(tuple(
                (c1 * c2, w1 + w2) for c1, w1 in self.terms for c2, w2 in other.terms
            )).simplified()
        if isinstance(other, Number):
            return OperatorSpec(tuple((complex(other) * c, w) for c, w in self.terms)).simplified()
        return NotImplemented

    def __rmul__(self, other: Number) -> "OperatorSpec":
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __pow__(self, power: int) -> "OperatorSpec":
        result = OperatorSpec.identity()
        for _ in range(int(power)):
            result = result * self
        return result

    def dagger(self) -> "OperatorSpec":
        return OperatorSpec(tuple(
            (c.conjugate(), tuple((mode, ladder.adjoint()) for mode, ladder in reversed(word)))
            for c, word in self.terms
        ))

    def simplified(self) -> "OperatorSpec":
        """Merge identical words and drop zero coefficients; word order of first appearance is kept."""
        merged: Dict[Word, complex] = {}
        for coefficient, word in self.terms:
            merged[word] = merged.get(word, 0j) + coefficient
        return OperatorSpec(tuple((c, w) for w, c in merged.items() if c != 0))

    # Inspection

    def particle_changes(self) -> FrozenSet[int]:
        return frozenset(sum(ladder.change for _, ladder in word) for _, word in self.terms)

    @property
    def net_change(self) -> int:
        """Net particle-number change shared by every term; 0 for the zero operator."""
        changes = self.particle_changes()
        if len(changes) > 1:
            raise MixedParticleChange(f"Terms change the particle number differently: {sorted(changes)}.")
        return next(iter(changes), 0)

    def modes(self) -> FrozenSet[int]:
        return frozenset(mode for _, word in self.terms for mode, _ in word)

    def max_mode(self) -> int:
        return max(self.modes(), default=0)

    def ladders(self) -> FrozenSet[Ladder]:
        return frozenset(ladder for _, word in self.terms for _, ladder in word)

    def is_zero(self) -> bool:
        return not self.simplified().terms

    # Serialisation

    def to_dict(self) -> dict:
        return {"terms": [
            {
                "coefficient": [c.real, c.imag] if c.imag else c.real,
                "word": [[mode, ladder.value] for mode, ladder in word],
            }
            for c, word in self.terms
        ]}

    @classmethod
    def from_dict(cls, data: dict, pointer: str = "") -> "OperatorSpec":
        if not isinstance(data, dict) or not isinstance(data.get("terms"), list):
            raise ConfigInvalid(f"{pointer}/terms", "operator needs a 'terms' list")
        terms: List[Tuple[complex, Word]] = []
        for i, term in enumerate(data["terms"]):
            term_pointer = f"{pointer}/terms/{i}"
            if not isinstance(term, dict):
                raise ConfigInvalid(term_pointer, "term must be an object with 'coefficient' and 'word'")
            coefficient = _parse_complex(term.get("coefficient", 1.0), f"{term_pointer}/coefficient")
            word = _parse_word(term.get("word", []), f"{term_pointer}/word")
            terms.append((coefficient, word))
        return cls(tuple(terms))


def _parse_complex(value, pointer: str) -> complex:
    if isinstance(value, bool):
        raise ConfigInvalid(pointer, "expected a number or a [re, im] pair")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(value[0], value[1])
    raise ConfigInvalid(pointer, "expected a number or a [re, im] pair")


def _parse_word(value: Iterable, pointer: str) -> Word:
    if not isinstance(value, list):
        raise ConfigInvalid(pointer, "word must be a list of [mode, 'create'|'annihilate'] pairs")
    factors = []
    for i, factor in enumerate(value):
        if (not isinstance(factor, list) or len(factor) != 2 or not isinstance(factor[0], int)
                or isinstance(factor[0], bool) or factor[0] < 1):
            raise ConfigInvalid(f"{pointer}/{i}", "factor must be [mode >= 1, 'create'|'annihilate']")
        if factor[1] not in (Ladder.CREATE.value, Ladder.ANNIHILATE.value):
            raise ConfigInvalid(f"{pointer}/{i}/1", "ladder flag must be 'create' or 'annihilate'")
        factors.append((factor[0], Ladder(factor[1])))
    return tuple(factors)
