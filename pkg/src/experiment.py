"""
Experiment definitions read by the command line: parsing with JSON-pointer diagnostics, the canonical
re-serialisation, and the builders that turn a parsed experiment into domain objects.
"""
import numbers
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.boson_entanglement.classes.asymptotic_spec import AsymptoticSpec, CoefficientTable
from src.boson_entanglement.classes.density_matrix import NumberMixture, SectorDensityMatrix
from src.boson_entanglement.classes.fock_state import Bipartition, FockState, OperatorSpec
from src.boson_entanglement.classes.lindblad import LindbladGenerator
from src.boson_entanglement.dynamics import (dephasing_jumps, diagonal_hamiltonian, hopping_hamiltonian,
                                             loss_jumps)
from src.boson_entanglement.fock_core import sector_dimension
from src.boson_entanglement.states import (EXAMPLE_M, EXAMPLE_N, diagonal_class_pattern, diagonal_class_state,
                                           example_state, random_non_block_diagonal_state, random_sector_state,
                                           random_separable_state, separable_pure)
from src.utils.constants import (DEFAULT_N_TERMS, HAMILTONIAN_KINDS, INITIAL_STATE_KINDS, MIXTURE_STATE_KINDS,
                                 NOISE_KINDS, RANDOM_ENSEMBLES, TASK_ALIASES, TASKS, TIME_SPACINGS, WEIGHT_TOL)
from src.utils.exceptions import BosonEntanglementError, ConfigInvalid, ConstraintViolation

MAX_SEED = 2 ** 64
LOSS_EXAMPLE_JUMP = OperatorSpec.annihilate(1) * OperatorSpec.annihilate(3)

NEEDS_SYSTEM = ("evolve", "verify", "stationary")


# --------------------------------------------------------------------------------------------------
# Field readers
# --------------------------------------------------------------------------------------------------

def _object(value: Any, pointer: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigInvalid(pointer, "expected an object")
    return value


def _require(data: dict, key: str, pointer: str) -> Any:
    _object(data, pointer)
    if key not in data:
        raise ConfigInvalid(f"{pointer}/{key}", "required field is missing")
    return data[key]


def _number(value: Any, pointer: str, minimum: Optional[float] = None, strict: bool = False,
            integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ConfigInvalid(pointer, f"expected a number, got {value!r}")
    if not np.isfinite(value):
        raise ConfigInvalid(pointer, "must be finite")
    if integer:
        if int(value) != value:
            raise ConfigInvalid(pointer, f"expected an integer, got {value!r}")
        value = int(value)
    if minimum is not None and (value < minimum or (strict and value == minimum)):
        raise ConfigInvalid(pointer, f"must be {'>' if strict else '>='} {minimum}, got {value!r}")
    return value


def _numbers(value: Any, pointer: str, length: Optional[int] = None, minimum: Optional[float] = None,
             integer: bool = False) -> tuple:
    if not isinstance(value, list):
        raise ConfigInvalid(pointer, "expected a list of numbers")
    if length is not None and len(value) != length:
        raise ConfigInvalid(pointer, f"expected {length} entries, got {len(value)}")
    return tuple(_number(v, f"{pointer}/{i}", minimum=minimum, integer=integer) for i, v in enumerate(value))


def _choice(value: Any, pointer: str, choices: Sequence[str]) -> str:
    if value not in choices:
        raise ConfigInvalid(pointer, f"expected one of {list(choices)}, got {value!r}")
    return value


def _complex(value: Any, pointer: str) -> complex:
    if isinstance(value, list):
        if len(value) != 2:
            raise ConfigInvalid(pointer, "complex entries are written [re, im]")
        return complex(_number(value[0], f"{pointer}/0"), _number(value[1], f"{pointer}/1"))
    return complex(_number(value, pointer))


def _operator(value: Any, pointer: str, M: int) -> OperatorSpec:
    try:
        operator = OperatorSpec.from_dict(_object(value, pointer), pointer)
        operator.net_change
    except ConfigInvalid:
        raise
    except BosonEntanglementError as error:
        raise ConfigInvalid(pointer, str(error)) from error
    if operator.max_mode() > M:
        raise ConfigInvalid(pointer, f"operator acts on mode {operator.max_mode()} but the system has {M} modes")
    return operator


# --------------------------------------------------------------------------------------------------
# Sections
# --------------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class SystemConfig:
    """
    Attributes:
        M (int): Mode count.
        m (int): Modes on side A.
        N (int or None): Fixed particle number.
        mixture (tuple or None): (N, weight) pairs of a number mixture.
    """
    M: int
    m: int
    N: Optional[int] = None
    mixture: Optional[Tuple[Tuple[int, float], ...]] = None

    @property
    def particle_numbers(self) -> Tuple[int, ...]:
        return (self.N,) if self.N is not None else tuple(N for N, _ in self.mixture)

    @property
    def bipartition(self) -> Bipartition:
        return Bipartition(self.m, self.M)

    def to_dict(self) -> dict:
        data = {"M": self.M, "m": self.m}
        if self.N is not None:
            data["N"] = self.N
        else:
            data["mixture"] = {str(N): w for N, w in self.mixture}
        return data


def parse_system(data: Any, pointer: str = "/system") -> SystemConfig:
    data = _object(data, pointer)
    M = _number(_require(data, "M", pointer), f"{pointer}/M", minimum=2, integer=True)
    m = _number(_require(data, "m", pointer), f"{pointer}/m", minimum=1, integer=True)
    if m >= M:
        raise ConfigInvalid(f"{pointer}/m", f"need m < M, got m={m}, M={M}")
    if ("N" in data) == ("mixture" in data):
        raise ConfigInvalid(pointer, "give exactly one of 'N' and 'mixture'")
    if "N" in data:
        return SystemConfig(M=M, m=m, N=_number(data["N"], f"{pointer}/N", minimum=0, integer=True))
    weights = _object(data["mixture"], f"{pointer}/mixture")
    mixture = []
    for key, weight in weights.items():
        if not key.isdigit():
            raise ConfigInvalid(f"{pointer}/mixture/{key}", "mixture keys are particle numbers")
        mixture.append((int(key), _number(weight, f"{pointer}/mixture/{key}", minimum=0)))
    if not mixture:
        raise ConfigInvalid(f"{pointer}/mixture", "mixture needs at least one sector")
    if abs(sum(w for _, w in mixture) - 1.0) > WEIGHT_TOL:
        raise ConfigInvalid(f"{pointer}/mixture", "mixture weights must sum to 1")
    return SystemConfig(M=M, m=m, mixture=tuple(sorted(mixture)))


@dataclass(frozen=True)
class HamiltonianConfig:
    kind: str = "none"
    energies: Optional[Tuple[float, ...]] = None
    amplitudes: Optional[Tuple[float, ...]] = None
    operator: Optional[OperatorSpec] = None

    def build(self) -> OperatorSpec:
        if self.kind == "diagonal":
            return diagonal_hamiltonian(self.energies)
        if self.kind == "hopping":
            return hopping_hamiltonian(self.amplitudes, self.energies)
        if self.kind == "explicit":
            return self.operator
        return OperatorSpec.zero()

    def to_dict(self) -> dict:
        data: Dict[str, Any] = {"kind": self.kind}
        if self.energies is not None:
            data["energies"] = list(self.energies)
        if self.amplitudes is not None:
            data["amplitudes"] = list(self.amplitudes)
        if self.operator is not None:
            data["operator"] = self.operator.to_dict()
        return data


def parse_hamiltonian(data: Any, M: int, pointer: str = "/hamiltonian") -> HamiltonianConfig:
    if data is None:
        return HamiltonianConfig()
    data = _object(data, pointer)
    kind = _choice(data.get("kind", "none"), f"{pointer}/kind", HAMILTONIAN_KINDS)
    if kind == "diagonal":
        return HamiltonianConfig(kind, energies=_numbers(_require(data, "energies", pointer), f"{pointer}/energies",
                                                         length=M))
    if kind == "hopping":
        energies = data.get("energies")
        return HamiltonianConfig(
            kind,
            energies=None if energies is None else _numbers(energies, f"{pointer}/energies", length=M),
            amplitudes=_numbers(_require(data, "amplitudes", pointer), f"{pointer}/amplitudes", length=M - 1))
    if kind == "explicit":
        operator = _operator(_require(data, "operator", pointer), f"{pointer}/operator", M)
        if operator.net_change != 0:
            raise ConfigInvalid(f"{pointer}/operator", "the Hamiltonian must conserve the particle number")
        return HamiltonianConfig(kind, operator=operator)
    return HamiltonianConfig()


@dataclass(frozen=True)
class NoiseConfig:
    """
    Attributes:
        kind (str): 'dephasing', 'loss' or 'custom'.
        rates (tuple): One rate per mode, or the single rate of a custom jump.
        operator (OperatorSpec or None): Jump operator of a custom channel.
    """
    kind: str
    rates: Tuple[float, ...]
    operator: Optional[OperatorSpec] = None

    def jumps(self) -> Tuple[Tuple[float, OperatorSpec], ...]:
        if self.kind == "dephasing":
            return dephasing_jumps(self.rates)
        if self.kind == "loss":
            return loss_jumps(self.rates)
        return ((self.rates[0], self.operator),)

    def to_dict(self) -> dict:
        if self.kind == "custom":
            return {"kind": self.kind, "rate": self.rates[0], "operator": self.operator.to_dict()}
        return {"kind": self.kind, "rates": list(self.rates)}


def parse_noise(data: Any, M: int, pointer: str = "/noise") -> Tuple[NoiseConfig, ...]:
    if data is None:
        return ()
    if not isinstance(data, list):
        raise ConfigInvalid(pointer, "expected a list of noise channels")
    channels = []
    for i, entry in enumerate(data):
        entry_pointer = f"{pointer}/{i}"
        entry = _object(entry, entry_pointer)
        kind = _choice(_require(entry, "kind", entry_pointer), f"{entry_pointer}/kind", NOISE_KINDS)
        if kind == "custom":
            rate = _number(_require(entry, "rate", entry_pointer), f"{entry_pointer}/rate", minimum=0)
            operator = _operator(_require(entry, "operator", entry_pointer), f"{entry_pointer}/operator", M)
            if operator.net_change > 0:
                raise ConfigInvalid(f"{entry_pointer}/operator", "jump operators may not add particles")
            channels.append(NoiseConfig(kind, (rate,), operator))
        else:
            rates = _numbers(_require(entry, "rates", entry_pointer), f"{entry_pointer}/rates", length=M, minimum=0)
            channels.append(NoiseConfig(kind, rates))
    return tuple(channels)


@dataclass(frozen=True)
class InitialStateConfig:
    """
    Attributes:
        kind (str): One of INITIAL_STATE_KINDS.
        params (dict): Validated, JSON-serialisable parameters of the kind.
    """
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)

    def build_sector(self, N: int, system: SystemConfig, rng: np.random.Generator) -> SectorDensityMatrix:
        M, bip, params = system.M, system.bipartition, self.params
        if self.kind == "example":
            return example_state(params["p"])
        if self.kind == "diagonal_class":
            if params.get("table", "flat") == "flat":
                table = CoefficientTable.flat_two_mode(N)
            else:
                table = CoefficientTable.from_entries(params["entries"])
            alpha, c = params.get("alpha", 1.0), tuple(params.get("c", [1.0] * M))
            try:
                diagonal_class_pattern(N, bip, table, alpha, c)
            except ConstraintViolation as error:
                raise ConfigInvalid("/initial_state/c", str(error)) from error
            return diagonal_class_state(N, M, bip, table, alpha, c)
        if self.kind == "separable_pure":
            rho = separable_pure(OperatorSpec.from_dict(params["poly_a"]), OperatorSpec.from_dict(params["poly_b"]), bip)
            if rho.N != N:
                raise ConfigInvalid("/initial_state", f"the polynomials create {rho.N} particles, the system has {N}")
            return rho
        if self.kind == "explicit":
            if "vector" in params:
                return SectorDensityMatrix.from_pure(N, M, np.array([complex(*v) for v in params["vector"]]))
            matrix = np.array([[complex(*v) for v in row] for row in params["matrix"]])
            return SectorDensityMatrix(N, M, matrix)
        if self.kind == "fock":
            return SectorDensityMatrix.from_fock(FockState(tuple(params["occupations"])))
        if self.kind == "random":
            ensemble = params.get("ensemble", "ginibre")
            if ensemble == "separable":
                return random_separable_state(N, M, bip, rng, n_terms=params.get("n_terms", 3))
            if ensemble == "non_block_diagonal":
                return random_non_block_diagonal_state(N, M, bip, rng)
            return random_sector_state(N, M, rng, rank=params.get("rank"))
        return SectorDensityMatrix.maximally_mixed(N, M)

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}


def _complex_pairs(value: Any, pointer: str) -> List[List[float]]:
    if not isinstance(value, list):
        raise ConfigInvalid(pointer, "expected a list")
    pairs = []
    for i, entry in enumerate(value):
        z = _complex(entry, f"{pointer}/{i}")
        pairs.append([z.real, z.imag])
    return pairs


def _coefficient_rows(value: Any, pointer: str, N: int, bip: Optional[Bipartition] = None) -> List[list]:
    """
    Rows [k, l, sigma, sigma', re, im] of a coefficient table. Labels must fit the N-particle sector,
    for the row (k, sigma, sigma') and its partner (l, sigma, sigma') when a bipartition is given.
    """
    if not isinstance(value, list) or not value:
        raise ConfigInvalid(pointer, "expected a non-empty list of [k, l, sigma, sigma', re, im] rows")
    rows = []
    for i, row in enumerate(value):
        row_pointer = f"{pointer}/{i}"
        if not isinstance(row, list) or len(row) not in (5, 6):
            raise ConfigInvalid(row_pointer, "rows are [k, l, sigma, sigma', re, im]")
        labels = [_number(v, f"{row_pointer}/{j}", minimum=0, integer=True) for j, v in enumerate(row[:4])]
        for j in (0, 1):
            if labels[j] > N:
                raise ConfigInvalid(f"{row_pointer}/{j}", f"local number {labels[j]} exceeds N={N}")
            if bip is not None and (labels[2] >= sector_dimension(labels[j], bip.m)
                                    or labels[3] >= sector_dimension(N - labels[j], bip.M - bip.m)):
                raise ConfigInvalid(row_pointer, f"no separable label ({labels[j]}, {labels[2]}, {labels[3]})")
        rows.append(labels + [_number(v, f"{row_pointer}/{j + 4}") for j, v in enumerate(row[4:])])
    return rows


def parse_initial_state(data: Any, system: SystemConfig, pointer: str = "/initial_state") -> InitialStateConfig:
    data = _object(data, pointer)
    kind = _choice(_require(data, "kind", pointer), f"{pointer}/kind", INITIAL_STATE_KINDS)
    if system.N is None and kind not in MIXTURE_STATE_KINDS:
        raise ConfigInvalid(f"{pointer}/kind", f"number mixtures support {list(MIXTURE_STATE_KINDS)} only")
    M, params = system.M, {}
    if kind == "example":
        if (system.N, M) != (EXAMPLE_N, EXAMPLE_M):
            raise ConfigInvalid(f"{pointer}/kind", f"the worked example lives on N={EXAMPLE_N}, M={EXAMPLE_M}")
        p = _number(_require(data, "p", pointer), f"{pointer}/p", minimum=0)
        if p > 1:
            raise ConfigInvalid(f"{pointer}/p", f"probability must lie in [0, 1], got {p}")
        params["p"] = p
    elif kind == "diagonal_class":
        params["alpha"] = _number(data.get("alpha", 1.0), f"{pointer}/alpha", minimum=0, strict=True)
        params["c"] = list(_numbers(data.get("c", [1.0] * M), f"{pointer}/c", length=M, minimum=0))
        if M == 2 and params["alpha"] != 1:
            raise ConfigInvalid(f"{pointer}/alpha", "two-mode states force alpha = 1")
        if M == 2 and params["c"] != [1, 1]:
            raise ConfigInvalid(f"{pointer}/c", "two-mode states force c = [1, 1]")
        if "entries" in data:
            params["table"] = "entries"
            params["entries"] = _coefficient_rows(data["entries"], f"{pointer}/entries", system.N,
                                                  system.bipartition)
        else:
            if M != 2:
                raise ConfigInvalid(f"{pointer}/entries", "the flat table exists for two modes only")
            params["table"] = "flat"
    elif kind == "separable_pure":
        for key in ("poly_a", "poly_b"):
            params[key] = _operator(_require(data, key, pointer), f"{pointer}/{key}", M).to_dict()
    elif kind == "explicit":
        dim = sector_dimension(system.N, M)
        if "vector" in data:
            vector = _complex_pairs(data["vector"], f"{pointer}/vector")
            if len(vector) != dim:
                raise ConfigInvalid(f"{pointer}/vector", f"expected {dim} amplitudes, got {len(vector)}")
            params["vector"] = vector
        else:
            rows = _require(data, "matrix", pointer)
            if not isinstance(rows, list) or len(rows) != dim:
                raise ConfigInvalid(f"{pointer}/matrix", f"expected {dim} rows")
            matrix = [_complex_pairs(row, f"{pointer}/matrix/{i}") for i, row in enumerate(rows)]
            if any(len(row) != dim for row in matrix):
                raise ConfigInvalid(f"{pointer}/matrix", f"expected a {dim}x{dim} matrix")
            params["matrix"] = matrix
    elif kind == "fock":
        occupations = _numbers(_require(data, "occupations", pointer), f"{pointer}/occupations",
                               length=M, minimum=0, integer=True)
        if sum(occupations) != system.N:
            raise ConfigInvalid(f"{pointer}/occupations", f"occupations sum to {sum(occupations)}, N={system.N}")
        params["occupations"] = list(occupations)
    elif kind == "random":
        params["ensemble"] = _choice(data.get("ensemble", "ginibre"), f"{pointer}/ensemble", RANDOM_ENSEMBLES)
        if data.get("rank") is not None:
            params["rank"] = _number(data["rank"], f"{pointer}/rank", minimum=1, integer=True)
        if "n_terms" in data:
            params["n_terms"] = _number(data["n_terms"], f"{pointer}/n_terms", minimum=1, integer=True)
    return InitialStateConfig(kind, params)


@dataclass(frozen=True)
class TimeGrid:
    start: float = 0.0
    stop: float = 10.0
    points: int = 50
    spacing: str = "linear"

    def times(self) -> np.ndarray:
        if self.points == 1:
            return np.array([float(self.start)])
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)

    def to_dict(self) -> dict:
        return {"start": self.start, "stop": self.stop, "points": self.points, "spacing": self.spacing}


def parse_time_grid(data: Any, pointer: str = "/time_grid") -> TimeGrid:
    if data is None:
        return TimeGrid()
    data = _object(data, pointer)
    start = _number(data.get("start", 0.0), f"{pointer}/start", minimum=0)
    stop = _number(data.get("stop", 10.0), f"{pointer}/stop", minimum=0)
    points = _number(data.get("points", 50), f"{pointer}/points", minimum=1, integer=True)
    spacing = _choice(data.get("spacing", "linear"), f"{pointer}/spacing", TIME_SPACINGS)
    if points > 1 and stop <= start:
        raise ConfigInvalid(f"{pointer}/stop", "the time grid must be strictly increasing")
    if spacing == "log" and start <= 0:
        raise ConfigInvalid(f"{pointer}/start", "a log-spaced grid needs start > 0")
    return TimeGrid(float(start), float(stop), points, spacing)


@dataclass(frozen=True)
class ThresholdCase:
    example: str
    p: float
    rates: Tuple[float, ...]

    def to_dict(self) -> dict:
        return {"example": self.example, "p": self.p, "rates": list(self.rates)}


@dataclass(frozen=True)
class ThresholdConfig:
    cases: Tuple[ThresholdCase, ...]
    energies: Tuple[float, ...] = (0.0,) * EXAMPLE_M

    def to_dict(self) -> dict:
        return {"cases": [case.to_dict() for case in self.cases], "energies": list(self.energies)}


def parse_threshold(data: Any, pointer: str = "/threshold") -> ThresholdConfig:
    data = _object(data, pointer)
    cases = _require(data, "cases", pointer)
    if not isinstance(cases, list) or not cases:
        raise ConfigInvalid(f"{pointer}/cases", "expected a non-empty list")
    parsed = []
    for i, case in enumerate(cases):
        case_pointer = f"{pointer}/cases/{i}"
        case = _object(case, case_pointer)
        example = _choice(_require(case, "example", case_pointer), f"{case_pointer}/example", ("loss", "dephasing"))
        p = _number(_require(case, "p", case_pointer), f"{case_pointer}/p", minimum=0)
        if p > 1:
            raise ConfigInvalid(f"{case_pointer}/p", f"probability must lie in [0, 1], got {p}")
        length = 1 if example == "loss" else EXAMPLE_M
        rates = _numbers(_require(case, "rates", case_pointer), f"{case_pointer}/rates", length=length, minimum=0)
        parsed.append(ThresholdCase(example, p, rates))
    energies = _numbers(data.get("energies", [0.0] * EXAMPLE_M), f"{pointer}/energies", length=EXAMPLE_M)
    return ThresholdConfig(tuple(parsed), energies)


@dataclass(frozen=True)
class LargeNConfig:
    """
    Attributes:
        N (tuple): Particle numbers of the family.
        m (int): Modes on side A.
        alpha (float): Occupation-difference exponent.
        c (tuple): Per-mode coefficients c_j.
        rates (tuple): Dephasing rates.
        entries (list or None): Explicit coefficient rows; None selects the flat two-mode table.
        n_terms (int): Series truncation.
    """
    N: Tuple[int, ...]
    m: int = 1
    alpha: float = 1.0
    c: Tuple[float, ...] = (1.0, 1.0)
    rates: Tuple[float, ...] = (0.5, 0.5)
    entries: Optional[List[list]] = None
    n_terms: int = DEFAULT_N_TERMS

    def specs(self) -> List[AsymptoticSpec]:
        if self.entries is None:
            return [AsymptoticSpec.flat_two_mode(N, self.rates, self.n_terms) for N in self.N]
        table = CoefficientTable.from_entries(self.entries)
        return [AsymptoticSpec(N=N, m=self.m, alpha=self.alpha, c=self.c, rates=self.rates, table=table,
                               n_terms=self.n_terms) for N in self.N]

    def to_dict(self) -> dict:
        data = {"N": list(self.N), "m": self.m, "alpha": self.alpha, "c": list(self.c), "rates": list(self.rates),
                "n_terms": self.n_terms}
        if self.entries is not None:
            data["entries"] = self.entries
        return data


def parse_large_n(data: Any, pointer: str = "/large_n") -> LargeNConfig:
    data = _object(data, pointer)
    family = _numbers(_require(data, "N", pointer), f"{pointer}/N", minimum=1, integer=True)
    if not family:
        raise ConfigInvalid(f"{pointer}/N", "expected at least one particle number")
    rates = _numbers(data.get("rates", [0.5, 0.5]), f"{pointer}/rates", minimum=0)
    c = _numbers(data.get("c", [1.0] * len(rates)), f"{pointer}/c", length=len(rates), minimum=0)
    entries = None
    if "entries" in data:
        if len(family) != 1:
            raise ConfigInvalid(f"{pointer}/entries", "explicit coefficient rows fix a single N")
        entries = _coefficient_rows(data["entries"], f"{pointer}/entries", family[0])
    elif len(rates) != 2:
        raise ConfigInvalid(f"{pointer}/rates", "the flat table is a two-mode family; give two rates")
    return LargeNConfig(
        N=family,
        m=_number(data.get("m", 1), f"{pointer}/m", minimum=1, integer=True),
        alpha=_number(data.get("alpha", 1.0), f"{pointer}/alpha", minimum=0, strict=True),
        c=c, rates=rates, entries=entries,
        n_terms=_number(data.get("n_terms", DEFAULT_N_TERMS), f"{pointer}/n_terms", minimum=0, integer=True))


@dataclass(frozen=True)
class OutputConfig:
    path: str
    format: str = "csv"

    def to_dict(self) -> dict:
        return {"path": self.path, "format": self.format}


def parse_output(data: Any, default_path: str, pointer: str = "/output") -> OutputConfig:
    if data is None:
        return OutputConfig(default_path)
    data = _object(data, pointer)
    path = data.get("path", default_path)
    if not isinstance(path, str) or not path or path.startswith("/") or ".." in path.split("/"):
        raise ConfigInvalid(f"{pointer}/path", "expected a relative path inside the output directory")
    return OutputConfig(path, _choice(data.get("format", "csv"), f"{pointer}/format", ("csv",)))


# --------------------------------------------------------------------------------------------------
# Experiment
# --------------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """
    A parsed, validated experiment.

    Attributes:
        name (str): Experiment name.
        task (str): One of TASKS.
        seed (int): 64-bit seed of every random draw.
        output (OutputConfig): Output subdirectory.
        time_grid (TimeGrid): Evaluation times.
        system (SystemConfig or None): Modes, bipartition and particle numbers.
        hamiltonian (HamiltonianConfig): Hamiltonian.
        noise (tuple): Noise channels.
        initial_state (InitialStateConfig or None): Initial state.
        threshold (ThresholdConfig or None): Worked-example threshold cases.
        large_n (LargeNConfig or None): Large-N family.
    """
    name: str
    task: str
    seed: int
    output: OutputConfig
    time_grid: TimeGrid = field(default_factory=TimeGrid)
    system: Optional[SystemConfig] = None
    hamiltonian: HamiltonianConfig = field(default_factory=HamiltonianConfig)
    noise: Tuple[NoiseConfig, ...] = ()
    initial_state: Optional[InitialStateConfig] = None
    threshold: Optional[ThresholdConfig] = None
    large_n: Optional[LargeNConfig] = None

    @property
    def times(self) -> np.ndarray:
        return self.time_grid.times()

    @property
    def bipartition(self) -> Bipartition:
        return self.system.bipartition

    def generator(self) -> LindbladGenerator:
        jumps = tuple(jump for channel in self.noise for jump in channel.jumps())
        return LindbladGenerator(hamiltonian=self.hamiltonian.build(), jumps=jumps)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def initial_mixture(self, rng: Optional[np.random.Generator] = None) -> NumberMixture:
        rng = self.rng() if rng is None else rng
        if self.system.N is not None:
            return NumberMixture.from_state(self.initial_state.build_sector(self.system.N, self.system, rng))
        return NumberMixture(tuple(
            (weight, self.initial_state.build_sector(N, self.system, rng))
            for N, weight in self.system.mixture if weight > 0
        ))

    def worked_example(self) -> Optional[Tuple[str, Tuple[float, ...], Tuple[float, ...]]]:
        """(example, rates, energies) when the experiment is one of the two worked examples."""
        if self.initial_state is None or self.initial_state.kind != "example" or len(self.noise) != 1:
            return None
        if self.hamiltonian.kind not in ("none", "diagonal"):
            return None
        energies = self.hamiltonian.energies or (0.0,) * EXAMPLE_M
        channel = self.noise[0]
        if channel.kind == "dephasing":
            return "dephasing", channel.rates, energies
        if channel.kind == "custom" and channel.operator.simplified().terms == LOSS_EXAMPLE_JUMP.terms:
            return "loss", channel.rates, energies
        return None

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return parse_experiment({**self.to_dict(), "seed": seed})

    def to_dict(self) -> dict:
        data: Dict[str, Any] = {
            "name": self.name,
            "task": self.task,
            "seed": self.seed,
            "output": self.output.to_dict(),
            "time_grid": self.time_grid.to_dict(),
            "hamiltonian": self.hamiltonian.to_dict(),
            "noise": [channel.to_dict() for channel in self.noise],
        }
        if self.system is not None:
            data["system"] = self.system.to_dict()
        if self.initial_state is not None:
            data["initial_state"] = self.initial_state.to_dict()
        if self.threshold is not None:
            data["threshold"] = self.threshold.to_dict()
        if self.large_n is not None:
            data["large_n"] = self.large_n.to_dict()
        return data


def normalize_task(task: Any, pointer: str = "/task") -> str:
    task = TASK_ALIASES.get(task, task)
    return _choice(task, pointer, TASKS)


def parse_experiment(data: Any, task: Optional[str] = None, default_output: str = "experiment") -> ExperimentConfig:
    """
    Validate an experiment dictionary.

    Args:
        data: Parsed JSON.
        task: Task chosen on the command line; overrides the file's 'task'.
        default_output: Output subdirectory when the file has no output.path.

    Raises:
        ConfigInvalid: With the JSON pointer of the first offending field.
    """
    data = _object(data, "")
    task = normalize_task(task) if task is not None else normalize_task(_require(data, "task", ""))
    name = data.get("name", default_output)
    if not isinstance(name, str):
        raise ConfigInvalid("/name", "expected a string")
    seed = _number(data.get("seed", 0), "/seed", minimum=0, integer=True)
    if seed >= MAX_SEED:
        raise ConfigInvalid("/seed", "seed must fit in 64 bits")

    system = parse_system(data["system"]) if "system" in data else None
    if task in NEEDS_SYSTEM and system is None:
        raise ConfigInvalid("/system", f"required for task '{task}'")
    M = system.M if system is not None else 0
    experiment = ExperimentConfig(
        name=name,
        task=task,
        seed=seed,
        output=parse_output(data.get("output"), name),
        time_grid=parse_time_grid(data.get("time_grid")),
        system=system,
        hamiltonian=parse_hamiltonian(data.get("hamiltonian"), M) if system is not None else HamiltonianConfig(),
        noise=parse_noise(data.get("noise"), M) if system is not None else (),
        initial_state=(parse_initial_state(_require(data, "initial_state", ""), system)
                       if task in NEEDS_SYSTEM else None),
        threshold=parse_threshold(_require(data, "threshold", "")) if task == "threshold" else None,
        large_n=parse_large_n(_require(data, "large_n", "")) if task == "large-n" else None,
    )
    _check_buildable(experiment)
    return experiment


def _check_buildable(experiment: ExperimentConfig):
    """Build every domain object once so inconsistent definitions surface as configuration errors."""
    steps = []
    if experiment.system is not None:
        steps.append(("/hamiltonian", experiment.generator))
    if experiment.initial_state is not None:
        steps.append(("/initial_state", experiment.initial_mixture))
    if experiment.large_n is not None:
        steps.append(("/large_n", experiment.large_n.specs))
    for pointer, build in steps:
        try:
            build()
        except ConfigInvalid:
            raise
        except BosonEntanglementError as error:
            raise ConfigInvalid(pointer, str(error)) from error
        except (KeyError, TypeError, ValueError) as error:
            raise ConfigInvalid(pointer, str(error)) from error
