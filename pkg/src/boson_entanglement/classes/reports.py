from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from src.utils.constants import BOUND_MARGIN_TOL


@dataclass(frozen=True)
class NegativityReport:
    """
    Attributes:
        value (float): Negativity, non-negative.
        per_block (dict): (k, l) -> Tr sqrt(R_{k,l}); empty for the oracle.
        method (str): 'formula' or 'oracle'.
    """
    value: float
    per_block: Dict[Tuple[int, int], float] = field(default_factory=dict)
    method: str = "formula"


@dataclass(frozen=True, eq=False)
class BoundTrace:
    """
    Negativity of the full flow against a damped hamiltonian-only flow.

    Attributes:
        check (str): 'loss' or 'dephasing'.
        times (np.ndarray): Time grid.
        lhs (np.ndarray): Negativity of the full evolution.
        rhs (np.ndarray): exp(-t rate) times the hamiltonian-only negativity.
        rate (float): eta for losses, N^2 sum_j lambda_j / 2 for dephasing.
        applicable (bool): False for block-diagonal initial states, which the bound does not cover.
    """
    check: str
    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    rate: float
    applicable: bool = True

    @property
    def margin(self) -> float:
        return float(np.min(self.lhs - self.rhs))

    @property
    def holds(self) -> bool:
        return self.margin >= -BOUND_MARGIN_TOL

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'check': self.check,
            't': self.times,
            'lhs': self.lhs,
            'rhs': self.rhs,
            'margin': self.lhs - self.rhs,
        })


@dataclass(frozen=True, eq=False)
class PropositionCheck:
    times: np.ndarray
    negativities: np.ndarray

    @property
    def minimum(self) -> float:
        return float(np.min(self.negativities))

    @property
    def holds(self) -> bool:
        return self.minimum > 1e-12


@dataclass(frozen=True)
class AsymptoticEstimate:
    """
    Truncated large-N series for the negativity.

    Attributes:
        value (float): -1/2 + leading + sum(corrections).
        leading (float): Gamma-function term in (tS)^(-1/(2 alpha)).
        corrections (tuple): Terms n = 1..n_terms.
        peak_parameter (float): t S N^(2 alpha).
        ts (float): t S.
        gate_passed (bool): Whether the validity gate held.
    """
    value: float
    leading: float
    corrections: Tuple[float, ...]
    peak_parameter: float
    ts: float
    gate_passed: bool
