import numpy as np
import pytest

from src.boson_entanglement.classes.density_matrix import NumberMixture, SectorDensityMatrix, convex_combination
from src.boson_entanglement.classes.fock_state import Bipartition
from src.boson_entanglement.entanglement import (Verdict, is_ppt, negativity, negativity_formula, negativity_mixture,
                                                 negativity_oracle, partial_transpose, separability_verdict)
from src.boson_entanglement.states import example_state, random_non_block_diagonal_state, random_sector_state
from src.utils.exceptions import ConstraintViolation
from tests.conftest import superposition


@pytest.mark.parametrize('p', [0.0, 0.4, 0.5, 0.8, 1.0])
def test_example_negativity(p, example_bip):
    expected = max(p - 0.5, 0.0)
    rho = example_state(p)
    assert negativity(rho, example_bip) == pytest.approx(expected, abs=1e-12)
    assert negativity(rho, example_bip, "oracle") == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize('N, M, m', [(2, 4, 2), (3, 3, 1), (2, 3, 2), (4, 2, 1)])
def test_formula_agrees_with_oracle_on_random_states(N, M, m, rng):
    bip = Bipartition(m, M)
    for _ in range(3):
        rho = random_sector_state(N, M, rng)
        assert negativity_formula(rho, bip).value == pytest.approx(negativity_oracle(rho, bip).value, abs=1e-10)
        pure = random_non_block_diagonal_state(N, M, bip, rng)
        assert negativity(pure, bip) == pytest.approx(negativity(pure, bip, "oracle"), abs=1e-10)


@pytest.mark.parametrize('N, M, m', [(N, M, m) for N in (1, 2, 3) for M in (2, 3, 4) for m in range(1, M)])
def test_formula_agrees_with_oracle_on_every_small_bipartition(N, M, m, rng):
    bip = Bipartition(m, M)
    for rank in (None, 1):
        for _ in range(6):
            rho = random_sector_state(N, M, rng, rank=rank)
            assert negativity(rho, bip) == pytest.approx(negativity(rho, bip, "oracle"), abs=1e-10)


@pytest.mark.parametrize('N, M, m', [(2, 4, 2), (3, 3, 1), (2, 2, 1)])
def test_negativity_is_convex(N, M, m, rng):
    bip = Bipartition(m, M)
    for _ in range(10):
        states = [random_non_block_diagonal_state(N, M, bip, rng), random_sector_state(N, M, rng, rank=1),
                  random_sector_state(N, M, rng)]
        weights = rng.dirichlet(np.ones(len(states)))
        mixed = negativity(convex_combination(states, weights), bip)
        assert mixed <= sum(w * negativity(rho, bip) for w, rho in zip(weights, states)) + 1e-10


def test_superposition_of_two_blocks_is_maximally_entangled(example_bip):
    rho = superposition(2, 4, (1, 1, 0, 0), (0, 1, 0, 1))
    report = negativity_formula(rho, example_bip)
    assert report.value == pytest.approx(0.5)
    assert sum(report.per_block.values()) == pytest.approx(2 * report.value + 1)


def test_two_mode_noon_state(two_mode_bip):
    rho = superposition(2, 2, (2, 0), (0, 2))
    assert negativity(rho, two_mode_bip) == pytest.approx(0.5)


def test_partial_transpose_is_hermitian_with_unit_trace(rng, example_bip):
    transposed, labels = partial_transpose(random_sector_state(2, 4, rng), example_bip)
    assert transposed.shape == (len(labels), len(labels))
    np.testing.assert_allclose(transposed, transposed.conj().T, atol=1e-14)
    assert np.trace(transposed).real == pytest.approx(1.0)


def test_mixture_negativity_weights_the_sectors(example_bip):
    vacuum = SectorDensityMatrix(0, 4, np.ones((1, 1)))
    mixture = NumberMixture(((0.4, vacuum), (0.6, example_state(0.9))))
    assert negativity_mixture(mixture, example_bip) == pytest.approx(0.6 * 0.4)


@pytest.mark.parametrize('p, verdict', [(0.3, Verdict.SEPARABLE), (0.5, Verdict.SEPARABLE), (0.8, Verdict.ENTANGLED)])
def test_separability_verdict(p, verdict, example_bip):
    assert separability_verdict(example_state(p), example_bip) is verdict


def test_non_block_diagonal_states_are_entangled(rng, example_bip):
    rho = random_non_block_diagonal_state(2, 4, example_bip, rng)
    assert separability_verdict(rho, example_bip) is Verdict.ENTANGLED
    assert not is_ppt(rho, example_bip)


def test_unknown_method(example_bip):
    with pytest.raises(ConstraintViolation):
        negativity(example_state(0.5), example_bip, "logarithmic")
