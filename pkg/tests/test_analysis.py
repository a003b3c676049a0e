import numpy as np
import pytest

from src.boson_entanglement.analysis import (check_decoherence_equality, check_dephasing_bound, check_loss_bound,
                                             check_proposition, decay_regime_scan, dephasing_rate,
                                             example_negativity, first_separable_time, largen_asymptotic,
                                             largen_exact, loss_rate, proposition_inputs, select_bound,
                                             threshold_time)
from src.boson_entanglement.classes.asymptotic_spec import AsymptoticSpec, CoefficientTable
from src.boson_entanglement.classes.density_matrix import NumberMixture, SectorDensityMatrix
from src.boson_entanglement.classes.fock_state import Bipartition, OperatorSpec
from src.boson_entanglement.classes.lindblad import LindbladGenerator
from src.boson_entanglement.dynamics import (build_liouvillian, dephasing_jumps, diagonal_hamiltonian, evolve_exact,
                                             hopping_hamiltonian, loss_jumps)
from src.boson_entanglement.entanglement import negativity_mixture
from src.boson_entanglement.states import (diagonal_class_state, example_state, random_non_block_diagonal_state,
                                           random_sector_state)
from src.utils.exceptions import ConstraintViolation, PreconditionViolated, ValidityGateFailed
from tests.conftest import EXAMPLE_ENERGIES, superposition

TIMES = np.linspace(0.0, 5.0, 26)


@pytest.fixture
def entangled_pair():
    """(|2,0> + |1,1>)/sqrt(2): a superposition of two local particle numbers."""
    return superposition(2, 2, (2, 0), (1, 1))


# Thresholds

@pytest.mark.parametrize('example, p, rates, expected', [
    ("loss", 0.7, [0.5], 3.3890),
    ("dephasing", 0.8, [0.3, 0.3, 0.3, 0.3], 2.3105),
    ("dephasing", 0.95, [0.1, 0.2, 0.3, 0.4], 2 * np.log(19)),
])
def test_threshold_time(example, p, rates, expected):
    assert threshold_time(example, p, rates) == pytest.approx(expected, abs=1e-4)


def test_threshold_edge_cases():
    assert threshold_time("loss", 0.5, [0.5]) is None
    assert threshold_time("dephasing", 0.2, [0.1] * 4) is None
    assert threshold_time("loss", 1.0, [0.5]) == float('inf')
    assert threshold_time("dephasing", 0.8, [0.0] * 4) == float('inf')
    with pytest.raises(ConstraintViolation):
        threshold_time("hopping", 0.8, [0.1])


@pytest.mark.parametrize('p', [0.6, 0.8, 0.95])
@pytest.mark.parametrize('example, rates', [
    ("loss", [0.5]),
    ("dephasing", [0.3, 0.3, 0.3, 0.3]),
    ("dephasing", [0.1, 0.2, 0.3, 0.4]),
])
def test_examples_disentangle_at_the_threshold(example, p, rates):
    t_star = threshold_time(example, p, rates)
    assert example_negativity(example, p, rates, EXAMPLE_ENERGIES, 0.9 * t_star) > 1e-6
    assert example_negativity(example, p, rates, EXAMPLE_ENERGIES, 1.01 * t_star) < 1e-10
    assert example_negativity(example, p, rates, EXAMPLE_ENERGIES, 0.0, method="formula") == pytest.approx(p - 0.5)


def test_first_separable_time_on_the_grid():
    gen = LindbladGenerator(diagonal_hamiltonian(EXAMPLE_ENERGIES), dephasing_jumps([0.1, 0.2, 0.3, 0.4]))
    L = build_liouvillian(gen, 2, 4, sectors=[2])
    times = np.linspace(0.0, 5.0, 51)
    assert first_separable_time(L, NumberMixture.from_state(example_state(0.8)), times, Bipartition(2, 4)) == \
        pytest.approx(2.8)


# Bounds

def test_rates():
    assert loss_rate(LindbladGenerator(jumps=loss_jumps([0.3, 0.5])), 2, 2) == pytest.approx(1.0)
    assert dephasing_rate(LindbladGenerator(jumps=dephasing_jumps([0.3, 0.5])), 2) == pytest.approx(1.6)


def test_loss_bound_holds(entangled_pair, two_mode_bip):
    gen = LindbladGenerator(diagonal_hamiltonian([1.0, 0.4]), loss_jumps([0.3, 0.5]))
    trace = check_loss_bound(gen, entangled_pair, TIMES, two_mode_bip, strict=True)
    assert trace.applicable
    assert trace.holds
    assert trace.rate == pytest.approx(1.0)
    assert trace.lhs[0] == pytest.approx(0.5)
    np.testing.assert_allclose(trace.rhs, 0.5 * np.exp(-TIMES), atol=1e-12)


def test_dephasing_bound_holds(entangled_pair, two_mode_bip):
    gen = LindbladGenerator(diagonal_hamiltonian([1.0, 0.4]), dephasing_jumps([0.3, 0.5]))
    trace = check_dephasing_bound(gen, entangled_pair, TIMES, two_mode_bip, strict=True, workers=2)
    assert trace.applicable
    assert trace.holds
    np.testing.assert_allclose(trace.lhs, 0.5 * np.exp(-0.4 * TIMES), atol=1e-9)
    frame = trace.to_frame()
    assert list(frame.columns) == ['check', 't', 'lhs', 'rhs', 'margin']
    assert len(frame) == len(TIMES)


@pytest.mark.parametrize('seed', range(20))
def test_bounds_hold_on_random_trajectories(seed):
    rng = np.random.default_rng(seed)
    M = 3
    bip = Bipartition(1 + seed % 2, M)
    rho = random_non_block_diagonal_state(2, M, bip, rng)
    energies = rng.uniform(-1.0, 1.0, M).tolist()
    rates = rng.uniform(0.05, 1.0, M)
    times = np.linspace(0.0, 3.0 / rates.max(), 13)
    for check, jumps in ((check_loss_bound, loss_jumps), (check_dephasing_bound, dephasing_jumps)):
        trace = check(LindbladGenerator(diagonal_hamiltonian(energies), jumps(rates.tolist())), rho, times, bip)
        assert trace.applicable
        assert trace.holds


def test_block_diagonal_states_are_not_covered(example_bip):
    gen = LindbladGenerator(diagonal_hamiltonian(EXAMPLE_ENERGIES), dephasing_jumps([0.1, 0.2, 0.3, 0.4]))
    trace = check_dephasing_bound(gen, example_state(0.8), TIMES, example_bip)
    assert not trace.applicable


def test_bound_preconditions(entangled_pair, two_mode_bip, example_bip):
    hopping = LindbladGenerator(hopping_hamiltonian([1.0]), dephasing_jumps([0.3, 0.5]))
    with pytest.raises(PreconditionViolated):
        check_dephasing_bound(hopping, entangled_pair, TIMES, two_mode_bip)
    with pytest.raises(PreconditionViolated):
        check_dephasing_bound(LindbladGenerator(jumps=loss_jumps([0.3, 0.5])), entangled_pair, TIMES, two_mode_bip)
    with pytest.raises(PreconditionViolated):
        check_loss_bound(LindbladGenerator(jumps=dephasing_jumps([0.3, 0.5])), entangled_pair, TIMES, two_mode_bip)
    straddling = LindbladGenerator(jumps=((0.5, OperatorSpec.annihilate(1) + OperatorSpec.annihilate(3)),))
    with pytest.raises(PreconditionViolated):
        check_loss_bound(straddling, example_state(0.8), TIMES, example_bip)
    mixture = NumberMixture(((0.5, entangled_pair), (0.5, SectorDensityMatrix.maximally_mixed(1, 2))))
    with pytest.raises(PreconditionViolated):
        check_loss_bound(LindbladGenerator(jumps=loss_jumps([0.3, 0.5])), mixture, TIMES, two_mode_bip)


def test_select_bound():
    assert select_bound(LindbladGenerator(jumps=dephasing_jumps([0.1, 0.0]))) == "dephasing"
    assert select_bound(LindbladGenerator(jumps=loss_jumps([0.1, 0.2]))) == "loss"
    assert select_bound(LindbladGenerator(jumps=loss_jumps([0.1, 0.2]) + dephasing_jumps([0.1, 0.2]))) is None
    assert select_bound(LindbladGenerator(hopping_hamiltonian([1.0]))) is None


# Decoherence equality

def test_decoherence_equality_with_fock_diagonal_hamiltonian(rng):
    gen = LindbladGenerator(diagonal_hamiltonian([0.2, 0.5, 0.9]), dephasing_jumps([0.1, 0.4, 0.7]))
    rho = random_sector_state(2, 3, rng)
    for t in (0.5, 1.5, 4.0):
        assert check_decoherence_equality(gen, rho, t) < 1e-9


def test_hopping_breaks_the_decoherence_equality(rng):
    gen = LindbladGenerator(hopping_hamiltonian([1.0, 1.0]), dephasing_jumps([0.1, 0.4, 0.7]))
    assert check_decoherence_equality(gen, random_sector_state(2, 3, rng), 1.5) > 1e-3


def test_decoherence_equality_needs_number_operators(rng):
    with pytest.raises(PreconditionViolated):
        check_decoherence_equality(LindbladGenerator(jumps=loss_jumps([0.1, 0.2])), random_sector_state(2, 2, rng), 1.0)


# Block-preserving flows

def test_proposition_on_a_dephased_superposition(entangled_pair, two_mode_bip):
    gen = LindbladGenerator(diagonal_hamiltonian([1.0, 0.4]), dephasing_jumps([0.3, 0.5]))
    rho0 = NumberMixture.from_state(entangled_pair)
    result = check_proposition(proposition_inputs(gen, rho0), rho0, TIMES, two_mode_bip)
    assert result.holds
    assert result.minimum == pytest.approx(0.5 * np.exp(-0.4 * TIMES[-1]), rel=1e-6)


def test_proposition_under_losses(entangled_pair, two_mode_bip):
    gen = LindbladGenerator(jumps=loss_jumps([0.3, 0.5]))
    rho0 = NumberMixture.from_state(entangled_pair)
    assert check_proposition(proposition_inputs(gen, rho0), rho0, TIMES, two_mode_bip).holds


def test_proposition_preconditions(entangled_pair, two_mode_bip, example_bip):
    rho0 = NumberMixture.from_state(entangled_pair)
    hopping = LindbladGenerator(hopping_hamiltonian([1.0]), dephasing_jumps([0.3, 0.5]))
    with pytest.raises(PreconditionViolated):
        check_proposition(proposition_inputs(hopping, rho0), rho0, TIMES, two_mode_bip)
    dephasing = LindbladGenerator(jumps=dephasing_jumps([0.1] * 4))
    block_diagonal = NumberMixture.from_state(example_state(0.8))
    with pytest.raises(PreconditionViolated):
        check_proposition(proposition_inputs(dephasing, block_diagonal), block_diagonal, TIMES, example_bip)


# Large N

def test_largen_exact_at_time_zero():
    assert largen_exact(AsymptoticSpec.flat_two_mode(1), np.zeros(2), 0.0) == pytest.approx(0.5)
    assert largen_exact(AsymptoticSpec.flat_two_mode(3), np.zeros(2), 0.0) == pytest.approx(1.5)


def test_largen_exact_matches_the_dephased_state(two_mode_bip):
    N, t = 4, 0.7
    rho = diagonal_class_state(N, 2, two_mode_bip, CoefficientTable.flat_two_mode(N), 1.0, (1.0, 1.0))
    gen = LindbladGenerator(diagonal_hamiltonian([0.3, 1.1]), dephasing_jumps([0.5, 0.5]))
    evolved = evolve_exact(build_liouvillian(gen, N, 2, sectors=[N]), NumberMixture.from_state(rho), t)
    spec = AsymptoticSpec.flat_two_mode(N, rates=(0.5, 0.5))
    assert largen_exact(spec, [0.3, 1.1], t) == pytest.approx(negativity_mixture(evolved, two_mode_bip), abs=1e-10)


def test_largen_exact_completes_a_half_table(two_mode_bip):
    N, t = 3, 0.4
    half = CoefficientTable.from_mapping({(k, l, 0, 0): 0.25 for k in range(N + 1) for l in range(k + 1)})
    spec = AsymptoticSpec(N=N, m=1, alpha=1.0, c=(1.0, 1.0), rates=(0.5, 0.5), table=half)
    flat = AsymptoticSpec.flat_two_mode(N, rates=(0.5, 0.5))
    assert largen_exact(spec, np.zeros(2), t) == pytest.approx(largen_exact(flat, np.zeros(2), t), abs=1e-12)
    rho = diagonal_class_state(N, 2, two_mode_bip, half, 1.0, (1.0, 1.0))
    gen = LindbladGenerator(jumps=dephasing_jumps([0.5, 0.5]))
    evolved = evolve_exact(build_liouvillian(gen, N, 2, sectors=[N]), NumberMixture.from_state(rho), t)
    assert largen_exact(spec, np.zeros(2), t) == pytest.approx(negativity_mixture(evolved, two_mode_bip), abs=1e-10)


def test_asymptotic_series_at_large_n():
    spec = AsymptoticSpec.flat_two_mode(200)
    estimate = largen_asymptotic(spec, 0.01)
    exact = largen_exact(spec, np.zeros(2), 0.01)
    assert estimate.gate_passed
    assert estimate.peak_parameter == pytest.approx(400.0)
    assert len(estimate.corrections) == spec.n_terms
    assert abs(estimate.value - exact) / exact < 0.05


def test_asymptotic_error_shrinks_with_n():
    errors = []
    for N in (50, 100, 200, 500):
        spec = AsymptoticSpec.flat_two_mode(N)
        exact = largen_exact(spec, np.zeros(2), 0.01)
        errors.append(abs(largen_asymptotic(spec, 0.01).value - exact) / exact)
    assert all(later < earlier for earlier, later in zip(errors, errors[1:]))
    assert errors[-1] < 0.02


def test_validity_gate():
    spec = AsymptoticSpec.flat_two_mode(2)
    estimate = largen_asymptotic(spec, 0.01)
    assert not estimate.gate_passed
    assert estimate.corrections == ()
    with pytest.raises(ValidityGateFailed) as error:
        largen_asymptotic(spec, 0.01, strict=True)
    assert error.value.estimate is not None
    with pytest.raises(ConstraintViolation):
        largen_asymptotic(spec, 0.0)


def test_asymptotic_spec_validation():
    with pytest.raises(ConstraintViolation):
        AsymptoticSpec(N=4, m=1, alpha=2.0, c=(1.0, 1.0), rates=(0.5, 0.5), table=CoefficientTable.flat_two_mode(4))
    with pytest.raises(ConstraintViolation):
        AsymptoticSpec.flat_two_mode(4, rates=(0.0, 0.0))
    with pytest.raises(ConstraintViolation):
        AsymptoticSpec(N=2, m=1, alpha=1.0, c=(1.0, 1.0), rates=(0.5, 0.5), table=CoefficientTable.flat_two_mode(4))


def test_decay_is_algebraic_at_large_n():
    fits = decay_regime_scan([AsymptoticSpec.flat_two_mode(500)], np.geomspace(1e-3, 0.5, 20))
    fit = fits.iloc[0]
    assert fit['window_applied']
    assert fit['preferred'] == "algebraic"
    assert fit['algebraic_exponent'] == pytest.approx(-0.5, abs=0.05)
    assert fit['monotone']


def test_decay_is_exponential_at_small_n():
    fits = decay_regime_scan([AsymptoticSpec.flat_two_mode(2)], np.geomspace(0.5, 10.0, 20))
    fit = fits.iloc[0]
    assert not fit['window_applied']
    assert fit['preferred'] == "exponential"
    assert fit['exponential_rate'] > 0


def test_decay_scan_needs_positive_times():
    with pytest.raises(ConstraintViolation):
        decay_regime_scan([AsymptoticSpec.flat_two_mode(10)], [0.0, 0.1, 0.2])
