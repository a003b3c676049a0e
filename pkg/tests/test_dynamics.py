import numpy as np
import pytest

from src.boson_entanglement.classes.density_matrix import NumberMixture, SectorDensityMatrix
from src.boson_entanglement.classes.fock_state import FockState, OperatorSpec
from src.boson_entanglement.classes.lindblad import LindbladGenerator
from src.boson_entanglement.dynamics import (analytic_dephasing_example, analytic_loss_example, build_liouvillian,
                                             commutant_dimension, dephasing_jumps, diagonal_hamiltonian,
                                             domain_sectors, evolve_exact, evolve_rk4, evolve_trajectory,
                                             evolve_trotter, fidelity, hopping_hamiltonian, loss_jumps,
                                             normalized_identities, stationary_states, trace_distance, vacuum)
from src.boson_entanglement.fock_core import ladder_matrix, sector_index
from src.boson_entanglement.states import example_state, random_sector_state
from src.utils.exceptions import ConstraintViolation, ModeOutOfRange
from tests.conftest import EXAMPLE_ENERGIES, superposition

DEPHASING_RATES = (0.1, 0.2, 0.3, 0.4)
LOSS_JUMP = OperatorSpec.annihilate(1) * OperatorSpec.annihilate(3)


def _state(rho: SectorDensityMatrix) -> NumberMixture:
    return NumberMixture.from_state(rho)


def test_hopping_hamiltonian_is_hermitian():
    matrix = ladder_matrix(hopping_hamiltonian([1.0, 0.5], energies=[0.1, 0.2, 0.3]), 2, 3)
    np.testing.assert_allclose(matrix, matrix.conj().T)
    assert not np.allclose(matrix, np.diag(np.diag(matrix)))


def test_generator_validation():
    with pytest.raises(ConstraintViolation):
        LindbladGenerator(jumps=((-0.1, OperatorSpec.number(1)),))
    with pytest.raises(ConstraintViolation):
        LindbladGenerator(jumps=((0.1, OperatorSpec.create(1)),))
    with pytest.raises(ConstraintViolation):
        LindbladGenerator(hamiltonian=OperatorSpec.annihilate(1))


def test_liouvillian_is_trace_preserving():
    gen = LindbladGenerator(hopping_hamiltonian([1.0, 0.3]), loss_jumps([0.2, 0.0, 0.7]) + dephasing_jumps([0.1] * 3))
    L = build_liouvillian(gen, 2, 3)
    assert L.sectors == (0, 1, 2)
    assert L.trace_residual() < 1e-12


def test_feed_outside_the_sector_list():
    gen = LindbladGenerator(jumps=loss_jumps([0.5, 0.5]))
    with pytest.raises(ConstraintViolation):
        build_liouvillian(gen, 2, 2, sectors=[2])


def test_non_hermitian_hamiltonian():
    gen = LindbladGenerator(hamiltonian=OperatorSpec.create(1) * OperatorSpec.annihilate(2))
    with pytest.raises(ConstraintViolation):
        build_liouvillian(gen, 1, 2)


def test_generator_beyond_the_modes():
    with pytest.raises(ModeOutOfRange):
        build_liouvillian(LindbladGenerator(jumps=dephasing_jumps([0.1] * 5)), 2, 4)


def test_domain_sectors():
    assert domain_sectors(LindbladGenerator(jumps=dephasing_jumps([0.1, 0.1])), [2, 1]) == (1, 2)
    assert domain_sectors(LindbladGenerator(jumps=loss_jumps([0.1, 0.1])), [2]) == (0, 1, 2)


def test_negative_time():
    L = build_liouvillian(LindbladGenerator(), 1, 2)
    with pytest.raises(ConstraintViolation):
        evolve_exact(L, _state(SectorDensityMatrix.maximally_mixed(1, 2)), -1.0)


@pytest.mark.parametrize('t', [0.0, 0.4, 1.3, 6.0])
def test_dephasing_example_matches_closed_form(t):
    gen = LindbladGenerator(diagonal_hamiltonian(EXAMPLE_ENERGIES), dephasing_jumps(DEPHASING_RATES))
    L = build_liouvillian(gen, 2, 4, sectors=[2])
    evolved = evolve_exact(L, _state(example_state(0.8)), t)
    expected = analytic_dephasing_example(0.8, DEPHASING_RATES, EXAMPLE_ENERGIES, t)
    np.testing.assert_allclose(evolved.blocks()[2], expected.matrix, atol=1e-9)
    assert evolved.diagnostics['trace'] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize('t', [0.4, 1.3, 6.0])
def test_loss_example_matches_closed_form(t):
    gen = LindbladGenerator(diagonal_hamiltonian(EXAMPLE_ENERGIES), ((0.5, LOSS_JUMP),))
    L = build_liouvillian(gen, 2, 4)
    evolved = evolve_exact(L, _state(example_state(0.7)), t)
    expected = analytic_loss_example(0.7, 0.5, EXAMPLE_ENERGIES, t)
    assert evolved.weight(0) == pytest.approx(0.35 * (1 - np.exp(-0.5 * t)))
    assert evolved.weight(1) == pytest.approx(0.0, abs=1e-10)
    assert trace_distance(evolved, expected) < 1e-9


def test_noon_coherence_decays_at_four_times_the_rate():
    gen = LindbladGenerator(jumps=dephasing_jumps([1.0, 1.0]))
    L = build_liouvillian(gen, 2, 2, sectors=[2])
    evolved = evolve_exact(L, _state(superposition(2, 2, (2, 0), (0, 2))), 0.3)
    index = sector_index(2, 2)
    coherence = evolved.blocks()[2][index[(2, 0)], index[(0, 2)]]
    assert abs(coherence) == pytest.approx(0.5 * np.exp(-4 * 0.3))


def test_rk4_matches_exponential(rng):
    gen = LindbladGenerator(hopping_hamiltonian([1.0]), loss_jumps([0.3, 0.6]))
    L = build_liouvillian(gen, 2, 2)
    rho0 = _state(random_sector_state(2, 2, rng))
    assert trace_distance(evolve_rk4(L, rho0, 1.0), evolve_exact(L, rho0, 1.0)) < 1e-9


def test_trotter_is_exact_for_commuting_parts():
    gen = LindbladGenerator(diagonal_hamiltonian(EXAMPLE_ENERGIES), dephasing_jumps(DEPHASING_RATES))
    L_h = build_liouvillian(gen.hamiltonian_only(), 2, 4, sectors=[2])
    L_n = build_liouvillian(gen.noise_only(), 2, 4, sectors=[2])
    rho0 = _state(example_state(0.8))
    exact = evolve_exact(build_liouvillian(gen, 2, 4, sectors=[2]), rho0, 2.0)
    assert trace_distance(evolve_trotter(L_h, L_n, rho0, 2.0, 1), exact) < 1e-10


def test_trotter_error_shrinks_with_the_step_count():
    gen = LindbladGenerator(hopping_hamiltonian([1.0]), dephasing_jumps([0.5, 0.2]))
    L_h = build_liouvillian(gen.hamiltonian_only(), 2, 2, sectors=[2])
    L_n = build_liouvillian(gen.noise_only(), 2, 2, sectors=[2])
    rho0 = _state(SectorDensityMatrix.from_fock(FockState((2, 0))))
    exact = evolve_exact(L_h + L_n, rho0, 1.0)
    errors = [trace_distance(evolve_trotter(L_h, L_n, rho0, 1.0, n), exact) for n in (10, 40)]
    assert errors[1] < errors[0] / 2


def test_trajectory_is_ordered_with_workers(rng):
    gen = LindbladGenerator(hopping_hamiltonian([1.0]), loss_jumps([0.3, 0.6]))
    L = build_liouvillian(gen, 2, 2)
    rho0 = _state(random_sector_state(2, 2, rng))
    times = [0.0, 0.5, 1.0, 2.0]
    parallel = evolve_trajectory(L, rho0, times, workers=2)
    for t, state in zip(times, parallel):
        assert trace_distance(state, evolve_exact(L, rho0, t)) < 1e-12


def test_loss_drives_everything_to_the_vacuum():
    L = build_liouvillian(LindbladGenerator(jumps=loss_jumps([0.5, 0.5])), 2, 2)
    states = stationary_states(L)
    assert len(states) == 1
    assert states[0].diagnostics['kernel_dimension'] == 1
    assert fidelity(states[0], vacuum(2)) == pytest.approx(1.0, abs=1e-9)


def test_hopping_and_dephasing_relax_to_the_identity():
    gen = LindbladGenerator(hopping_hamiltonian([1.0]), dephasing_jumps([0.5, 0.5]))
    L = build_liouvillian(gen, 2, 2, sectors=[2])
    states = stationary_states(L)
    assert len(states) == 1
    assert fidelity(states[0], normalized_identities(states[0])) == pytest.approx(1.0, abs=1e-9)
    assert commutant_dimension(gen, 2, 2) == 1


def test_long_time_limits(rng):
    lossy = build_liouvillian(LindbladGenerator(jumps=loss_jumps([0.5, 0.5])), 2, 2)
    rho0 = _state(random_sector_state(2, 2, rng))
    assert trace_distance(evolve_exact(lossy, rho0, 100.0), vacuum(2)) < 1e-6
    gen = LindbladGenerator(hopping_hamiltonian([1.0]), dephasing_jumps([0.5, 0.5]))
    mixing = build_liouvillian(gen, 2, 2, sectors=[2])
    evolved = evolve_exact(mixing, _state(random_sector_state(2, 2, rng)), 100.0)
    assert trace_distance(evolved, _state(SectorDensityMatrix.maximally_mixed(2, 2))) < 1e-6


def test_pure_dephasing_keeps_every_fock_state():
    gen = LindbladGenerator(jumps=dephasing_jumps([0.5, 0.5]))
    states = stationary_states(build_liouvillian(gen, 2, 2, sectors=[2]))
    assert len(states) == 3
    assert commutant_dimension(gen, 2, 2) == 3


def test_commutant_needs_number_conserving_jumps():
    with pytest.raises(ConstraintViolation):
        commutant_dimension(LindbladGenerator(jumps=loss_jumps([0.5, 0.5])), 2, 2)


def test_distances():
    rho = _state(SectorDensityMatrix.maximally_mixed(2, 2))
    assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-14)
    assert fidelity(rho, rho) == pytest.approx(1.0)
    assert trace_distance(rho, vacuum(2)) == pytest.approx(1.0)
    assert fidelity(rho, vacuum(2)) == 0.0
