import numpy as np
import pytest

from src.boson_entanglement.classes.fock_state import Bipartition, FockState, OperatorSpec, SeparableLabel
from src.boson_entanglement.fock_core import (block_index_table, enumerate_sector, is_local_operator,
                                              label_to_state, ladder_matrix, local_particle_numbers,
                                              sector_dimension, separable_label)
from src.utils.exceptions import ConfigInvalid, ConstraintViolation, MixedParticleChange, ModeOutOfRange


def test_sector_order_is_lexicographically_decreasing():
    states = [s.occupations for s in enumerate_sector(2, 4)]
    assert states == [
        (2, 0, 0, 0), (1, 1, 0, 0), (1, 0, 1, 0), (1, 0, 0, 1), (0, 2, 0, 0),
        (0, 1, 1, 0), (0, 1, 0, 1), (0, 0, 2, 0), (0, 0, 1, 1), (0, 0, 0, 2),
    ]


@pytest.mark.parametrize('N, M, expected', [(0, 3, 1), (2, 4, 10), (3, 3, 10), (5, 2, 6)])
def test_sector_dimension(N, M, expected):
    assert sector_dimension(N, M) == expected
    assert len(enumerate_sector(N, M)) == expected


def test_enumerate_sector_rejects_negative_particle_number():
    with pytest.raises(ConstraintViolation):
        enumerate_sector(-1, 2)


def test_separable_label_and_inverse(example_bip):
    state = FockState((0, 1, 1, 0))
    label = separable_label(state, example_bip)
    # A side (0,1) is the second one-particle state, B side (1,0) the first.
    assert label == SeparableLabel(k=1, sigma=1, sigma_prime=0)
    assert label_to_state(label, 2, example_bip) == state


def test_label_out_of_range(example_bip):
    with pytest.raises(ConstraintViolation):
        label_to_state(SeparableLabel(k=1, sigma=2, sigma_prime=0), 2, example_bip)


def test_block_index_table_shapes(example_bip):
    table = block_index_table(2, example_bip)
    assert {k: rows.shape for k, rows in table.items()} == {0: (1, 3), 1: (2, 2), 2: (3, 1)}
    covered = np.sort(np.concatenate([rows.ravel() for rows in table.values()]))
    np.testing.assert_array_equal(covered, np.arange(10))


def test_local_particle_numbers(two_mode_bip):
    np.testing.assert_array_equal(local_particle_numbers(2, two_mode_bip), [2, 1, 0])


def test_number_operator_matrix():
    matrix = ladder_matrix(OperatorSpec.number(1), 2, 2)
    np.testing.assert_allclose(matrix, np.diag([2.0, 1.0, 0.0]))


def test_annihilator_matrix():
    matrix = ladder_matrix(OperatorSpec.annihilate(1), 2, 2)
    assert matrix.shape == (2, 3)
    np.testing.assert_allclose(matrix, [[np.sqrt(2), 0, 0], [0, 1, 0]])


def test_annihilating_the_vacuum_gives_an_empty_target():
    assert ladder_matrix(OperatorSpec.annihilate(1), 0, 3).shape == (0, 1)


def test_dagger_matches_conjugate_transpose():
    hop = (1 + 2j) * OperatorSpec.create(1) * OperatorSpec.annihilate(2)
    np.testing.assert_allclose(ladder_matrix(hop.dagger(), 3, 3), ladder_matrix(hop, 3, 3).conj().T)


def test_canonical_commutator():
    a, a_dag = OperatorSpec.annihilate(2), OperatorSpec.create(2)
    commutator = a * a_dag - a_dag * a
    np.testing.assert_allclose(ladder_matrix(commutator, 3, 3), np.eye(10), atol=1e-12)


def test_mixed_particle_change_is_rejected():
    with pytest.raises(MixedParticleChange):
        (OperatorSpec.annihilate(1) + OperatorSpec.create(1)).net_change


def test_operator_beyond_the_modes():
    with pytest.raises(ModeOutOfRange):
        ladder_matrix(OperatorSpec.annihilate(5), 1, 4)


@pytest.mark.parametrize('operator, expected', [
    (OperatorSpec.annihilate(1) * OperatorSpec.annihilate(3), True),
    (OperatorSpec.annihilate(1) * OperatorSpec.annihilate(2), True),
    (OperatorSpec.number(4), True),
    (OperatorSpec.annihilate(1) + OperatorSpec.annihilate(3), False),
    (OperatorSpec.create(2) * OperatorSpec.annihilate(3), True),
    (OperatorSpec.create(2) * OperatorSpec.annihilate(3) + OperatorSpec.create(3) * OperatorSpec.annihilate(2), False),
])
def test_is_local_operator(operator, expected):
    assert is_local_operator(operator, Bipartition(2, 4)) is expected


def test_operator_from_dict_reports_the_pointer():
    data = {"terms": [{"coefficient": 1.0, "word": [[1, "destroy"]]}]}
    with pytest.raises(ConfigInvalid) as error:
        OperatorSpec.from_dict(data, "/noise/0/operator")
    assert error.value.pointer == "/noise/0/operator/terms/0/word/0/1"


def test_operator_dict_round_trip():
    operator = (0.5 - 1j) * OperatorSpec.create(1) * OperatorSpec.annihilate(3)
    assert OperatorSpec.from_dict(operator.to_dict()).terms == operator.terms
