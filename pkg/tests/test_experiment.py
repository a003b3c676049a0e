import json

import numpy as np
import pytest

from src.experiment import LargeNConfig, parse_experiment
from src.utils.exceptions import ConfigInvalid

EVOLVE = {
    "name": "evolve_small",
    "task": "evolve",
    "seed": 3,
    "system": {"N": 2, "M": 2, "m": 1},
    "hamiltonian": {"kind": "hopping", "amplitudes": [1.0]},
    "noise": [{"kind": "dephasing", "rates": [0.1, 0.2]}],
    "initial_state": {"kind": "random", "ensemble": "ginibre"},
    "time_grid": {"start": 0.0, "stop": 1.0, "points": 5},
}


def _with(base: dict, **changes) -> dict:
    return json.loads(json.dumps({**base, **changes}))


def test_bundled_experiments_parse(experiments_dir):
    paths = sorted(experiments_dir.glob("*.json"))
    assert paths
    for path in paths:
        experiment = parse_experiment(json.loads(path.read_text(encoding="utf-8")))
        assert experiment.output.path == path.stem


@pytest.mark.parametrize('changes, pointer', [
    ({"noise": [{"kind": "dephasing", "rates": [0.1, -0.2]}]}, "/noise/0/rates/1"),
    ({"system": None}, "/system"),
    ({"task": "simulate"}, "/task"),
    ({"seed": 2 ** 64}, "/seed"),
    ({"initial_state": {"kind": "example", "p": 0.8}}, "/initial_state/kind"),
    ({"initial_state": {"kind": "fock", "occupations": [2, 1]}}, "/initial_state/occupations"),
    ({"initial_state": {"kind": "diagonal_class", "alpha": 2.0}}, "/initial_state/alpha"),
    ({"time_grid": {"start": 1.0, "stop": 0.5, "points": 3}}, "/time_grid/stop"),
])
def test_errors_point_at_the_offending_field(changes, pointer):
    data = _with(EVOLVE, **changes)
    data = {key: value for key, value in data.items() if value is not None}
    with pytest.raises(ConfigInvalid) as error:
        parse_experiment(data)
    assert error.value.pointer == pointer


def test_task_aliases_and_overrides():
    assert parse_experiment(_with(EVOLVE, task="verify-bounds")).task == "verify"
    assert parse_experiment(EVOLVE, task="stationary").task == "stationary"


def test_canonical_form_round_trips():
    experiment = parse_experiment(EVOLVE)
    assert parse_experiment(experiment.to_dict()) == experiment
    assert experiment.output.path == "evolve_small"


def test_seed_controls_the_random_state():
    experiment = parse_experiment(EVOLVE)
    first = experiment.initial_mixture().blocks()[2]
    np.testing.assert_array_equal(first, experiment.initial_mixture().blocks()[2])
    reseeded = experiment.with_seed(4)
    assert reseeded.seed == 4
    assert not np.allclose(reseeded.initial_mixture().blocks()[2], first)


def test_number_mixture_system():
    data = _with(EVOLVE, system={"M": 2, "m": 1, "mixture": {"1": 0.25, "2": 0.75}},
                 initial_state={"kind": "maximally_mixed"})
    mixture = parse_experiment(data).initial_mixture()
    assert mixture.particle_numbers == (1, 2)
    assert mixture.weight(2) == pytest.approx(0.75)
    with pytest.raises(ConfigInvalid) as error:
        parse_experiment(_with(data, initial_state={"kind": "fock", "occupations": [1, 1]}))
    assert error.value.pointer == "/initial_state/kind"


@pytest.mark.parametrize('name, expected', [
    ("worked_examples", "dephasing"),
    ("loss_example", "loss"),
    ("loss_bound", None),
])
def test_worked_example_detection(name, expected, experiments_dir):
    data = json.loads((experiments_dir / f"{name}.json").read_text(encoding="utf-8"))
    worked = parse_experiment(data).worked_example()
    assert (worked[0] if worked else None) == expected


DIAGONAL_CLASS = {
    "name": "diagonal_class_small",
    "task": "evolve",
    "system": {"N": 2, "M": 4, "m": 2},
    "hamiltonian": {"kind": "diagonal", "energies": [1.0, 0.7, 1.3, 0.4]},
    "noise": [{"kind": "dephasing", "rates": [0.1, 0.2, 0.3, 0.4]}],
    "initial_state": {"kind": "diagonal_class", "alpha": 1.0, "c": [1.0, 0.0, 1.0, 0.0],
                      "entries": [[2, 1, 0, 0, 0.25, 0.0], [2, 2, 0, 0, 0.5, 0.0], [1, 1, 0, 0, 0.5, 0.0]]},
    "time_grid": {"start": 0.0, "stop": 1.0, "points": 3},
}

LARGE_N_ENTRIES = {
    "name": "large_n_entries",
    "task": "large-n",
    "large_n": {"N": [4], "entries": [[1, 0, 0, 0, 0.25], [1, 1, 0, 0, 0.5], [0, 0, 0, 0, 0.5]]},
    "time_grid": {"start": 0.01, "stop": 0.5, "points": 3},
}


def test_diagonal_class_entries_build_the_state():
    rho = parse_experiment(DIAGONAL_CLASS).initial_mixture().blocks()[2]
    assert rho[0, 2] == pytest.approx(0.25)
    assert rho[2, 0] == pytest.approx(0.25)


@pytest.mark.parametrize('state_changes, pointer', [
    ({"c": [1.0, 0.0, 0.0, 0.0]}, "/initial_state/c"),
    ({"c": [0.5, 0.5, 0.5, 0.5]}, "/initial_state/c"),
    ({"entries": [[3, 1, 0, 0, 0.5]]}, "/initial_state/entries/0/0"),
    ({"entries": [[1, 1, 2, 0, 0.5]]}, "/initial_state/entries/0"),
    ({"entries": [[2, 1, 0, 0, "x"]]}, "/initial_state/entries/0/4"),
])
def test_diagonal_class_errors_point_at_the_offending_field(state_changes, pointer):
    data = _with(DIAGONAL_CLASS, initial_state={**DIAGONAL_CLASS["initial_state"], **state_changes})
    with pytest.raises(ConfigInvalid) as error:
        parse_experiment(data)
    assert error.value.pointer == pointer


@pytest.mark.parametrize('entries, pointer', [
    ([[1, "x"]], "/large_n/entries/0"),
    ([[1, 0, 0, 0, "x"]], "/large_n/entries/0/4"),
    ([[5, 0, 0, 0, 1.0]], "/large_n/entries/0/0"),
    ("rows", "/large_n/entries"),
])
def test_malformed_large_n_entries(entries, pointer):
    data = _with(LARGE_N_ENTRIES, large_n={**LARGE_N_ENTRIES["large_n"], "entries": entries})
    with pytest.raises(ConfigInvalid) as error:
        parse_experiment(data)
    assert error.value.pointer == pointer


@pytest.mark.parametrize('error', [KeyError("sigma"), TypeError("not a number"), ValueError("bad row")])
def test_builder_errors_become_configuration_errors(error, monkeypatch):
    def _fail(self):
        raise error

    monkeypatch.setattr(LargeNConfig, "specs", _fail)
    with pytest.raises(ConfigInvalid) as raised:
        parse_experiment(LARGE_N_ENTRIES)
    assert raised.value.pointer == "/large_n"
