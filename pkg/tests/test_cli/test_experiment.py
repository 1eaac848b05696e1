"""Tests for experiment configuration."""

import json

import numpy as np
import pytest
from pydantic import ValidationError

from src.cli.experiment import ExperimentConfig, StitchSpec, load_experiment, load_stitch_spec
from src.methods.dispatcher import METHOD_ORDER
from src.utils.config import Tolerances
from src.utils.exceptions import ExperimentConfigError
from tests.conftest import two_area_toy_payload


@pytest.fixture
def toy_dir(tmp_path):
    (tmp_path / "toy.json").write_text(json.dumps(two_area_toy_payload()))
    return tmp_path


class TestExperimentConfig:
    """Validation of experiment files."""

    def test_defaults(self):
        experiment = ExperimentConfig(case="toy.json")
        assert experiment.methods == list(METHOD_ORDER)
        assert experiment.start == "zero"
        assert not experiment.csv

    def test_needs_exactly_one_case_source(self):
        with pytest.raises(ValidationError):
            ExperimentConfig()
        with pytest.raises(ValidationError):
            ExperimentConfig(case="toy.json", generator={"name": "two-area-44", "seed": 1})

    def test_generator_needs_seed(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(generator={"name": "two-area-44"})

    def test_unknown_generator(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(generator={"name": "three-area-99", "seed": 1})

    def test_unknown_method(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(case="toy.json", methods=["simplex"])

    def test_methods_must_be_distinct(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(case="toy.json", methods=["cre", "cre"])

    def test_empty_method_list(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(case="toy.json", methods=[])

    def test_ordered_methods_put_reference_first(self):
        experiment = ExperimentConfig(case="toy.json", methods=["admm", "rcdcre", "centralized"])
        assert experiment.ordered_methods == ["centralized", "rcdcre", "admm"]

    def test_build_case_relative_to_config(self, toy_dir):
        case = ExperimentConfig(case="toy.json").build_case(toy_dir)
        assert case.name == "two-area-toy"
        assert len(case.buses) == 4


class TestStartVector:
    """Zero, explicit and file start points."""

    def test_zero(self, tmp_path):
        theta = ExperimentConfig(case="toy.json").start_vector(3, tmp_path)
        np.testing.assert_array_equal(theta, np.zeros(3))

    def test_explicit(self, tmp_path):
        experiment = ExperimentConfig(case="toy.json", start=[-0.1, -0.1])
        np.testing.assert_array_equal(experiment.start_vector(2, tmp_path), [-0.1, -0.1])

    def test_from_file(self, tmp_path):
        (tmp_path / "start.json").write_text("[0.25, -0.5]")
        experiment = ExperimentConfig(case="toy.json", start={"file": "start.json"})
        np.testing.assert_array_equal(experiment.start_vector(2, tmp_path), [0.25, -0.5])

    def test_wrong_length(self, tmp_path):
        experiment = ExperimentConfig(case="toy.json", start=[0.0, 0.0, 0.0])
        with pytest.raises(ExperimentConfigError, match="3 entries"):
            experiment.start_vector(2, tmp_path)

    def test_missing_file(self, tmp_path):
        experiment = ExperimentConfig(case="toy.json", start={"file": "absent.json"})
        with pytest.raises(ExperimentConfigError):
            experiment.start_vector(2, tmp_path)

    def test_non_numeric_file(self, tmp_path):
        (tmp_path / "start.json").write_text('["a", 0.0]')
        experiment = ExperimentConfig(case="toy.json", start={"file": "start.json"})
        with pytest.raises(ExperimentConfigError, match="not a list of numbers"):
            experiment.start_vector(2, tmp_path)

    def test_ragged_file(self, tmp_path):
        (tmp_path / "start.json").write_text("[[0.0], [1.0, 2.0]]")
        experiment = ExperimentConfig(case="toy.json", start={"file": "start.json"})
        with pytest.raises(ExperimentConfigError):
            experiment.start_vector(2, tmp_path)


class TestSettings:
    """Method settings derived from an experiment."""

    def test_thread_override(self):
        settings = ExperimentConfig(case="toy.json").settings(Tolerances(), threads=4)
        assert settings.algo.threads == 4

    def test_threads_kept_without_override(self):
        experiment = ExperimentConfig(case="toy.json", algo={"threads": 3})
        assert experiment.settings(Tolerances()).algo.threads == 3

    def test_tolerance_overrides(self):
        experiment = ExperimentConfig(case="toy.json", tolerances={"feasibility": 1e-6})
        tolerances = experiment.settings(Tolerances(stationarity=1e-9)).tolerances
        assert tolerances.feasibility == 1e-6
        assert tolerances.stationarity == 1e-9

    def test_method_sections(self):
        experiment = ExperimentConfig(case="toy.json", admm={"rho": 1.0})
        assert experiment.settings(Tolerances()).admm.rho == 1.0


class TestLoadExperiment:
    """Reading experiment files."""

    def test_valid_file(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"case": "toy.json", "methods": ["centralized"], "csv": True}))
        experiment = load_experiment(path)
        assert experiment.methods == ["centralized"]
        assert experiment.csv

    def test_missing_file(self, tmp_path):
        with pytest.raises(ExperimentConfigError, match="cannot read"):
            load_experiment(tmp_path / "absent.json")

    def test_invalid_fields_are_listed(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"case": "toy.json", "unknown": 1}))
        with pytest.raises(ExperimentConfigError, match="unknown"):
            load_experiment(path)

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("{")
        with pytest.raises(ExperimentConfigError):
            load_experiment(path)


class TestStitchSpec:
    """Custom multi-area cases."""

    def test_needs_two_cases(self):
        with pytest.raises(ValidationError):
            StitchSpec(cases=["ieee14"], ties=[])

    def test_stitch_ieee14_with_itself(self, tmp_path):
        path = tmp_path / "stitch.json"
        spec = {
            "name": "double-14",
            "cases": ["ieee14", "ieee14"],
            "ties": [{"from_area": 0, "from_bus": 9, "to_area": 1, "to_bus": 9, "b_pu": 5.0}],
        }
        path.write_text(json.dumps(spec))
        case = load_stitch_spec(path)
        assert case.name == "double-14"
        assert len(case.buses) == 28
        assert len(case.areas) == 2
        assert sum(1 for branch in case.branches if branch.tie) == 1

    def test_unknown_ieee_case(self, tmp_path):
        spec = StitchSpec(
            cases=["ieee14", "ieee9999"],
            ties=[{"from_area": 0, "from_bus": 9, "to_area": 1, "to_bus": 9, "b_pu": 5.0}],
        )
        with pytest.raises(ExperimentConfigError, match="ieee9999"):
            spec.build(tmp_path)

    def test_invalid_spec_file(self, tmp_path):
        path = tmp_path / "stitch.json"
        path.write_text(json.dumps({"cases": ["ieee14"]}))
        with pytest.raises(ExperimentConfigError):
            load_stitch_spec(path)
