"""Tests for the algorithm settings."""

import pytest
from pydantic import ValidationError

from src.rcdcre.config import AlgoConfig
from src.utils.exceptions import ExperimentConfigError


class TestAlgoConfig:
    """Defaults and validation."""

    def test_defaults(self):
        config = AlgoConfig()
        assert config.stepsize == 1e-3
        assert config.sigma == 1e3
        assert config.sigma_growth == 10.0
        assert config.sigma_margin == 1.0
        assert config.area_order is None

    def test_growth_must_exceed_one(self):
        with pytest.raises(ValidationError):
            AlgoConfig(sigma_growth=1.0)

    def test_nonpositive_stepsize_rejected(self):
        with pytest.raises(ValidationError):
            AlgoConfig(stepsize=0.0)

    def test_unknown_field_rejected(self):
        with pytest.raises(ValidationError):
            AlgoConfig(step=1e-3)

    def test_repeated_area_rejected(self):
        with pytest.raises(ValidationError):
            AlgoConfig(area_order=(0, 0))

    def test_default_order_is_ascending(self):
        assert AlgoConfig().order_for(3) == [0, 1, 2]

    def test_custom_order(self):
        assert AlgoConfig(area_order=(1, 0)).order_for(2) == [1, 0]

    def test_order_must_cover_every_area(self):
        with pytest.raises(ExperimentConfigError):
            AlgoConfig(area_order=(0, 2)).order_for(2)
