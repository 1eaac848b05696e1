"""Tests for case parsing and serialization."""

import json

import numpy as np
import pytest

from src.grid import CaseFormat, load_case, parse_case, serialize_case
from src.utils.exceptions import CaseParseError, CaseValidationError
from tests.conftest import FIXTURES, three_bus_payload, two_area_toy_payload


class TestParseJson:
    """Test the native JSON reader."""

    def test_three_bus_case(self):
        case = parse_case(json.dumps(three_bus_payload()))
        assert len(case.buses) == 3
        assert len(case.branches) == 2
        assert case.base_mva == 100.0
        assert case.branches[0].from_bus == 1

    def test_accepts_bytes(self):
        case = parse_case(json.dumps(three_bus_payload()).encode(), "json")
        assert case.name == "three-bus"

    def test_syntax_error_has_location(self):
        with pytest.raises(CaseParseError) as exc_info:
            parse_case('{"buses": [\n  {"id": 1,, "area": 1}]}')
        assert exc_info.value.location.startswith("line 2")

    def test_schema_error_has_field_path(self):
        payload = three_bus_payload()
        payload["branches"][1]["b_pu"] = -1.0
        with pytest.raises(CaseValidationError) as exc_info:
            parse_case(json.dumps(payload))
        assert any(v.startswith("branches.1.b_pu") for v in exc_info.value.violations)

    def test_semantic_error_names_branch(self):
        payload = two_area_toy_payload()
        payload["branches"][0]["tie"] = True
        with pytest.raises(CaseValidationError) as exc_info:
            parse_case(json.dumps(payload))
        assert any("branches[0] (1-2)" in v for v in exc_info.value.violations)


class TestRoundTrip:
    """Test serialize/parse round trips."""

    def test_parse_of_serialized_is_identical(self, two_area_toy):
        assert parse_case(serialize_case(two_area_toy)) == two_area_toy

    def test_serialized_uses_documented_keys(self, two_area_toy):
        payload = json.loads(serialize_case(two_area_toy))
        assert set(payload["branches"][0]) == {"from", "to", "b_pu", "limit_mw", "tie"}
        assert "provenance" not in payload

    def test_stitched_case_round_trip(self, case44):
        assert parse_case(serialize_case(case44)) == case44


class TestParseMatpower:
    """Test the MATPOWER subset reader on the IEEE 14-bus file."""

    @pytest.fixture
    def case14(self):
        return load_case(FIXTURES / "case14.m")

    def test_counts(self, case14):
        assert len(case14.buses) == 14
        assert len(case14.branches) == 20
        assert len(case14.generators) == 5

    def test_reference_and_loads(self, case14):
        assert [bus.id for bus in case14.buses if bus.ref] == [1]
        assert case14.total_load() == pytest.approx(259.0)

    def test_tap_ratio_in_susceptance(self, case14):
        branch = next(b for b in case14.branches if (b.from_bus, b.to_bus) == (4, 7))
        assert branch.b_pu == pytest.approx(1.0 / (0.20912 * 0.978))

    def test_cost_conversion(self, case14):
        assert case14.generators[1].q_cost == pytest.approx(0.5)
        assert case14.generators[1].c_cost == pytest.approx(20.0)

    def test_zero_rating_means_unlimited(self, case14):
        assert all(b.limit_mw == 9900.0 for b in case14.branches)

    def test_bad_token_reports_line(self):
        text = (FIXTURES / "case14.m").read_text().replace("0.05917", "0.0x917")
        with pytest.raises(CaseParseError) as exc_info:
            parse_case(text, CaseFormat.MATPOWER)
        assert exc_info.value.token == "0.0x917"
        assert exc_info.value.location.startswith("line ")

    def test_missing_matrix(self):
        with pytest.raises(CaseParseError):
            parse_case("mpc.baseMVA = 100;\nmpc.bus = [1 3 0 0 0 0 1 1 0 0 1 1 1];", "matpower")

    def test_base_mva_honoured(self):
        text = (FIXTURES / "case14.m").read_text()
        text = text.replace("mpc.baseMVA = 100;", "mpc.baseMVA = 50;")
        case = parse_case(text, CaseFormat.MATPOWER)
        assert case.base_mva == 50.0


class TestLoadCase:
    """Test reading cases from disk."""

    def test_json_file(self, tmp_path, two_area_toy):
        path = tmp_path / "toy.json"
        path.write_text(serialize_case(two_area_toy))
        assert load_case(path) == two_area_toy

    def test_missing_file(self, tmp_path):
        with pytest.raises(CaseParseError):
            load_case(tmp_path / "nope.json")

    def test_matpower_and_json_agree(self, tmp_path):
        case = load_case(FIXTURES / "case14.m")
        path = tmp_path / "case14.json"
        path.write_text(serialize_case(case))
        again = load_case(path)
        np.testing.assert_allclose(
            [b.b_pu for b in again.branches], [b.b_pu for b in case.branches]
        )
