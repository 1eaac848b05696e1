"""Case readers and writers: native JSON and a MATPOWER `.m` subset."""

import json
import re
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError
from pypower.idx_brch import BR_STATUS, BR_X, F_BUS, RATE_A, T_BUS, TAP
from pypower.idx_bus import BUS_AREA, BUS_I, BUS_TYPE, PD, REF
from pypower.idx_cost import COST, MODEL, NCOST, POLYNOMIAL
from pypower.idx_gen import GEN_BUS, GEN_STATUS, PMAX, PMIN

from ..utils.exceptions import CaseParseError, CaseValidationError
from ..utils.logger import get_logger
from .case import Branch, Bus, Generator, NetworkCase

logger = get_logger(__name__)

# MATPOWER writes RATE_A = 0 for "no limit"
UNLIMITED_MW = 9900.0

_MATRIX = re.compile(r"mpc\.(\w+)\s*=\s*\[(.*?)\]\s*;", re.S)
_SCALAR = re.compile(r"mpc\.(\w+)\s*=\s*([^\[\n;]+);")
_REQUIRED = ("baseMVA", "bus", "gen", "branch")


class CaseFormat(Enum):
    JSON = "json"
    MATPOWER = "matpower"


def parse_case(data: bytes | str, case_format: CaseFormat | str = CaseFormat.JSON) -> NetworkCase:
    """
    Parse a case and check every network invariant.

    Args:
        data: Raw file contents
        case_format: CaseFormat or its string value ("json" / "matpower")

    Returns:
        A NetworkCase whose invariants hold

    Raises:
        CaseParseError: Malformed input, with location and offending token
        CaseValidationError: Input parsed but violates the network invariants
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    case_format = CaseFormat(case_format)

    if case_format is CaseFormat.JSON:
        case = _parse_json(text)
    else:
        case = case_from_ppc(_parse_matpower(text))

    violations = case.check_invariants()
    if violations:
        raise CaseValidationError(violations)
    logger.debug(
        f"Parsed case {case.name}: {len(case.buses)} buses, {len(case.branches)} branches, "
        f"{len(case.generators)} generators"
    )
    return case


def serialize_case(case: NetworkCase) -> str:
    """Deterministic JSON text for a case."""
    payload = case.model_dump(mode="json", by_alias=True, exclude_none=True)
    return json.dumps(payload, indent=2) + "\n"


def load_case(path: Path | str) -> NetworkCase:
    """Read a case file, choosing the reader from the suffix (`.m` is MATPOWER)."""
    path = Path(path)
    case_format = CaseFormat.MATPOWER if path.suffix == ".m" else CaseFormat.JSON
    try:
        data = path.read_bytes()
    except OSError as e:
        raise CaseParseError(str(path), "", f"cannot read file: {e}") from e
    return parse_case(data, case_format)


def _parse_json(text: str) -> NetworkCase:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        token = text[e.pos : e.pos + 10]
        raise CaseParseError(f"line {e.lineno} column {e.colno}", token, e.msg) from e

    try:
        return NetworkCase.model_validate(payload)
    except ValidationError as e:
        raise CaseValidationError(
            [
                f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}"
                for error in e.errors()
            ]
        ) from e


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("%", 1)[0] for line in text.splitlines())


def _parse_matpower(text: str) -> dict[str, Any]:
    """Extract the numeric `mpc.*` fields into a pypower-style dict."""
    text = _strip_comments(text)
    ppc: dict[str, Any] = {}

    for match in _MATRIX.finditer(text):
        first_line = text.count("\n", 0, match.start(2)) + 1
        ppc[match.group(1)] = _parse_matrix(match.group(2), match.group(1), first_line)

    for match in _SCALAR.finditer(text):
        name, raw = match.group(1), match.group(2).strip()
        if name in ppc or raw.startswith("'"):
            continue
        try:
            ppc[name] = float(raw)
        except ValueError:
            line = text.count("\n", 0, match.start()) + 1
            raise CaseParseError(f"line {line} (mpc.{name})", raw, "expected a number")

    missing = [name for name in _REQUIRED if name not in ppc]
    if missing:
        raise CaseParseError("end of file", "", f"missing mpc.{', mpc.'.join(missing)}")
    return ppc


def _parse_matrix(body: str, name: str, first_line: int) -> np.ndarray:
    rows: list[list[float]] = []
    for offset, line in enumerate(body.split("\n")):
        for chunk in line.split(";"):
            tokens = chunk.replace(",", " ").split()
            if not tokens:
                continue
            row = []
            for token in tokens:
                try:
                    row.append(float(token))
                except ValueError:
                    raise CaseParseError(
                        f"line {first_line + offset} (mpc.{name})", token, "expected a number"
                    )
            rows.append(row)

    widths = {len(row) for row in rows}
    if len(widths) > 1:
        raise CaseParseError(
            f"mpc.{name}", str(sorted(widths)), "rows have different column counts"
        )
    return np.array(rows, dtype=float)


def case_from_ppc(
    ppc: dict[str, Any],
    area: int | None = None,
    name: str = "case",
) -> NetworkCase:
    """
    Convert pypower/MATPOWER case data to a NetworkCase.

    Branch susceptance is 1/(x·tap) with tap 0 meaning 1; out-of-service branches
    and generators are dropped. Polynomial costs c2·p² + c1·p + c0 map to
    q_cost = 2·c2 and c_cost = c1.

    Args:
        ppc: Dict with baseMVA, bus, branch, gen and optionally gencost
        area: Area label for every bus, or None to keep BUS_AREA
        name: Case name

    Raises:
        CaseValidationError: Unsupported cost model or zero reactance
    """
    bus_data = np.atleast_2d(ppc["bus"])
    branch_data = np.atleast_2d(ppc["branch"])
    gen_data = np.atleast_2d(ppc["gen"])
    gencost = ppc.get("gencost")
    problems: list[str] = []

    buses = [
        Bus(
            id=int(row[BUS_I]),
            area=int(row[BUS_AREA]) if area is None else area,
            load_mw=float(row[PD]),
            ref=int(row[BUS_TYPE]) == REF,
        )
        for row in bus_data
    ]
    area_of = {bus.id: bus.area for bus in buses}

    branches = []
    for k, row in enumerate(branch_data):
        if row.size > BR_STATUS and row[BR_STATUS] == 0:
            continue
        tap = row[TAP] if row.size > TAP and row[TAP] != 0 else 1.0
        reactance = row[BR_X] * tap
        if reactance == 0:
            problems.append(f"branch row {k + 1}: zero reactance")
            continue
        rate = row[RATE_A] if row.size > RATE_A and row[RATE_A] > 0 else UNLIMITED_MW
        from_bus, to_bus = int(row[F_BUS]), int(row[T_BUS])
        branches.append(
            Branch(
                from_bus=from_bus,
                to_bus=to_bus,
                b_pu=abs(1.0 / reactance),
                limit_mw=float(rate),
                tie=area_of.get(from_bus) != area_of.get(to_bus),
            )
        )

    generators = []
    for k, row in enumerate(gen_data):
        if row.size > GEN_STATUS and row[GEN_STATUS] <= 0:
            continue
        q_cost, c_cost = 0.0, 0.0
        if gencost is not None:
            cost = np.atleast_2d(gencost)[k]
            if int(cost[MODEL]) != POLYNOMIAL:
                problems.append(f"gencost row {k + 1}: only polynomial costs are supported")
                continue
            coefficients = cost[COST : COST + int(cost[NCOST])]
            if coefficients.size > 3:
                problems.append(f"gencost row {k + 1}: polynomial degree above 2")
                continue
            padded = np.concatenate([np.zeros(3 - coefficients.size), coefficients])
            q_cost, c_cost = 2.0 * float(padded[0]), float(padded[1])
        generators.append(
            Generator(
                bus=int(row[GEN_BUS]),
                pmin_mw=float(row[PMIN]),
                pmax_mw=float(row[PMAX]),
                q_cost=q_cost,
                c_cost=c_cost,
            )
        )

    if problems:
        raise CaseValidationError(problems)
    return NetworkCase(
        name=name,
        base_mva=float(ppc["baseMVA"]),
        buses=buses,
        branches=branches,
        generators=generators,
    )
