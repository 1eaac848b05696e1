"""Network cases, the DC model and the compact per-area form."""

from .case import Branch, Bus, Generator, NetworkCase, Provenance
from .compact import (
    AngleRecovery,
    CompactAreaProblem,
    CouplingSet,
    FullOpf,
    area_problem,
    build_full_opf,
    reduce_to_compact,
)
from .dc_model import AreaBlocks, DcModel, SusceptanceBlocks, build_dc_model
from .io import CaseFormat, case_from_ppc, load_case, parse_case, serialize_case
from .library import (
    GENERATORS,
    TieSpec,
    four_area_472,
    load_ieee_case,
    perturb_costs,
    quadratic_toy,
    quadratic_toy_joint,
    stitch_cases,
    stitch_two_area_case,
    two_area_44,
    with_linear_costs,
)

__all__ = [
    "Bus",
    "Branch",
    "Generator",
    "NetworkCase",
    "Provenance",
    "CaseFormat",
    "parse_case",
    "serialize_case",
    "load_case",
    "case_from_ppc",
    "DcModel",
    "AreaBlocks",
    "SusceptanceBlocks",
    "build_dc_model",
    "CompactAreaProblem",
    "CouplingSet",
    "AngleRecovery",
    "FullOpf",
    "reduce_to_compact",
    "build_full_opf",
    "area_problem",
    "TieSpec",
    "GENERATORS",
    "load_ieee_case",
    "stitch_cases",
    "stitch_two_area_case",
    "perturb_costs",
    "with_linear_costs",
    "two_area_44",
    "four_area_472",
    "quadratic_toy",
    "quadratic_toy_joint",
]
