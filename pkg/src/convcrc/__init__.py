"""Undetected-error analysis of CRC codes concatenated with convolutional codes."""

from .construction import (
    ClassSpectra,
    EquivalentCode,
    StateSpaceError,
    build_equivalent,
    classify_states,
    construction_tally,
    pud_bound_construction,
    search_class_spectra,
)
from .convcode import ConvCode, from_octal, parse_octal_list
from .crc import CrcSpec, crc_check, crc_encode, parse_crc
from .crcsearch import SearchAudit, SearchConfig, enumerate_candidates, good_crc_over_lengths, search_best_crc
from .eventsearch import ErrorEvent, SearchBudgetError, Spectrum, search_events, transfer_value
from .exclusion import CosetTable, build_cosets, exclusion_tally, find_gap, pud_bound_exclusion
from .gf2poly import Gf2Poly, divides, from_koopman, parse_power_list, to_koopman
from .mcsim import SimOutcome, StopRule, simulate_concatenated, simulate_equivalent_fer
from .probability import SnrPoint, pairwise_error_prob, q_function
from .report import BoundPoint, BoundReport

__version__ = "0.1.0"

__all__ = [
    "BoundPoint",
    "BoundReport",
    "ClassSpectra",
    "ConvCode",
    "CosetTable",
    "CrcSpec",
    "EquivalentCode",
    "ErrorEvent",
    "Gf2Poly",
    "SearchAudit",
    "SearchBudgetError",
    "SearchConfig",
    "SimOutcome",
    "SnrPoint",
    "Spectrum",
    "StateSpaceError",
    "StopRule",
    "build_cosets",
    "build_equivalent",
    "classify_states",
    "construction_tally",
    "crc_check",
    "crc_encode",
    "divides",
    "enumerate_candidates",
    "exclusion_tally",
    "find_gap",
    "from_koopman",
    "from_octal",
    "good_crc_over_lengths",
    "pairwise_error_prob",
    "parse_crc",
    "parse_octal_list",
    "parse_power_list",
    "pud_bound_construction",
    "pud_bound_exclusion",
    "q_function",
    "search_best_crc",
    "search_class_spectra",
    "search_events",
    "simulate_concatenated",
    "simulate_equivalent_fer",
    "to_koopman",
    "transfer_value",
]
