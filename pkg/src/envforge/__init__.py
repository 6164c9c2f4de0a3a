"""Envelopes of hyperplane families: creativity test, construction and optics."""

from .creative import CreativityReport, CreatorField, Uniqueness, Verdict, creator_1d_fast, creator_ambiguity, solve_creator, uniqueness_verdict
from .dual import DualNumber, eval_dual, evaluate
from .envelope import (
    EnvelopeMap,
    VerificationReport,
    alternative_envelopes,
    build_envelope,
    clairaut_graph,
    clairaut_singular_solution,
    e1_envelope,
    envelope,
    verify_envelope,
)
from .expr import Expr, parse, pretty
from .family import HyperplaneFamily, SampleGrid, clairaut_family, osculating_plane_family, rotate_family, support, tangent_line_family
from .optics import WulffDensity, anti_orthotomic, cahn_hoffman, orthotomic, pedal

__version__ = "0.1.0"

__all__ = [
    "CreativityReport",
    "CreatorField",
    "DualNumber",
    "EnvelopeMap",
    "Expr",
    "HyperplaneFamily",
    "SampleGrid",
    "Uniqueness",
    "Verdict",
    "VerificationReport",
    "WulffDensity",
    "alternative_envelopes",
    "anti_orthotomic",
    "build_envelope",
    "cahn_hoffman",
    "clairaut_family",
    "clairaut_graph",
    "clairaut_singular_solution",
    "creator_1d_fast",
    "creator_ambiguity",
    "e1_envelope",
    "envelope",
    "eval_dual",
    "evaluate",
    "orthotomic",
    "osculating_plane_family",
    "parse",
    "pedal",
    "pretty",
    "rotate_family",
    "solve_creator",
    "support",
    "tangent_line_family",
    "uniqueness_verdict",
    "verify_envelope",
]
