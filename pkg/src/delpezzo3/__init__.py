"""Divisor-class engine and catalog verifier for log del Pezzo surfaces of index three."""
from .blowup import ClusterSpec, Tower, eliminate, relative_canonical, strict_transform, transform_with_s
from .catalog import TypeSpec, expand_parameters, expected_symbol, load_catalog, realize
from .dualgraph import WeightedDualGraph, build_dual_graph, canonical_form, classify_component, classify_symbol_sum
from .lattice import BaseSurface, DivClass, F, P2, arithmetic_genus, canonical_class, intersection, is_nef_on_base
from .verifier import Report, run_all, verify

__version__ = "0.1.0"
