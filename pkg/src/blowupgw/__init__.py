"""Genus-zero Gromov-Witten invariants of blow-ups of projective space."""

from .engine import Engine, Workspace
from .ring import (CohClass, TargetData, abelian_surface_ring, build_blowup_point_ring,
                   curve_secant_ring, parse_ring_file, product, triple_product)

__all__ = ["CohClass", "TargetData", "build_blowup_point_ring", "parse_ring_file",
           "product", "triple_product", "curve_secant_ring", "abelian_surface_ring",
           "Engine", "Workspace"]
