"""Exact finite-depth models of Z^d-odometers and their rigidity invariants."""

__version__ = "0.1.0"

from .lattice import Lattice, LatticeError, RatMatrix, hnf, snf, snf_diagonal
from .odometer import Chain, ChainError, ChainSpec, TruncatedPoint, make_chain
from .fullgroup import PiecewiseTranslation, enumerate_depth_image, make_element
from .orbit import OEMap, build_oe, check_oe, cocycle_table, extract_theta
from .rigidity import (
    paper_example,
    snf_obstruction,
    supernatural_equiv,
    verify_struct_conj,
)

__all__ = [
    "Chain",
    "ChainError",
    "ChainSpec",
    "Lattice",
    "LatticeError",
    "OEMap",
    "PiecewiseTranslation",
    "RatMatrix",
    "TruncatedPoint",
    "build_oe",
    "check_oe",
    "cocycle_table",
    "enumerate_depth_image",
    "extract_theta",
    "hnf",
    "make_chain",
    "make_element",
    "paper_example",
    "snf",
    "snf_diagonal",
    "snf_obstruction",
    "supernatural_equiv",
    "verify_struct_conj",
]
