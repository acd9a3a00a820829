"""Reduction workbench: 3-SAT to degree-bounded partial orientation to MEDEP(3).

Exact solvers and checkers live in :mod:`orientforge.oracle` and
:mod:`orientforge.graph`; the reductions and witness translations in
:mod:`orientforge.reductions`; gadget templates in :mod:`orientforge.gadgets`.
"""

from .formats import CnfFormula, parse_cnf, parse_medep, parse_po
from .gadgets import GadgetStore, clause_gadget, verify_gadget
from .graph import (
    DegreeSpec,
    EdgeState,
    MedepInstance,
    Multigraph,
    PartialOrientationInstance,
    PathPacking,
    check_orientation,
    check_packing,
    is_simple,
)
from .oracle import Status, enumerate_orientations, solve_medep, solve_po, solve_sat_bruteforce
from .reductions import (
    TriviallyInfeasible,
    decode_orientation,
    encode_assignment,
    orientation_to_packing,
    packing_to_orientation,
    po_to_medep,
    sat_to_po,
)

__version__ = "0.1.0"
