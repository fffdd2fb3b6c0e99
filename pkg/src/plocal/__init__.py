"""Exact p-local algebraic topology: Eilenberg–MacLane cohomology, Postnikov stages,
k-invariants, self-map constraints and rational dimension counts."""

from .coeff import FgModule, ModuleMap, PLocalScalar, canonical_module, map_homology, smith_normal_form
from .errors import (InconsistencyError, MalformedMapError, OutOfRangeError, PLocalError,
                     PreconditionError, UnderdeterminedError)
from .graded import GradedCohomology, GradedRingPresentation, kunneth, uct_reduce
from .postnikov import (build_tower, gem_split_check, homotopy_table, k_invariant_order,
                        truncation_compare)
from .rational import PartSpec, dim_gap, partition_betti
from .report import ENGINE_VERSION as __version__
from .selfmap import propagate_selfmap
from .serre import e2_page, em_cohomology, loopspace_solve, page_turn

__all__ = [
    "FgModule", "ModuleMap", "PLocalScalar", "canonical_module", "map_homology", "smith_normal_form",
    "InconsistencyError", "MalformedMapError", "OutOfRangeError", "PLocalError", "PreconditionError",
    "UnderdeterminedError", "GradedCohomology", "GradedRingPresentation", "kunneth", "uct_reduce",
    "build_tower", "gem_split_check", "homotopy_table", "k_invariant_order", "truncation_compare",
    "PartSpec", "dim_gap", "partition_betti", "propagate_selfmap", "e2_page", "em_cohomology",
    "loopspace_solve", "page_turn", "__version__",
]
