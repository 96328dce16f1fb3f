"""Exact desk-scale verification of stratified moduli of isotropic
subspace pairs over small finite fields and function fields."""

from .charts import (flat_lift, groebner, is_squarefree, isotropy_relations,
                     macaulay_member, reduce_poly, reduced_presentation,
                     substitution_check)
from .degenerations import (ClosurePoset, admissible_generization_pairs,
                            closure_poset, generization_lift,
                            nonsmooth_witness)
from .errors import SplitModelError
from .frame import Frame, build_frame, orthogonal, pair
from .lattices import (CoweightLabel, LaurentLattice, admissible_set,
                       base_lattice, demazure_membership, hermitian_gram,
                       in_schubert_variety, lattice_contains, lattice_dual,
                       lattice_from_point, lattice_type, phi_map,
                       quotient_profile, schubert_cell, schubert_dimension,
                       standard_lattice, tau_fiber_check)
from .linalg import Matrix, Subspace, smith_form_local
from .points import (ModelPoint, StratumLabel, census, chart_point_eps,
                     chart_point_general, chart_point_local, invariants,
                     iter_validated_points, sample_eps_chart_point,
                     sample_general_chart_point, stratum_dimension,
                     tangent_report, validate)
from .rings import (DualNumbers, FunctionField, PolynomialRing, PrimeField,
                    SeriesRing)

__version__ = "0.1.0"

__all__ = [
    "ClosurePoset", "CoweightLabel", "DualNumbers", "Frame", "FunctionField",
    "LaurentLattice", "Matrix", "ModelPoint", "PolynomialRing", "PrimeField",
    "SeriesRing", "SplitModelError", "StratumLabel", "Subspace",
    "admissible_generization_pairs", "admissible_set", "base_lattice",
    "build_frame", "census", "chart_point_eps", "chart_point_general",
    "chart_point_local", "closure_poset", "demazure_membership", "flat_lift",
    "generization_lift", "groebner", "hermitian_gram", "in_schubert_variety",
    "invariants", "is_squarefree", "isotropy_relations",
    "iter_validated_points", "lattice_contains", "lattice_dual",
    "lattice_from_point", "lattice_type", "macaulay_member",
    "nonsmooth_witness", "orthogonal", "pair", "phi_map", "quotient_profile",
    "reduce_poly", "reduced_presentation", "sample_eps_chart_point",
    "sample_general_chart_point", "schubert_cell", "schubert_dimension",
    "smith_form_local", "standard_lattice", "stratum_dimension",
    "substitution_check", "tangent_report", "tau_fiber_check", "validate",
]
