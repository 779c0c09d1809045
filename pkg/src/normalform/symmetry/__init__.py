from .core import (
    OrbitType,
    SliceData,
    Stabilizer,
    commutation_residual,
    haar_average_matrix,
    invariance_residual,
    invariant_complement,
    linear_slice,
    orbit_type_leq,
    orbit_type_of,
    orbit_type_table,
    stabilizer_of,
)
from .equivariant import (
    EquivariantNormalFormData,
    EquivariantResult,
    equivariance_residual,
    equivariant_normal_form,
    equivariant_normal_form_fixed_point,
    tube_inverse,
)
from .groups import FiniteGroup, TorusGroup
from .lattice import hermite_normal_form, lattice_contains, smith_normal_form
from .reps import FiniteRep, GroupAction, SubRep, TorusRep, trivial_rep

__all__ = [
    "OrbitType",
    "SliceData",
    "Stabilizer",
    "commutation_residual",
    "haar_average_matrix",
    "invariance_residual",
    "invariant_complement",
    "linear_slice",
    "orbit_type_leq",
    "orbit_type_of",
    "orbit_type_table",
    "stabilizer_of",
    "EquivariantNormalFormData",
    "EquivariantResult",
    "equivariance_residual",
    "equivariant_normal_form",
    "equivariant_normal_form_fixed_point",
    "tube_inverse",
    "FiniteGroup",
    "TorusGroup",
    "hermite_normal_form",
    "lattice_contains",
    "smith_normal_form",
    "FiniteRep",
    "GroupAction",
    "SubRep",
    "TorusRep",
    "trivial_rep",
]
