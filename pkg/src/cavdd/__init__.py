"""Field-mediated magnetic dipole-dipole coupling, in free space and in a
lossless rectangular 3D cavity, evaluated through the vector-potential Green
tensor with a screened image/mode split."""

from .core import (CavddError, CavityGeometry, Constants, DegenerateSeparationError,
                   Dipole, EwaldParams, GeometryError, LevelPair, ResonanceError,
                   ValidationError, transition_frequency, vec3)
from .effective import SingleModeSystem, first_order_residual, fn_transform, g_from_zeta
from .ewald import (GreenTensor, gamma_cutoff, green_a1, green_a2, green_tensor,
                    image_lattice, pair_interaction_cavity, screened_kernel)
from .freespace import green_a_free, pair_interaction_free, v_retarded, v_static
from .interactions import InteractionTable, TermEntry, classify_term
from .kernels import BACKEND as KERNEL_BACKEND
from .modes import (ModeIndex, green_a_mode_sum, mode_curl, mode_function, mode_table,
                    near_resonant_estimate, v_mode_sum, zeta, zeta_components)

__version__ = "0.1.0"

__all__ = [
    "CavddError", "CavityGeometry", "Constants", "DegenerateSeparationError", "Dipole",
    "EwaldParams", "GeometryError", "GreenTensor", "InteractionTable", "KERNEL_BACKEND",
    "LevelPair", "ModeIndex", "ResonanceError", "SingleModeSystem", "TermEntry",
    "ValidationError", "classify_term", "first_order_residual", "fn_transform",
    "g_from_zeta", "gamma_cutoff", "green_a1", "green_a2", "green_a_free",
    "green_a_mode_sum", "green_tensor", "image_lattice", "mode_curl", "mode_function",
    "mode_table", "near_resonant_estimate", "pair_interaction_cavity",
    "pair_interaction_free", "screened_kernel", "transition_frequency", "v_mode_sum",
    "v_retarded", "v_static", "vec3", "zeta", "zeta_components",
]
