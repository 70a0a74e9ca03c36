"""Per-point LSKUM mathematics."""
from .kernels import RESIDUAL_MODES, Block
from .physics import (
    ConservedState,
    FluxVector,
    GasModel,
    PrimitiveState,
    QState,
    conserved_from_primitives,
    full_flux,
    kfvs_split_flux,
    ls_derivatives,
    primitives_from_conserved,
    primitives_from_q,
    q_from_primitives,
    stencil_determinant,
)
from .pointwise import flux_residual, local_timestep, q_derivatives, residue_norm, state_update

__all__ = [
    "RESIDUAL_MODES", "Block", "ConservedState", "FluxVector", "GasModel", "PrimitiveState",
    "QState", "conserved_from_primitives", "full_flux", "kfvs_split_flux", "ls_derivatives",
    "primitives_from_conserved", "primitives_from_q", "q_from_primitives",
    "stencil_determinant", "flux_residual", "local_timestep", "q_derivatives",
    "residue_norm", "state_update",
]
