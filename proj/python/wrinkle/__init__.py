"""Duality toolkit: planar continuum mechanics <-> evolving immersed surfaces.

The heavy lifting lives in the compiled extension ``wrinkle._core``; this
package re-exports its public surface.
"""

from wrinkle._core import (
    Grid2D,
    RuntimeFault,
    ValidationError,
    brioschi_curvature,
    embed_flat_chart,
    fluid_from_lmn,
    gauss_residual,
    lmn_from_fluid,
    shear_surface,
    taylor_green,
    wave_classification,
    write_mesh,
)

__all__ = [
    "Grid2D",
    "RuntimeFault",
    "ValidationError",
    "brioschi_curvature",
    "embed_flat_chart",
    "fluid_from_lmn",
    "gauss_residual",
    "lmn_from_fluid",
    "shear_surface",
    "taylor_green",
    "wave_classification",
    "write_mesh",
]
