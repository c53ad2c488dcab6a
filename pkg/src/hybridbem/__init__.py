"""Hybrid boundary element solver for acoustic scattering over a rigid wall.

The wall is handled by a windowed layer potential plus a Sommerfeld-type
Fourier integral on a deformed contour; locally indented walls (cavities) are
coupled through a virtual boundary.
"""

__version__ = "0.1.0"

from .cavity import (  # noqa: E402
    CavityDensities,
    CavityProblem,
    Region,
    cavity_residuals,
    classify_point,
    eval_total_field_cavity,
    flat_cavity,
    half_disc_cavity,
    intensity_sum,
    resonator_cavity,
    solve_cavity,
    solve_cavity_with_scatterers,
)
from .geometry import Mesh, Panel, Role, WaveParams, discretize_circle, discretize_segment  # noqa: E402
from .halfspace import (  # noqa: E402
    DensitySolution,
    HalfspaceProblem,
    SolverError,
    assemble_and_solve,
    eval_total_field,
    make_wall,
    solve_halfspace_empty,
)
from .oracles import ErrorReport, image_bem_scatterer, image_field_empty, relative_error  # noqa: E402
from .sommerfeld import TruncationParams  # noqa: E402
