"""cfmoll: characteristic-function algebra, Gaussian mollification,
Fourier-inversion density recovery, and weak-convergence diagnostics."""

from .charfn import CharFn, convolve, gaussian_mollify_cf, make_cf
from .converge import (
    ConvergenceReport,
    cf_sup_error,
    convergence_certificate,
    gaussian_tail_prob,
    l1_distance,
    mass_in_box,
    tv_distance,
)
from .errors import CfmollError, NumericFailure, ValidationError
from .grids import (
    DensityField,
    Grid,
    MollificationParams,
    read_density_csv,
    write_density_csv,
)
from .mollify import (
    cf_l1_bound,
    invert_density_at,
    invert_density_grid,
    mollified_density_at,
    mollified_density_grid,
    truncation_radius,
)
from .montecarlo import (
    SampleBatch,
    empirical_cf,
    mc_tail_prob,
    mollified_histogram,
    sample,
    write_batch_csv,
)
from .specs import (
    AffineMap,
    Convolution,
    DistributionSpec,
    Empirical,
    Gaussian,
    Laplace1D,
    PointMass,
    Product,
    StandardizedIIDSum,
    UniformBox,
    load_spec,
    save_spec,
    spec_from_dict,
    spec_to_dict,
)

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "CfmollError",
    "CharFn",
    "ConvergenceReport",
    "Convolution",
    "DensityField",
    "DistributionSpec",
    "Empirical",
    "Gaussian",
    "Grid",
    "Laplace1D",
    "MollificationParams",
    "NumericFailure",
    "PointMass",
    "Product",
    "SampleBatch",
    "StandardizedIIDSum",
    "UniformBox",
    "ValidationError",
    "cf_l1_bound",
    "cf_sup_error",
    "convergence_certificate",
    "convolve",
    "empirical_cf",
    "gaussian_mollify_cf",
    "gaussian_tail_prob",
    "invert_density_at",
    "invert_density_grid",
    "l1_distance",
    "load_spec",
    "make_cf",
    "mass_in_box",
    "mc_tail_prob",
    "mollified_density_at",
    "mollified_density_grid",
    "mollified_histogram",
    "read_density_csv",
    "sample",
    "save_spec",
    "spec_from_dict",
    "spec_to_dict",
    "truncation_radius",
    "tv_distance",
    "write_batch_csv",
    "write_density_csv",
]
