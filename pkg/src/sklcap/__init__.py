"""Symmetrized-KL channel capacity: Max-SKL solver, baselines and the Gibbs channel."""

from .channels import (
    DiscreteChannel,
    as_prob_vector,
    load_channel,
    make_bac,
    make_binomial,
    make_bsc,
    parse_grid,
    save_channel,
)
from .errors import DomainError, InfiniteDivergenceError, ShapeError, SklcapError, ValidationError
from .infomeasures import (
    DivergenceMatrix,
    NonConcavityCertificate,
    bsc_capacity_closed_form,
    find_nonconcavity_certificate,
    gaussian_kl,
    i_skl_direct,
    i_skl_pairwise,
    kl,
    kl_matrix,
    lautum_information,
    mutual_information,
    tv,
)
from .solvers import (
    SolveOptions,
    SolveReport,
    blahut_arimoto,
    eigen_baseline,
    grid_oracle,
    max_skl,
    max_skl_step,
    power_baseline,
    power_iteration,
)

__version__ = "0.1.0"
