"""Non-parametric significance tests for groups of inputs of a black-box
function, based on the empirical process ``xi = m1 - m1_u * m0_ubar``."""

__version__ = "0.1.0"

from .core import (
    Design,
    DesignProvenance,
    MomentTriple,
    Sample,
    SubsetMask,
    VacuousHypothesisError,
    bounding_box_design,
    empirical_moment,
    uniform_box_design,
    xi_hat,
    xi_hat_vector,
)
from .covariance import CovarianceBundle, omega_hat, sigma_hat, splice
from .spectrum import SpectralDecomposition, RegularizedInverse, eigh, threshold_rule, tsvd_inverse
from .testing import (
    DegenerateTestError,
    Method,
    TestReport,
    chi2_cdf,
    ep_test,
    pvalue_weighted_chi2,
    stat_euclidean,
    stat_normalized,
)
from .selection import Selector, nested_test
