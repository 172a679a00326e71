"""Choosing the number of k-means clusters by cross-validation."""

__version__ = "0.1.0"

from .errors import (
    ClustCVError,
    DegenerateCovarianceError,
    InfeasibleConfigurationError,
    InvalidArgumentError,
    InvalidIntervalError,
    MissingClassError,
    UnsupportedError,
)
from .matrix import (
    DataMatrix,
    SymmetricEig,
    haar_orthogonal,
    pooled_noise_covariance,
    symmetric_eig,
    whiten_transform,
)
from .kmeans import (
    CentroidClassifier,
    KMeansModel,
    KMeansParams,
    classifier_fit,
    classifier_predict,
    classifier_predict_many,
    dispersion_curve,
    kmeans_fit,
    kmeans_fit_missing,
)
from .gabriel import (
    CvReport,
    FoldPlan,
    FoldView,
    fold_cv_error,
    gabriel_select_k,
    gabriel_select_k_corrected,
    plan_folds,
)
from .wold import SpeckledPlan, plan_speckled, wold_cv_error, wold_select_k
