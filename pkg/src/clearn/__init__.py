"""C-learning: coherence-function losses, elastic-net coordinate-descent
training, and class-probability calibration for margin classifiers."""
from ._backend import BACKEND
from .calibration import CalibrationFit, PlattFit, ekl, fit_rho, platt_fit, platt_prob, sollich_prob, svm_prob
from .data import Dataset, SplitSpec, gen_disk, gen_sine, load_csv, save_csv, split, true_eta_sine
from .errors import *  # noqa: F401,F403
from .evaluation import MethodSpec, Protocol, ReplicationReport, replicate
from .kernels import KernelSpec, gram, sigma_mean_pairwise, sigma_median_between_classes
from .losses import (
    LossParams,
    SurrogateKind,
    c_loss,
    c_loss_grad,
    c_loss_hess,
    classical_surrogate,
    coherence_grad,
    coherence_v,
    l_loss,
    surrogate,
)
from .metrics import cer, gkl
from .population import (
    FiniteDistribution,
    cond_risk,
    eta_tilde,
    eta_tilde_sign,
    exact_risks,
    f_star,
    log_eta_tilde,
    log_odds_eta_tilde,
    risk_gap,
)
from .solver import (
    KernelModel,
    LinearModel,
    TrainConfig,
    fit_kernel,
    fit_linear,
    fit_svm_libsvm,
    fit_svm_smoothed,
    hinge_objective,
    objective,
    predict_score,
)

__version__ = "0.1.0"
