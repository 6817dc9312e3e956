"""Multilinear common component analysis (MCCA) for grouped tensor data.

The estimators follow the scikit-learn API: ``fit(X, y)`` takes a stack of
samples ``X`` of shape ``(N, P_1, ..., P_M)`` and group labels ``y``.
"""
from .baselines import CCA, MPCA, PCA
from .covariance import GroupedDataset, ModeCovariances, full_covariance, mean_tensor, mode_covariance
from .estimator import MCCA
from .exceptions import ConvergenceError, FormatError, ShapeError
from .linalg import principal_angles, sym_eig
from .metrics import CompressionRecord, compression_ratio, param_count, reconstruct, rer, residual
from .serialization import load_model, load_tensor, save_model, save_tensor
from .solver import FitConfig, FitReport, MccaModel, contraction_ratios
from .tensor import fold, frobenius_norm, kronecker, mode_product, unfold

__version__ = "0.1.0"

__all__ = [
    "CCA", "MCCA", "MPCA", "PCA",
    "CompressionRecord", "ConvergenceError", "FitConfig", "FitReport", "FormatError", "GroupedDataset",
    "MccaModel", "ModeCovariances", "ShapeError",
    "compression_ratio", "contraction_ratios", "fold", "frobenius_norm", "full_covariance", "kronecker",
    "load_model", "load_tensor", "mean_tensor", "mode_covariance", "mode_product", "param_count",
    "principal_angles", "reconstruct", "rer", "residual", "save_model", "save_tensor", "sym_eig", "unfold",
]
