"""Sparse vine copula models selected with BIC-type criteria.

Modules: :mod:`~sparsevine.bicop` (pair-copula families),
:mod:`~sparsevine.structure` (regular vine tree sequences),
:mod:`~sparsevine.criteria` (BIC and mBICV), :mod:`~sparsevine.fit`
(sequential estimation with threshold and truncation selection),
:mod:`~sparsevine.sim` (sampling and the error-rate study),
:mod:`~sparsevine.risk` (ARMA-GARCH margins and Value-at-Risk) and
:mod:`~sparsevine.cli`.
"""

from .bicop import BicopModel, FamilyId
from .criteria import CriterionConfig, CriterionKind, ModelTally
from .errors import (
    ConfigError,
    DegenerateDataWarning,
    DomainError,
    FitError,
    FormatError,
    InputError,
    NumericError,
    StructureError,
    VineError,
)
from .fit import FitConfig, VineModel, evaluate, fit_vine, select_joint, select_threshold, select_truncation
from .persist import load_model, save_model
from .sim import rvine_sample
from .structure import RVineStructure, VineEdge, validate

__version__ = "0.1.0"

__all__ = [
    "BicopModel",
    "FamilyId",
    "CriterionConfig",
    "CriterionKind",
    "ModelTally",
    "ConfigError",
    "DegenerateDataWarning",
    "DomainError",
    "FitError",
    "FormatError",
    "InputError",
    "NumericError",
    "StructureError",
    "VineError",
    "FitConfig",
    "VineModel",
    "evaluate",
    "fit_vine",
    "select_joint",
    "select_threshold",
    "select_truncation",
    "load_model",
    "save_model",
    "rvine_sample",
    "RVineStructure",
    "VineEdge",
    "validate",
]
