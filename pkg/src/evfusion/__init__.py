"""Subjective-logic opinion fusion and evidential multimodal classification."""

from .data import (DataError, MultimodalBatch, SyntheticSpec, generate_synthetic,
                   inject_conflict, load_feature_csv, write_feature_csv)
from .experiment import ExperimentConfig, ExperimentReport, evaluate, run_experiment
from .fusion import (METHODS, ConflictMatrix, AgreementMatrix, Diagnostics, DiscountFactors,
                     FusionError, TotalConflictError, agreement_matrix,
                     baf_evidence_sequential, conflict_matrix, degree_of_conflict,
                     discount_factors, discount_opinion, fuse, fuse_baf_pair,
                     fuse_baf_sequential, fuse_bcf, fuse_cbf, fuse_dbf, fuse_gbaf,
                     gbaf_evidence)
from .losses import annealing_coef, loss_ace, loss_consistency, loss_kl
from .metrics import accuracy, roc_auc
from .network import EvidentialNetwork
from .opinion import (DogmaticOpinionError, EvidenceVector, OpinionError,
                      ProjectedDistribution, SubjectiveOpinion, dirichlet_mean,
                      evidence_from_opinion, opinion_from_evidence, projected_probabilities,
                      validate_opinion)
from .train import LossBreakdown, TrainConfig, TrainingError, total_loss, train

__all__ = [
    "accuracy",
    "agreement_matrix",
    "AgreementMatrix",
    "annealing_coef",
    "baf_evidence_sequential",
    "conflict_matrix",
    "ConflictMatrix",
    "DataError",
    "degree_of_conflict",
    "Diagnostics",
    "dirichlet_mean",
    "discount_factors",
    "discount_opinion",
    "DiscountFactors",
    "DogmaticOpinionError",
    "evaluate",
    "evidence_from_opinion",
    "EvidenceVector",
    "EvidentialNetwork",
    "ExperimentConfig",
    "ExperimentReport",
    "fuse",
    "fuse_baf_pair",
    "fuse_baf_sequential",
    "fuse_bcf",
    "fuse_cbf",
    "fuse_dbf",
    "fuse_gbaf",
    "FusionError",
    "gbaf_evidence",
    "generate_synthetic",
    "inject_conflict",
    "load_feature_csv",
    "loss_ace",
    "loss_consistency",
    "loss_kl",
    "LossBreakdown",
    "METHODS",
    "MultimodalBatch",
    "opinion_from_evidence",
    "OpinionError",
    "projected_probabilities",
    "ProjectedDistribution",
    "roc_auc",
    "run_experiment",
    "SubjectiveOpinion",
    "SyntheticSpec",
    "total_loss",
    "TotalConflictError",
    "train",
    "TrainConfig",
    "TrainingError",
    "validate_opinion",
    "write_feature_csv",
]

__version__ = "0.1.0"
