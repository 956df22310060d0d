"""Feed-forward networks whose weights and per-node transfer-function
parameters are trained together by ABC, PSO or DE, with a backpropagation
baseline and a cross-validation experiment runner."""

from .backprop import BpConfig, train_bp
from .data import Dataset, FoldPlan, load_dataset, normalize, stratified_folds
from .experiment import ExperimentConfig, ResultRow, run_experiment, run_grid
from .genotype import GeneBounds, Genotype, GenotypeLayout, decode, encode, layout_for
from .metaheuristics import OptimizerConfig, RunResult, optimize
from .network import Network, NetworkTopology, forward, predict_class
from .transfer import TransferKind, TransferSpec

__all__ = [
    "BpConfig",
    "Dataset",
    "ExperimentConfig",
    "FoldPlan",
    "GeneBounds",
    "Genotype",
    "GenotypeLayout",
    "Network",
    "NetworkTopology",
    "OptimizerConfig",
    "ResultRow",
    "RunResult",
    "TransferKind",
    "TransferSpec",
    "decode",
    "encode",
    "forward",
    "layout_for",
    "load_dataset",
    "normalize",
    "optimize",
    "predict_class",
    "run_experiment",
    "run_grid",
    "stratified_folds",
    "train_bp",
]
