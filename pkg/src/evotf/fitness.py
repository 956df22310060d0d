"""Training-fold cost and held-out accuracy for encoded networks."""

from __future__ import annotations

import numpy as np

from . import _kernels
from .genotype import POSITIVE_MAX, POSITIVE_MIN, GenotypeLayout
from .network import Network, predict_class


class MSEFitness:
    """Mean squared error between network outputs and one-hot targets.

    Called with a raw gene vector; decoding (including clamping of the
    positive scale genes) happens inside the compiled kernel.
    """

    def __init__(self, layout: GenotypeLayout, features: np.ndarray, targets: np.ndarray):
        t = layout.topology
        self.layout = layout
        self.features = np.ascontiguousarray(features, dtype=float)
        self.targets = np.ascontiguousarray(targets, dtype=float)
        if self.features.shape != (self.targets.shape[0], t.n_inputs) or self.targets.shape[1] != t.n_outputs:
            raise ValueError(f"data shapes {self.features.shape}/{self.targets.shape} do not fit topology {t}")
        self._args = (
            _kernels.KIND_CODES[layout.kind],
            layout.kind.n_params,
        )
        self._dims = (t.n_inputs, t.n_hidden, t.n_outputs)
        self._shape = (layout.total,)

    def __call__(self, genes: np.ndarray) -> float:
        genes = np.asarray(genes, dtype=float)
        if genes.shape != self._shape:
            raise ValueError(f"expected {self._shape[0]} genes, got shape {genes.shape}")
        code, k = self._args
        return _kernels.mse_genes(code, k, genes, *self._dims, self.features, self.targets, POSITIVE_MIN, POSITIVE_MAX)


def accuracy(net: Network, features: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of samples whose arg-max output matches the label."""
    return float(np.mean(predict_class(net, features) == labels))
