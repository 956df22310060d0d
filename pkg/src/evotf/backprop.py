"""Online backpropagation with momentum for fixed logistic / tanh networks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .network import Network
from .transfer import TransferKind, activate, derivative_from_output


@dataclass(frozen=True)
class BpConfig:
    learning_rate: float = 0.5
    momentum: float = 0.1
    epochs: int = 1000

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError(f"learning rate must be non-negative, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must lie in [0, 1), got {self.momentum}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")


def _check_kind(net: Network):
    if not net.kind.is_fixed:
        raise ValueError(f"backpropagation supports SigFix and TanhFix only, not {net.kind.label}")


def sample_loss(net: Network, x, t) -> float:
    """Squared error ``0.5 * sum_k (y_k - t_k)**2`` for one sample."""
    h = activate(net.kind, net.hidden_weights @ x - net.hidden_biases)
    y = activate(net.kind, net.output_weights @ h - net.output_biases)
    return 0.5 * float(np.sum((y - t) ** 2))


def gradients(net: Network, x, t) -> dict:
    """Analytic gradient of :func:`sample_loss` for every weight and bias.

    Keys match the :class:`~evotf.network.Network` field names.
    """
    _check_kind(net)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    h = activate(net.kind, net.hidden_weights @ x - net.hidden_biases)
    y = activate(net.kind, net.output_weights @ h - net.output_biases)
    delta_o = (y - t) * derivative_from_output(net.kind, y)
    delta_h = (net.output_weights.T @ delta_o) * derivative_from_output(net.kind, h)
    return {
        "hidden_weights": np.outer(delta_h, x),
        "hidden_biases": -delta_h,
        "output_weights": np.outer(delta_o, h),
        "output_biases": -delta_o,
    }


def epoch_orders(n_samples: int, epochs: int, rng: np.random.Generator) -> np.ndarray:
    """One fresh permutation of the sample indices per epoch."""
    return np.stack([rng.permutation(n_samples) for _ in range(epochs)])


def train_bp(net: Network, features, targets, cfg: BpConfig, rng: np.random.Generator):
    """Train ``net`` by per-sample gradient descent with momentum.

    Each update is ``dw = -eta * dE/dw + m * dw_prev``, with samples
    visited in a fresh ``rng`` permutation every epoch. The input network
    is left untouched.

    Returns:
        ``(trained_network, final_mean_sample_loss)``.

    Raises:
        ValueError: for transfer kinds other than SigFix / TanhFix.
    """
    _check_kind(net)
    X = np.ascontiguousarray(features, dtype=float)
    T = np.ascontiguousarray(targets, dtype=float)
    if X.shape != (T.shape[0], net.topology.n_inputs) or T.shape[1] != net.topology.n_outputs:
        raise ValueError(f"data shapes {X.shape}/{T.shape} do not fit topology {net.topology}")
    w_h = net.hidden_weights.copy()
    b_h = net.hidden_biases.copy()
    w_o = net.output_weights.copy()
    b_o = net.output_biases.copy()
    orders = epoch_orders(X.shape[0], cfg.epochs, rng)
    code = _kernels.KIND_CODES[net.kind]
    loss = _kernels.bp_train(code, X, T, w_h, b_h, w_o, b_o, cfg.learning_rate, cfg.momentum, orders)
    return Network(net.topology, net.kind, w_h, b_h, w_o, b_o), float(loss)


def mean_loss(net: Network, features, targets) -> float:
    _check_kind(net)
    return float(
        _kernels.bp_loss(
            _kernels.KIND_CODES[net.kind],
            np.ascontiguousarray(features, dtype=float),
            np.ascontiguousarray(targets, dtype=float),
            net.hidden_weights,
            net.hidden_biases,
            net.output_weights,
            net.output_biases,
        )
    )


FIXED_KINDS = (TransferKind.SIGFIX, TransferKind.TANHFIX)
