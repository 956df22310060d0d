"""Parametric transfer (activation) functions for active nodes.

Every ``eval_*`` function accepts scalars or numpy arrays and broadcasts
its parameters against ``x``, so the network can evaluate a whole layer
(one parameter row per node) in a single call.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

EXP_CLIP = 500.0

SQRT_2PI = math.sqrt(2.0 * math.pi)


class TransferKind(str, enum.Enum):
    SIGFIX = "sigfix"
    SIGADP = "sigadp"
    TANHFIX = "tanhfix"
    TANHADP = "tanhadp"
    GAUSSIAN = "gaussian"
    BETA = "beta"

    @property
    def n_params(self) -> int:
        """Number of optimisable parameters a node of this kind carries."""
        return _N_PARAMS[self]

    @property
    def is_fixed(self) -> bool:
        return self in (TransferKind.SIGFIX, TransferKind.TANHFIX)

    @property
    def label(self) -> str:
        """Display name used in result tables (``SigAdp``, ``Beta``...)."""
        return _LABELS[self]

    @classmethod
    def parse(cls, value: "str | TransferKind") -> "TransferKind":
        if isinstance(value, TransferKind):
            return value
        try:
            return cls(value.lower())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown transfer function {value!r} (expected one of {names})") from None


_N_PARAMS = {
    TransferKind.SIGFIX: 0,
    TransferKind.SIGADP: 2,
    TransferKind.TANHFIX: 0,
    TransferKind.TANHADP: 2,
    TransferKind.GAUSSIAN: 2,
    TransferKind.BETA: 4,
}

_LABELS = {
    TransferKind.SIGFIX: "SigFix",
    TransferKind.SIGADP: "SigAdp",
    TransferKind.TANHFIX: "TanhFix",
    TransferKind.TANHADP: "TanhAdp",
    TransferKind.GAUSSIAN: "Gaussian",
    TransferKind.BETA: "Beta",
}

# Parameter names per kind, in storage order.
PARAM_NAMES = {
    TransferKind.SIGFIX: (),
    TransferKind.SIGADP: ("lambda", "theta"),
    TransferKind.TANHFIX: (),
    TransferKind.TANHADP: ("lambda", "theta"),
    TransferKind.GAUSSIAN: ("sigma", "mu"),
    TransferKind.BETA: ("theta", "sigma", "p", "q"),
}


@dataclass(frozen=True)
class TransferSpec:
    """Function family of one node together with its live parameter values."""

    kind: TransferKind
    params: tuple[float, ...] = ()

    def __post_init__(self):
        kind = TransferKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "params", params)
        if len(params) != kind.n_params:
            raise ValueError(f"{kind.label} takes {kind.n_params} parameters, got {len(params)}")
        if not all(math.isfinite(p) for p in params):
            raise ValueError(f"non-finite transfer parameters {params}")
        if kind is TransferKind.GAUSSIAN and params[0] == 0.0:
            raise ValueError("Gaussian width sigma must be non-zero")
        if kind is TransferKind.BETA and min(params[1:]) <= 0.0:
            raise ValueError(f"Beta requires sigma, p, q > 0, got {params[1:]}")


def _clip(z):
    return np.clip(z, -EXP_CLIP, EXP_CLIP)


def eval_logistic(x, lam=1.0, theta=0.0):
    """Unipolar sigmoid ``1 / (1 + exp(-lam * (x - theta)))``."""
    return 1.0 / (1.0 + np.exp(-_clip(lam * (x - theta))))


def eval_tanh(x, lam=1.0, theta=0.0):
    """Bipolar hyperbolic tangent with steepness ``lam`` and centre ``theta``."""
    return np.tanh(_clip(lam * (x - theta)))


def eval_gaussian(x, sigma, mu):
    """Normal density with width ``sigma`` centred on ``mu``.

    Raises:
        ValueError: if any ``sigma`` is zero.
    """
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma == 0.0):
        raise ValueError("Gaussian width sigma must be non-zero")
    d = x - mu
    return np.exp(-_clip(d * d / (2.0 * sigma * sigma))) / (SQRT_2PI * sigma)


def beta_support(theta, sigma, p, q):
    """Return the open support interval ``(x0, x1)`` of the Beta basis function."""
    x0 = theta - sigma * p / (p + q)
    x1 = theta + sigma * q / (p + q)
    return x0, x1


def eval_beta(x, theta, sigma, p, q):
    """Beta basis function, exactly 0 outside its support and 1 at ``theta``.

    Raises:
        ValueError: if any of ``sigma``, ``p``, ``q`` is not strictly positive.
    """
    sigma = np.asarray(sigma, dtype=float)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(sigma <= 0.0) or np.any(p <= 0.0) or np.any(q <= 0.0):
        raise ValueError("Beta requires sigma, p, q > 0")
    x = np.asarray(x, dtype=float)
    d = (p + q) * (x - theta) / sigma
    a_base = 1.0 + d / p
    b_base = 1.0 - d / q
    x0, x1 = beta_support(theta, sigma, p, q)
    # Test against (x0, x1) too so the support endpoints themselves map to 0
    # despite rounding in the bases.
    inside = (x > x0) & (x < x1) & (a_base > 0.0) & (b_base > 0.0)
    # Bases are positive on the support only; substitute 1 elsewhere so the
    # fractional powers stay real, then zero the result by mask.
    a_base = np.where(inside, a_base, 1.0)
    b_base = np.where(inside, b_base, 1.0)
    out = np.where(inside, a_base**p * b_base**q, 0.0)
    return out if out.ndim else float(out)


def activate(kind: TransferKind, z, params=None):
    """Apply a transfer family to net inputs ``z``.

    ``params`` has one column per parameter (in :data:`PARAM_NAMES` order)
    and broadcasts against ``z``; for a layer of ``n`` nodes pass an
    ``(n, n_params)`` array with ``z`` of shape ``(batch, n)``.
    Fixed kinds ignore ``params``.
    """
    if kind is TransferKind.SIGFIX:
        return eval_logistic(z)
    if kind is TransferKind.TANHFIX:
        return eval_tanh(z)
    params = np.asarray(params, dtype=float)
    cols = [params[..., i] for i in range(kind.n_params)]
    if kind is TransferKind.SIGADP:
        return eval_logistic(z, *cols)
    if kind is TransferKind.TANHADP:
        return eval_tanh(z, *cols)
    if kind is TransferKind.GAUSSIAN:
        return eval_gaussian(z, *cols)
    if kind is TransferKind.BETA:
        return eval_beta(z, *cols)
    raise ValueError(f"unsupported transfer kind {kind!r}")


def eval(spec: TransferSpec, x):  # noqa: A001 - mirrors the per-family eval_* names
    """Evaluate the node function described by ``spec`` at ``x``."""
    out = activate(spec.kind, x, spec.params)
    return float(out) if np.ndim(out) == 0 else out


def derivative_from_output(kind: TransferKind, y):
    """Derivative of a fixed transfer function expressed through its output."""
    if kind is TransferKind.SIGFIX:
        return y * (1.0 - y)
    if kind is TransferKind.TANHFIX:
        return 1.0 - y * y
    raise ValueError(f"derivatives are only defined for SigFix and TanhFix, not {kind.label}")


def eval_derivative(spec: TransferSpec, x):
    """``d phi / d x`` for the fixed logistic and tanh functions.

    Raises:
        ValueError: for adaptive, Gaussian or Beta kinds.
    """
    if not spec.kind.is_fixed:
        raise ValueError(f"derivatives are only defined for SigFix and TanhFix, not {spec.kind.label}")
    out = derivative_from_output(spec.kind, activate(spec.kind, x))
    return float(out) if np.ndim(out) == 0 else out
