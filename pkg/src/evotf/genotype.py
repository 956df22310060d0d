"""Flat real-vector encoding of a network and its transfer parameters.

Gene order is fixed::

    [hidden weights (row-major) | output weights (row-major) |
     hidden biases | output biases |
     hidden TF params (node-major) | output TF params (node-major)]

Scale parameters that must be positive (Gaussian sigma; Beta sigma, p, q)
are clamped to ``[POSITIVE_MIN, POSITIVE_MAX]`` when decoding, so every
finite gene vector decodes to a valid network. Weights, biases, steepness
and centre genes pass through untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .network import Network, NetworkTopology
from .transfer import TransferKind

POSITIVE_MIN = 0.05
POSITIVE_MAX = 10.0

INIT_LOW = -1.5
INIT_HIGH = 1.5

# Columns of the per-node parameter block that are clamped at decode time.
_POSITIVE_COLUMNS = {
    TransferKind.GAUSSIAN: (0,),
    TransferKind.BETA: (1, 2, 3),
}


@dataclass(frozen=True)
class GenotypeLayout:
    topology: NetworkTopology
    kind: TransferKind

    @property
    def n_weight_genes(self) -> int:
        t = self.topology
        return t.n_hidden * t.n_inputs + t.n_outputs * t.n_hidden

    @property
    def n_bias_genes(self) -> int:
        return self.topology.n_hidden + self.topology.n_outputs

    @property
    def n_tf_genes(self) -> int:
        return (self.topology.n_hidden + self.topology.n_outputs) * self.kind.n_params

    @property
    def total(self) -> int:
        return self.n_weight_genes + self.n_bias_genes + self.n_tf_genes

    @cached_property
    def _slices(self):
        t = self.topology
        k = self.kind.n_params
        sizes = [
            ("hidden_weights", t.n_hidden * t.n_inputs),
            ("output_weights", t.n_outputs * t.n_hidden),
            ("hidden_biases", t.n_hidden),
            ("output_biases", t.n_outputs),
            ("hidden_params", t.n_hidden * k),
            ("output_params", t.n_outputs * k),
        ]
        out, start = {}, 0
        for name, size in sizes:
            out[name] = slice(start, start + size)
            start += size
        return out

    def slice_of(self, name: str) -> slice:
        """Gene range holding one block (``hidden_weights``, ``output_params``...)."""
        return self._slices[name]

    def split(self, genes):
        """Views of ``genes`` as network arrays, with positive scales clamped.

        Returns ``(w_h, b_h, p_h, w_o, b_o, p_o)`` in the order expected by
        :func:`evotf.network.forward_arrays`.
        """
        t = self.topology
        k = self.kind.n_params
        s = self._slices
        w_h = genes[s["hidden_weights"]].reshape(t.n_hidden, t.n_inputs)
        w_o = genes[s["output_weights"]].reshape(t.n_outputs, t.n_hidden)
        b_h = genes[s["hidden_biases"]]
        b_o = genes[s["output_biases"]]
        p_h = genes[s["hidden_params"]].reshape(t.n_hidden, k)
        p_o = genes[s["output_params"]].reshape(t.n_outputs, k)
        p_h = clamp_params(self.kind, p_h)
        p_o = clamp_params(self.kind, p_o)
        return w_h, b_h, p_h, w_o, b_o, p_o


def layout_for(topology: NetworkTopology, kind) -> GenotypeLayout:
    return GenotypeLayout(topology, TransferKind.parse(kind))


def clamp_params(kind: TransferKind, params: np.ndarray) -> np.ndarray:
    """Copy of an ``(n_nodes, n_params)`` block with positive scales clamped."""
    cols = _POSITIVE_COLUMNS.get(kind)
    if not cols:
        return params
    out = np.array(params, dtype=float)
    out[:, cols] = np.clip(out[:, cols], POSITIVE_MIN, POSITIVE_MAX)
    return out


@dataclass(frozen=True, eq=False)
class Genotype:
    genes: np.ndarray
    layout: GenotypeLayout

    def __post_init__(self):
        genes = np.array(self.genes, dtype=float)
        if genes.shape != (self.layout.total,):
            raise ValueError(f"genotype has {genes.size} genes, layout expects {self.layout.total}")
        if not np.all(np.isfinite(genes)):
            raise ValueError("genotype contains non-finite genes")
        genes.flags.writeable = False
        object.__setattr__(self, "genes", genes)

    def __eq__(self, other):
        if not isinstance(other, Genotype):
            return NotImplemented
        return self.layout == other.layout and np.array_equal(self.genes, other.genes)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GeneBounds:
    """Per-gene ``(lo, hi)`` box used for initialisation and scout resets."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float)
        hi = np.array(self.hi, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError(f"bounds shapes differ: {lo.shape} vs {hi.shape}")
        if not np.all(lo < hi):
            raise ValueError("every gene needs lo < hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def uniform(cls, n: int, lo: float = INIT_LOW, hi: float = INIT_HIGH) -> "GeneBounds":
        return cls(np.full(n, lo), np.full(n, hi))

    def __len__(self):
        return self.lo.size

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        shape = self.lo.shape if size is None else (size, *self.lo.shape)
        return rng.uniform(self.lo, self.hi, size=shape)


def decode(g: Genotype) -> Network:
    layout = g.layout
    w_h, b_h, p_h, w_o, b_o, p_o = layout.split(g.genes)
    return Network(layout.topology, layout.kind, w_h, b_h, w_o, b_o, p_h, p_o)


def encode(net: Network) -> Genotype:
    """Inverse of :func:`decode` wherever no clamp fires."""
    kinds = {s.kind for s in net.hidden_tf + net.output_tf} or {net.kind}
    if len(kinds) != 1:
        raise ValueError("cannot encode a network that mixes transfer families")
    layout = layout_for(net.topology, net.kind)
    genes = np.concatenate(
        [
            net.hidden_weights.ravel(),
            net.output_weights.ravel(),
            net.hidden_biases,
            net.output_biases,
            net.hidden_params.ravel(),
            net.output_params.ravel(),
        ]
    )
    return Genotype(genes, layout)


def random_genotype(layout: GenotypeLayout, bounds: GeneBounds, rng: np.random.Generator) -> Genotype:
    if len(bounds) != layout.total:
        raise ValueError(f"bounds cover {len(bounds)} genes, layout has {layout.total}")
    return Genotype(bounds.sample(rng), layout)
