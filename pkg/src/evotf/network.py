"""Three-layer feed-forward network with transfer functions at active nodes.

Each active node ``j`` computes ``phi_j(sum_i w_ji * x_i - b_j)``; note the
bias is subtracted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .transfer import TransferKind, TransferSpec, activate

FORMAT_HEADER = "# evotf network v1"


@dataclass(frozen=True)
class NetworkTopology:
    n_inputs: int
    n_hidden: int
    n_outputs: int

    def __post_init__(self):
        for name in ("n_inputs", "n_hidden", "n_outputs"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")

    def __str__(self):
        return f"{self.n_inputs}-{self.n_hidden}-{self.n_outputs}"


def _specs_to_params(specs, n_nodes):
    specs = tuple(specs)
    if len(specs) != n_nodes:
        raise ValueError(f"expected {n_nodes} transfer specs, got {len(specs)}")
    kinds = {s.kind for s in specs}
    if len(kinds) != 1:
        raise ValueError(f"network nodes must share one transfer family, got {sorted(k.value for k in kinds)}")
    kind = kinds.pop()
    params = np.array([s.params for s in specs], dtype=float).reshape(n_nodes, kind.n_params)
    return kind, params


@dataclass(frozen=True, eq=False)
class Network:
    """Weights, biases and per-node transfer parameters of one network.

    Transfer parameters are stored as ``(n_nodes, n_params)`` arrays for
    fast evaluation; :attr:`hidden_tf` / :attr:`output_tf` expose them as
    :class:`TransferSpec` lists.
    """

    topology: NetworkTopology
    kind: TransferKind
    hidden_weights: np.ndarray
    hidden_biases: np.ndarray
    output_weights: np.ndarray
    output_biases: np.ndarray
    hidden_params: np.ndarray = field(default=None)
    output_params: np.ndarray = field(default=None)

    def __post_init__(self):
        t = self.topology
        kind = TransferKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        k = kind.n_params
        if self.hidden_params is None:
            object.__setattr__(self, "hidden_params", np.empty((t.n_hidden, 0)))
        if self.output_params is None:
            object.__setattr__(self, "output_params", np.empty((t.n_outputs, 0)))
        shapes = {
            "hidden_weights": (t.n_hidden, t.n_inputs),
            "hidden_biases": (t.n_hidden,),
            "output_weights": (t.n_outputs, t.n_hidden),
            "output_biases": (t.n_outputs,),
            "hidden_params": (t.n_hidden, k),
            "output_params": (t.n_outputs, k),
        }
        for name, shape in shapes.items():
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            object.__setattr__(self, name, arr)
        # Validates domain constraints (Gaussian sigma != 0, Beta positivity).
        self.hidden_tf
        self.output_tf

    @classmethod
    def from_specs(cls, topology, hidden_weights, hidden_biases, output_weights, output_biases, hidden_tf, output_tf):
        """Build a network from per-node :class:`TransferSpec` lists.

        Raises:
            ValueError: if the specs mix transfer families.
        """
        kind_h, hp = _specs_to_params(hidden_tf, topology.n_hidden)
        kind_o, op = _specs_to_params(output_tf, topology.n_outputs)
        if kind_h is not kind_o:
            raise ValueError(f"hidden ({kind_h.label}) and output ({kind_o.label}) transfer families differ")
        return cls(topology, kind_h, hidden_weights, hidden_biases, output_weights, output_biases, hp, op)

    @property
    def hidden_tf(self) -> list[TransferSpec]:
        return [TransferSpec(self.kind, tuple(row)) for row in self.hidden_params]

    @property
    def output_tf(self) -> list[TransferSpec]:
        return [TransferSpec(self.kind, tuple(row)) for row in self.output_params]

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.topology == other.topology
            and self.kind is other.kind
            and all(
                np.array_equal(getattr(self, name), getattr(other, name))
                for name in (
                    "hidden_weights",
                    "hidden_biases",
                    "output_weights",
                    "output_biases",
                    "hidden_params",
                    "output_params",
                )
            )
        )

    __hash__ = None


def forward_arrays(kind, x, w_h, b_h, p_h, w_o, b_o, p_o):
    """Forward pass on raw arrays; ``x`` is ``(batch, n_inputs)``."""
    hidden = activate(kind, x @ w_h.T - b_h, p_h)
    return activate(kind, hidden @ w_o.T - b_o, p_o)


def forward(net: Network, x) -> np.ndarray:
    """Output activations for one input vector or a batch of rows.

    Raises:
        ValueError: if the trailing dimension of ``x`` is not ``n_inputs``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim not in (1, 2) or x.shape[-1] != net.topology.n_inputs:
        raise ValueError(f"expected input with {net.topology.n_inputs} features, got shape {x.shape}")
    single = x.ndim == 1
    out = forward_arrays(
        net.kind,
        np.atleast_2d(x),
        net.hidden_weights,
        net.hidden_biases,
        net.hidden_params,
        net.output_weights,
        net.output_biases,
        net.output_params,
    )
    return out[0] if single else out


def predict_class(net: Network, x):
    """Index of the largest output (lowest index wins ties); batched if ``x`` is 2-D."""
    return np.argmax(forward(net, x), axis=-1)


# -- text serialisation -------------------------------------------------------


def _write_block(lines, name, arr):
    arr = np.atleast_2d(arr)
    lines.append(f"{name} {arr.shape[0]} {arr.shape[1]}")
    for row in arr:
        lines.append(" ".join(repr(float(v)) for v in row))


def dumps_network(net: Network, scaling=None) -> str:
    """Render ``net`` in the plain-text model format.

    ``scaling`` is an optional ``(minimum, span)`` pair of per-feature
    arrays describing the input normalisation the network was trained with.
    """
    lines = [FORMAT_HEADER, f"kind {net.kind.value}"]
    t = net.topology
    lines.append(f"topology {t.n_inputs} {t.n_hidden} {t.n_outputs}")
    _write_block(lines, "hidden_weights", net.hidden_weights)
    _write_block(lines, "hidden_biases", net.hidden_biases[None, :])
    _write_block(lines, "hidden_params", net.hidden_params.T)
    _write_block(lines, "output_weights", net.output_weights)
    _write_block(lines, "output_biases", net.output_biases[None, :])
    _write_block(lines, "output_params", net.output_params.T)
    if scaling is not None:
        lo, span = scaling
        _write_block(lines, "input_min", np.asarray(lo)[None, :])
        _write_block(lines, "input_span", np.asarray(span)[None, :])
    return "\n".join(lines) + "\n"


def loads_network(text: str):
    """Parse the plain-text model format; returns ``(network, scaling)``."""
    rows = [ln.strip() for ln in text.splitlines()]
    if not rows or rows[0] != FORMAT_HEADER:
        raise ValueError("not an evotf network file (missing header)")
    rows = [ln for ln in rows[1:] if ln and not ln.startswith("#")]
    header = {}
    blocks = {}
    i = 0
    while i < len(rows):
        parts = rows[i].split()
        if parts[0] in ("kind", "topology"):
            header[parts[0]] = parts[1:]
            i += 1
            continue
        if len(parts) != 3:
            raise ValueError(f"malformed block header {rows[i]!r}")
        name, n_rows, n_cols = parts[0], int(parts[1]), int(parts[2])
        data = []
        for r in rows[i + 1 : i + 1 + n_rows]:
            vals = [float(v) for v in r.split()]
            if len(vals) != n_cols:
                raise ValueError(f"block {name}: expected {n_cols} values per row, got {len(vals)}")
            data.append(vals)
        if len(data) != n_rows:
            raise ValueError(f"block {name}: expected {n_rows} rows, got {len(data)}")
        blocks[name] = np.array(data, dtype=float).reshape(n_rows, n_cols)
        i += 1 + n_rows
    kind = TransferKind.parse(header["kind"][0])
    topology = NetworkTopology(*(int(v) for v in header["topology"]))
    net = Network(
        topology,
        kind,
        blocks["hidden_weights"],
        blocks["hidden_biases"][0],
        blocks["output_weights"],
        blocks["output_biases"][0],
        blocks["hidden_params"].T.reshape(topology.n_hidden, kind.n_params),
        blocks["output_params"].T.reshape(topology.n_outputs, kind.n_params),
    )
    scaling = None
    if "input_min" in blocks:
        scaling = (blocks["input_min"][0], blocks["input_span"][0])
    return net, scaling


def save_network(net: Network, path, scaling=None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_network(net, scaling))


def load_network(path):
    return loads_network(Path(path).read_text())
