"""Cross-validated experiments over (dataset, algorithm, transfer function).

Seeding: every random stream of a run is derived from the master seed with
``numpy.random.SeedSequence(seed, spawn_key=key)`` and fed to an MT19937
generator. Keys are

* ``(0,)``: the stratified fold plan, shared by all cells;
* ``(1, fold)``: the optimiser run on ``fold``;
* ``(2, fold, restart)``: one backpropagation restart on ``fold``.

Any single fold can be re-run in isolation and cells of a grid share
the same split.
"""

from __future__ import annotations

import configparser
import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .backprop import BpConfig, train_bp
from .data import SCHEMAS, Dataset, FoldPlan, apply_minmax, fit_minmax, load_dataset, stratified_folds
from .fitness import MSEFitness, accuracy
from .genotype import GeneBounds, Genotype, decode, layout_for, random_genotype
from .metaheuristics import OptimizerConfig, make_rng, optimize
from .network import Network, NetworkTopology, save_network
from .transfer import TransferKind

log = logging.getLogger(__name__)

ALGORITHMS = ("bp", "abc", "pso", "de")
METAHEURISTICS = ("abc", "pso", "de")
TRANSFER_FUNCTIONS = tuple(k.value for k in TransferKind)
ALGO_LABELS = {"bp": "BP", "abc": "ABC", "pso": "PSO", "de": "DE"}
DATASET_LABELS = {"iris": "Iris", "wdbc": "wdbc", "wine": "Wine"}

CSV_FIELDS = ("dataset", "function", "algorithm", "seed", "folds", "mean_accuracy", "variance", "fold_accuracies")


def derive_seed(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=key)


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    algorithm: str
    tf: str
    hidden: int = 5
    seed: int = 0
    folds: int = 10
    pop: int = 10
    iters: int = 1000
    trial_limit: int = 100
    c1: float = 2.0
    c2: float = 2.0
    c0_max: float = 1.0
    c0_min: float = 0.0
    cr: float = 0.9
    f: float = 0.7
    de_variant: str = "randtobest1"
    eta: float = 0.5
    momentum: float = 0.1
    bp_restarts: int = 10
    data_dir: str = "data"

    def __post_init__(self):
        if self.dataset not in SCHEMAS:
            raise ValueError(f"unknown dataset {self.dataset!r} (expected one of {', '.join(SCHEMAS)})")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r} (expected one of {', '.join(ALGORITHMS)})")
        kind = TransferKind.parse(self.tf)
        object.__setattr__(self, "tf", kind.value)
        if self.algorithm == "bp" and not kind.is_fixed:
            raise ValueError(f"bp only supports sigfix and tanhfix, not {kind.value}")
        if self.hidden < 1 or self.folds < 2 or self.bp_restarts < 1:
            raise ValueError("hidden >= 1, folds >= 2 and bp_restarts >= 1 are required")
        if self.algorithm == "bp":
            self.bp_config()
        else:
            self.optimizer_config()

    @property
    def kind(self) -> TransferKind:
        return TransferKind(self.tf)

    def optimizer_config(self) -> OptimizerConfig:
        return OptimizerConfig(
            population=self.pop,
            iterations=self.iters,
            trial_limit=self.trial_limit,
            c1=self.c1,
            c2=self.c2,
            c0_max=self.c0_max,
            c0_min=self.c0_min,
            cr=self.cr,
            f=self.f,
            de_variant=self.de_variant,
        )

    def bp_config(self) -> BpConfig:
        return BpConfig(learning_rate=self.eta, momentum=self.momentum, epochs=self.iters)

    @property
    def run_name(self) -> str:
        return f"{self.dataset}_{self.algorithm}_{self.tf}_s{self.seed}"


@dataclass(frozen=True)
class ResultRow:
    """Per-fold accuracies of one (dataset, algorithm, function) cell."""

    dataset: str
    function: str
    algorithm: str
    seed: int
    fold_accuracies: tuple[float, ...]

    @property
    def folds(self) -> int:
        return len(self.fold_accuracies)

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.fold_accuracies))

    @property
    def variance(self) -> float:
        """Population variance (ddof=0) of the fold accuracies."""
        return float(np.var(self.fold_accuracies))


@dataclass
class FoldOutcome:
    accuracy: float
    network: Network
    scaling: tuple
    trace: np.ndarray | None = field(default=None, repr=False)


@lru_cache(maxsize=16)
def _dataset_and_plan(name: str, data_dir: str, folds: int, seed: int) -> tuple[Dataset, FoldPlan]:
    ds = load_dataset(name, data_dir)
    return ds, stratified_folds(ds, folds, derive_seed(seed, 0))


def _fit_bp(cfg: ExperimentConfig, topology, X, Y, fold: int) -> Network:
    """Best of ``bp_restarts`` independent trainings, judged by training loss."""
    layout = layout_for(topology, cfg.kind)
    bounds = GeneBounds.uniform(layout.total)
    best, best_loss = None, np.inf
    for restart in range(cfg.bp_restarts):
        rng = make_rng(derive_seed(cfg.seed, 2, fold, restart))
        start = decode(random_genotype(layout, bounds, rng))
        net, loss = train_bp(start, X, Y, cfg.bp_config(), rng)
        if loss < best_loss:
            best, best_loss = net, loss
    return best


def run_fold(cfg: ExperimentConfig, fold: int, dataset: Dataset | None = None, plan: FoldPlan | None = None) -> FoldOutcome:
    """Fit on every fold except ``fold`` and score accuracy on ``fold``.

    Inputs are min-max scaled with statistics of the training part only.
    """
    if dataset is None or plan is None:
        dataset, plan = _dataset_and_plan(cfg.dataset, str(cfg.data_dir), cfg.folds, cfg.seed)
    train, test = plan.train_test(fold)
    scaling = fit_minmax(dataset.features[train])
    X_train = apply_minmax(dataset.features[train], scaling)
    X_test = apply_minmax(dataset.features[test], scaling)
    Y_train = np.eye(dataset.class_count)[dataset.labels[train]]
    topology = NetworkTopology(dataset.n_features, cfg.hidden, dataset.class_count)

    trace = None
    if cfg.algorithm == "bp":
        net = _fit_bp(cfg, topology, X_train, Y_train, fold)
    else:
        layout = layout_for(topology, cfg.kind)
        fitness = MSEFitness(layout, X_train, Y_train)
        result = optimize(
            cfg.algorithm,
            cfg.optimizer_config(),
            GeneBounds.uniform(layout.total),
            fitness,
            derive_seed(cfg.seed, 1, fold),
        )
        net = decode(Genotype(result.best_genes, layout))
        trace = result.fitness_trace
    acc = accuracy(net, X_test, dataset.labels[test])
    log.debug("%s fold %d: accuracy %.4f", cfg.run_name, fold, acc)
    return FoldOutcome(acc, net, scaling, trace)


def write_trace(path, trace) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("iteration", "best_cost"))
        for i, cost in enumerate(trace):
            w.writerow((i, repr(float(cost))))


def fold_model_path(path, fold: int) -> Path:
    """``model.txt`` -> ``model_fold03.txt``."""
    path = Path(path)
    return path.with_name(f"{path.stem}_fold{fold:02d}{path.suffix}")


def _fold_task(args):
    cfg, fold, trace_dir, model_path = args
    out = run_fold(cfg, fold)
    if trace_dir is not None and out.trace is not None:
        write_trace(Path(trace_dir) / f"{cfg.run_name}_fold{fold:02d}.csv", out.trace)
    if model_path is not None:
        save_network(out.network, fold_model_path(model_path, fold), out.scaling)
    return out.accuracy


def _map(fn, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map() yields in submission order regardless of completion order
        return list(pool.map(fn, tasks))


def run_experiments(cfgs, jobs: int = 1, trace_dir=None, model_path=None) -> list[ResultRow]:
    """Cross-validate every config; fold runs are the unit of parallelism."""
    cfgs = list(cfgs)
    tasks = [(cfg, fold, trace_dir, model_path) for cfg in cfgs for fold in range(cfg.folds)]
    accs = _map(_fold_task, tasks, jobs)
    rows, pos = [], 0
    for cfg in cfgs:
        fold_accs = tuple(accs[pos : pos + cfg.folds])
        pos += cfg.folds
        rows.append(ResultRow(cfg.dataset, cfg.tf, cfg.algorithm, cfg.seed, fold_accs))
        log.info("%s: mean accuracy %.4f, variance %.4f", cfg.run_name, rows[-1].mean_accuracy, rows[-1].variance)
    return rows


def run_experiment(cfg: ExperimentConfig, jobs: int = 1, trace_dir=None, model_path=None) -> ResultRow:
    return run_experiments([cfg], jobs, trace_dir, model_path)[0]


# -- grids and tables -----------------------------------------------------------


def grid_configs(datasets, algorithms, tfs, seed: int = 0, **overrides) -> list[ExperimentConfig]:
    """Configs in (dataset, tf, algorithm) order; bp is paired with fixed functions only."""
    cfgs = []
    for ds in datasets:
        for tf in tfs:
            kind = TransferKind.parse(tf)
            for algo in algorithms:
                if algo == "bp" and not kind.is_fixed:
                    continue
                cfgs.append(ExperimentConfig(ds, algo, kind.value, seed=seed, **overrides))
    return cfgs


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow(
            (
                r.dataset,
                r.function,
                r.algorithm,
                r.seed,
                r.folds,
                repr(r.mean_accuracy),
                repr(r.variance),
                " ".join(repr(float(a)) for a in r.fold_accuracies),
            )
        )
    return buf.getvalue()


def rows_from_csv(text: str) -> list[ResultRow]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        accs = tuple(float(a) for a in rec["fold_accuracies"].split())
        if len(accs) != int(rec["folds"]):
            raise ValueError(f"row {rec['dataset']}/{rec['function']}/{rec['algorithm']}: fold count mismatch")
        rows.append(ResultRow(rec["dataset"], rec["function"], rec["algorithm"], int(rec["seed"]), accs))
    return rows


def _markdown_table(title, row_keys, col_keys, lookup, col_label) -> str:
    lines = [f"### {title}", ""]
    header = ["Function"]
    for c in col_keys:
        header += [f"{col_label(c)} Acc", f"{col_label(c)} Var"]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "|".join(["---"] + ["---:"] * (2 * len(col_keys))) + "|")
    for rk in row_keys:
        cells = [TransferKind(rk).label]
        for c in col_keys:
            r = lookup.get((rk, c))
            cells += [f"{r.mean_accuracy:.3f}", f"{r.variance:.3f}"] if r else ["-", "-"]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def _ordered(values, order):
    return [v for v in order if v in set(values)]


def dataset_table(rows, dataset: str) -> str:
    """Rows = transfer functions, column pairs = metaheuristics."""
    rows = [r for r in rows if r.dataset == dataset and r.algorithm != "bp"]
    lookup = {(r.function, r.algorithm): r for r in rows}
    funcs = _ordered([r.function for r in rows], TRANSFER_FUNCTIONS)
    algos = _ordered([r.algorithm for r in rows], METAHEURISTICS)
    title = f"10CV results on {DATASET_LABELS[dataset]}" if rows and rows[0].folds == 10 else f"CV results on {DATASET_LABELS[dataset]}"
    return _markdown_table(title, funcs, algos, lookup, ALGO_LABELS.get)


def bp_table(rows) -> str:
    """Rows = fixed transfer functions, column pairs = datasets."""
    rows = [r for r in rows if r.algorithm == "bp"]
    lookup = {(r.function, r.dataset): r for r in rows}
    funcs = _ordered([r.function for r in rows], TRANSFER_FUNCTIONS)
    datasets = _ordered([r.dataset for r in rows], SCHEMAS)
    return _markdown_table("CV results using backpropagation", funcs, datasets, lookup, DATASET_LABELS.get)


def write_tables(rows, out_dir) -> list[Path]:
    """Write ``<dataset>.md/.csv`` for metaheuristic rows and ``bp.md/.csv`` for BP rows."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for ds in _ordered([r.dataset for r in rows if r.algorithm != "bp"], SCHEMAS):
        subset = [r for r in rows if r.dataset == ds and r.algorithm != "bp"]
        written.append(out_dir / f"{ds}.md")
        written[-1].write_text(dataset_table(subset, ds))
        written.append(out_dir / f"{ds}.csv")
        written[-1].write_text(rows_to_csv(subset))
    bp_rows = [r for r in rows if r.algorithm == "bp"]
    if bp_rows:
        written.append(out_dir / "bp.md")
        written[-1].write_text(bp_table(bp_rows))
        written.append(out_dir / "bp.csv")
        written[-1].write_text(rows_to_csv(bp_rows))
    return written


def run_grid(datasets, algorithms, tfs, seed: int = 0, out_dir="results", jobs: int = 1, trace_dir=None, **overrides):
    """Run every valid combination and write the result tables.

    Returns ``(rows, written_paths)``. A failing cell aborts the grid with
    the cell named in the error.
    """
    cfgs = grid_configs(datasets, algorithms, tfs, seed, **overrides)
    if not cfgs:
        raise ValueError("grid is empty (bp pairs only with sigfix/tanhfix)")
    try:
        rows = run_experiments(cfgs, jobs, trace_dir)
    except Exception as exc:
        raise RuntimeError(f"grid run failed: {exc}") from exc
    return rows, write_tables(rows, out_dir)


# -- config files ---------------------------------------------------------------

_LIST_KEYS = {"datasets", "algorithms", "algos", "tfs"}


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file whose keys mirror the CLI flags.

    Dashes and underscores in keys are interchangeable; ``datasets``,
    ``algos`` and ``tfs`` take comma-separated lists.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read_string("[grid]\n" + Path(path).read_text())
    out = {}
    for key, raw in parser["grid"].items():
        key = key.replace("-", "_")
        if key == "algorithms":
            key = "algos"
        if key in _LIST_KEYS:
            out[key] = [v.strip() for v in raw.split(",") if v.strip()]
        elif key in ("jobs", "seed", "hidden", "folds", "pop", "iters", "trial_limit", "bp_restarts"):
            out[key] = int(raw)
        elif key in ("c1", "c2", "c0_max", "c0_min", "cr", "f", "eta", "momentum"):
            out[key] = float(raw)
        elif key == "trace":
            out[key] = raw.strip().lower() in ("1", "true", "yes", "on")
        elif key in ("out", "data_dir", "traces_dir", "de_variant"):
            out[key] = raw
        else:
            raise ValueError(f"{path}: unknown key {key!r}")
    return out
