"""Seeded Monte Carlo driver for the topology-change recovery experiments.

Every trial regenerates the graph pair, the signal batches, the mask, and
the noise from a stream derived from (master seed, trial index), so results
are identical across runs and worker counts.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, TextIO

import numpy as np

from . import graphs as gr
from . import gwss
from .errors import AllTrialsFailed, GFTransferError, IndexOutOfRange, InvalidProbability
from .recovery import mse, recover
from .transfer import (
    PipelineResult,
    RatioConfig,
    TransferScenario,
    baseline_transfer,
    drw_transfer,
    make_scenario,
)

METHODS = ("noisy", "armae", "drw")


@dataclass(frozen=True)
class ExperimentConfig:
    graph_kind: str = "er"  # "er" | "rs"
    n: int = 100
    p: float = 0.15
    k: int = 8
    perturb_kind: str = "edges"  # "edges" | "nodes"
    change: int = 10  # e or v
    p_v: float = 0.15
    k_h: int = 2000
    k_c: int = 1000
    missing_prob: float = 0.3
    noise_var: float = 0.1
    trials: int = 1000
    arma_l: int = 5
    arma_m: int = 2
    reg_alpha: float = 1e-6
    reg_beta: float = 1e-6
    ratio: RatioConfig = field(default_factory=RatioConfig)
    master_seed: int = 0
    mse_scope: str = "all"  # "all" | "missing"

    def __post_init__(self):
        if self.graph_kind not in ("er", "rs"):
            raise ValueError(f"unknown graph kind {self.graph_kind!r}")
        if self.perturb_kind not in ("edges", "nodes"):
            raise ValueError(f"unknown perturbation {self.perturb_kind!r}")
        if min(self.n, self.k_h, self.k_c, self.trials) < 1:
            raise ValueError("counts must be >= 1")
        if not (0 <= self.p <= 1 and 0 <= self.p_v <= 1 and 0 <= self.missing_prob < 1):
            raise InvalidProbability("probabilities out of range")
        if self.noise_var < 0:
            raise ValueError("noise_var must be >= 0")


@dataclass(frozen=True)
class TrialResult:
    trial: int
    mse_noisy: float = np.nan
    mse_armae: float = np.nan
    mse_drw: float = np.nan
    diagnostics: dict = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True)
class TrialDetail:
    """Full per-trial state, for recovery dumps and debugging."""

    scenario: TransferScenario
    x_curr: np.ndarray
    armae: PipelineResult
    drw: PipelineResult
    x_hat_armae: np.ndarray
    x_hat_drw: np.ndarray
    x_noisy: np.ndarray


def _weight_policy(cfg: ExperimentConfig, graph: gr.Graph) -> gr.WeightPolicy:
    if cfg.graph_kind == "er":
        return gr.uniform_weights(1.0, 3.0)
    return gr.kernel_weights(rs_theta(graph))


def rs_theta(g: gr.Graph) -> float:
    """Bandwidth implied by an RS instance: mean distance over all node pairs."""
    diff = g.positions[:, None, :] - g.positions[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    iu, ju = np.triu_indices(g.n, k=1)
    return float(dist[iu, ju].mean())


def _draw_mask_ids(all_ids, hist_ids, curr_ids, missing_prob, rng):
    hist_ids = set(hist_ids)
    curr_ids = set(curr_ids)
    while True:
        keep = rng.random(len(all_ids)) >= missing_prob
        observed = [i for i, kept in zip(all_ids, keep) if kept]
        if any(i in hist_ids for i in observed) and any(i in curr_ids for i in observed):
            return tuple(observed)


def build_trial(cfg: ExperimentConfig, trial_index: int) -> TrialDetail:
    """Run one full scenario and both pipelines; deterministic in
    (master_seed, trial_index)."""
    ss = np.random.SeedSequence(entropy=cfg.master_seed, spawn_key=(trial_index,))
    rng_graph, rng_pert, rng_sig, rng_mask, rng_noise, rng_ratio = (
        np.random.default_rng(child) for child in ss.spawn(6)
    )

    if cfg.graph_kind == "er":
        graph_h = gr.gen_er(cfg.n, cfg.p, 1.0, 3.0, rng_graph)
    else:
        graph_h = gr.gen_rs(cfg.n, cfg.k, rng=rng_graph)
    policy = _weight_policy(cfg, graph_h)
    if cfg.perturb_kind == "edges":
        graph_c = gr.perturb_edges(graph_h, cfg.change, policy, rng_pert)
        mapping = gr.NodeMapping.identity(graph_h.node_ids)
    else:
        graph_c, mapping = gr.perturb_nodes(graph_h, cfg.change, cfg.p_v, policy, rng_pert)

    basis_h = gr.spectral_decompose(graph_h)
    basis_c = gr.spectral_decompose(graph_c)
    model_h = gwss.GwssModel(basis_h, np.zeros(basis_h.n), gwss.psd_historical(basis_h))
    model_c = gwss.GwssModel(basis_c, np.zeros(basis_c.n), gwss.psd_current(basis_c))
    x_hist = gwss.sample(model_h, cfg.k_h, rng_sig)
    x_curr = gwss.sample(model_c, cfg.k_c, rng_sig)

    all_ids = list(graph_h.node_ids) + sorted(mapping.added)
    observed_ids = _draw_mask_ids(
        all_ids, graph_h.node_ids, graph_c.node_ids, cfg.missing_prob, rng_mask
    )
    sigma = float(np.sqrt(cfg.noise_var))
    hist_cols = [graph_h.index_of(i) for i in observed_ids if i in set(graph_h.node_ids)]
    curr_cols = [graph_c.index_of(i) for i in observed_ids if i in set(graph_c.node_ids)]
    y_hist = x_hist[:, hist_cols] + rng_noise.normal(0.0, sigma, (cfg.k_h, len(hist_cols)))
    y_curr = x_curr[:, curr_cols] + rng_noise.normal(0.0, sigma, (cfg.k_c, len(curr_cols)))

    scn = make_scenario(
        graph_h, graph_c, mapping, observed_ids, sigma, x_hist, y_hist, y_curr
    )
    kwargs = dict(
        arma_l=cfg.arma_l,
        arma_m=cfg.arma_m,
        reg_alpha=cfg.reg_alpha,
        reg_beta=cfg.reg_beta,
    )
    armae = baseline_transfer(scn, **kwargs)
    drw = drw_transfer(scn, ratio_config=cfg.ratio, rng=rng_ratio, **kwargs)

    x_hat_armae = recover(armae.estimator, y_curr)
    x_hat_drw = recover(drw.estimator, y_curr)
    x_noisy = np.zeros_like(x_curr)
    x_noisy[:, curr_cols] = y_curr
    return TrialDetail(
        scenario=scn,
        x_curr=x_curr,
        armae=armae,
        drw=drw,
        x_hat_armae=x_hat_armae,
        x_hat_drw=x_hat_drw,
        x_noisy=x_noisy,
    )


def _scoped_mse(cfg: ExperimentConfig, detail: TrialDetail, x_hat: np.ndarray) -> float:
    if cfg.mse_scope == "all":
        return mse(x_hat, detail.x_curr)
    obs = list(detail.scenario.mask_for(detail.scenario.graph_c).observed_nodes)
    missing = np.setdiff1d(np.arange(detail.x_curr.shape[1]), obs)
    return mse(x_hat[:, missing], detail.x_curr[:, missing])


def run_trial(cfg: ExperimentConfig, trial_index: int) -> TrialResult:
    try:
        detail = build_trial(cfg, trial_index)
    except GFTransferError as exc:
        return TrialResult(trial=trial_index, error=f"{type(exc).__name__}: {exc}")
    diagnostics = {"armae": detail.armae.diagnostics, "drw": detail.drw.diagnostics}
    return TrialResult(
        trial=trial_index,
        mse_noisy=_scoped_mse(cfg, detail, detail.x_noisy),
        mse_armae=_scoped_mse(cfg, detail, detail.x_hat_armae),
        mse_drw=_scoped_mse(cfg, detail, detail.x_hat_drw),
        diagnostics=diagnostics,
    )


def _trial_worker(args):
    cfg, idx = args
    return run_trial(cfg, idx)


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    results: tuple

    @property
    def failed_count(self) -> int:
        return sum(r.failed for r in self.results)

    def summary(self) -> dict:
        """Mean and standard error per method over successful trials."""
        ok = [r for r in self.results if not r.failed]
        if not ok:
            raise AllTrialsFailed("every trial errored")
        out = {
            "graph": self.config.graph_kind,
            "perturb": self.config.perturb_kind,
            "change": self.config.change,
            "trials_ok": len(ok),
            "trials_failed": self.failed_count,
        }
        for method in METHODS:
            values = np.sort(np.array([getattr(r, f"mse_{method}") for r in ok]))
            out[f"mse_{method}"] = float(values.mean())
            out[f"stderr_{method}"] = float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
        return out


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """All trials of one configuration; results ordered by trial index, so
    aggregation does not depend on execution order or worker count."""
    indices = range(cfg.trials)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_worker, [(cfg, i) for i in indices], chunksize=8))
    else:
        results = [run_trial(cfg, i) for i in indices]
    results.sort(key=lambda r: r.trial)
    return ExperimentResult(config=cfg, results=tuple(results))


CSV_FIELDS = ["graph", "perturb", "change", "trial", "mse_noisy", "mse_armae", "mse_drw", "error"]


def write_results(fh: TextIO, experiments: Sequence[ExperimentResult]) -> None:
    """Per-trial CSV; floats written via repr so output is byte-stable."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for exp in experiments:
        cfg = exp.config
        for r in exp.results:
            writer.writerow(
                [
                    cfg.graph_kind,
                    cfg.perturb_kind,
                    cfg.change,
                    r.trial,
                    "" if r.failed else repr(r.mse_noisy),
                    "" if r.failed else repr(r.mse_armae),
                    "" if r.failed else repr(r.mse_drw),
                    r.error or "",
                ]
            )


def read_results(fh: TextIO):
    """Rows of the per-trial CSV as dicts with parsed numerics."""
    rows = []
    for row in csv.DictReader(fh):
        parsed = dict(row)
        parsed["change"] = int(row["change"])
        parsed["trial"] = int(row["trial"])
        for key in ("mse_noisy", "mse_armae", "mse_drw"):
            parsed[key] = float(row[key]) if row[key] else None
        rows.append(parsed)
    return rows


def summarize_rows(rows) -> list:
    """Aggregate per-trial rows into per-cell mean/stderr summaries."""
    cells = {}
    for row in rows:
        cells.setdefault((row["graph"], row["perturb"], row["change"]), []).append(row)
    out = []
    for (graph, perturb, change), group in sorted(cells.items()):
        ok = [r for r in group if r["error"] in ("", None)]
        summary = {
            "graph": graph,
            "perturb": perturb,
            "change": change,
            "trials_ok": len(ok),
            "trials_failed": len(group) - len(ok),
        }
        for method in METHODS:
            values = np.sort(np.array([r[f"mse_{method}"] for r in ok]))
            summary[f"mse_{method}"] = float(values.mean()) if len(ok) else np.nan
            summary[f"stderr_{method}"] = (
                float(values.std(ddof=1) / np.sqrt(len(values))) if len(ok) > 1 else 0.0
            )
        out.append(summary)
    return out


DUMP_FIELDS = [
    "row_type", "node_id", "x", "y_or_missing", "x_hat_armae", "x_hat_drw", "pos_x", "pos_y",
]


def dump_recovery(cfg: ExperimentConfig, trial_index: int, sample_index: int, fh: TextIO) -> TrialDetail:
    """Per-node CSV for one recovered sample: ground truth, noisy observation
    (blank where missing), both recoveries, positions; edge rows follow the
    node rows (row_type=edge, columns node_id/x/y_or_missing = a/b/weight)."""
    detail = build_trial(cfg, trial_index)
    if not 0 <= sample_index < detail.x_curr.shape[0]:
        raise IndexOutOfRange(f"sample {sample_index} of {detail.x_curr.shape[0]}")
    graph_c = detail.scenario.graph_c
    observed = set(detail.scenario.observed_in(graph_c))
    y_by_id = dict(
        zip(detail.scenario.observed_in(graph_c),
            detail.scenario.y_curr[sample_index]))
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(DUMP_FIELDS)
    for row, nid in enumerate(graph_c.node_ids):
        pos = graph_c.positions[row] if graph_c.positions is not None else ("", "")
        writer.writerow(
            [
                "node",
                nid,
                repr(float(detail.x_curr[sample_index, row])),
                repr(float(y_by_id[nid])) if nid in observed else "",
                repr(float(detail.x_hat_armae[sample_index, row])),
                repr(float(detail.x_hat_drw[sample_index, row])),
                repr(float(pos[0])) if pos[0] != "" else "",
                repr(float(pos[1])) if pos[1] != "" else "",
            ]
        )
    for a, b, w in graph_c.edge_list():
        writer.writerow(["edge", a, b, repr(w), "", "", "", ""])
    return detail
