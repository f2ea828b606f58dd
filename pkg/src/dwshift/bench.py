"""Configuration-driven benchmark harness and command line interface.

Runs scenarios x methods x repetitions with per-repetition seeds derived
as seed XOR repetition index, canonicalizes ordering so worker counts
never change output bytes, and emits results/summary/boxplot CSV files
plus a JSON manifest.  Subcommands: run, report, verify-bounds, selftest.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import List, Optional

import numpy as np

from . import __version__
from .core import Dataset, FeatureMap, Loss, MapKind, error_rate
from .datagen import (
    BiasedSamplingConfig,
    SyntheticConfig,
    biased_split,
    gen_synthetic,
    load_csv,
    normalize,
    pearson_select,
    ratio_sup_grid,
    samples_to_arrays,
)
from .kernel import RbfKernel, bandwidth_heuristic
from .mrc import (
    default_d_grid,
    bound_report,
    fit,
    fit_reweighted_lr,
    fit_robust,
    mc_alpha_feature_mean,
    predict_labels,
    select_D,
)
from .rng import Stream, stream_for_repetition
from .solvers import SubgradSettings
from .weights import (
    DwKmmConfig,
    WeightPair,
    classifier_ratio_model,
    dw_kmm,
    exact_double_weights,
    flattening_weights,
    kmm,
    reweighted_weights,
)

METHODS = (
    "no-adapt",
    "reweighted",
    "robust",
    "flattening-power",
    "flattening-mixture",
    "kmm",
    "dwgcs-01",
    "dwgcs-log",
)

WORKERS_ENV = "DWGCS_WORKERS"


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# Flat TOML-subset configuration files
# ---------------------------------------------------------------------------


def _parse_scalar(text: str):
    text = text.strip()
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return text[1:-1]
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse value {text!r}")


def parse_config_text(text: str) -> dict:
    """Flat sections of key = value lines; values are strings, numbers,
    booleans, or one-level arrays."""
    sections: dict = {}
    current = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if not current:
                raise ConfigError(f"line {line_no}: empty section name")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected key = value")
        if current is None:
            raise ConfigError(f"line {line_no}: key outside any [section]")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if value.startswith("[") and value.endswith("]"):
            inner = value[1:-1].strip()
            items = [] if not inner else [_parse_scalar(v) for v in inner.split(",")]
            sections[current][key] = items
        else:
            sections[current][key] = _parse_scalar(value)
    return sections


def parse_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


@dataclass
class ScenarioSpec:
    scenario_id: str
    kind: str  # "synthetic" | "biased-sampling" | "fixed-csv"
    n: int
    t: int
    delta: float = 0.0
    no_shift: bool = False
    axis: str = "pca1"
    feature_index: int = 0
    delta_tr: float = 0.7
    delta_te: float = 0.3
    pool_x: Optional[np.ndarray] = None
    pool_y: Optional[np.ndarray] = None
    train_pool: Optional[tuple] = None  # fixed-csv: (X, y)
    test_pool: Optional[tuple] = None
    sigma: Optional[float] = None  # dataset-pool bandwidth; split heuristic when absent


@dataclass
class RunConfig:
    seed: int
    repetitions: int
    methods: List[str]
    outdir: str
    scenarios: List[ScenarioSpec]
    feature_map: str = "identity"
    d_grid: List[float] = field(default_factory=lambda: list(default_d_grid()))
    gamma: float = 0.5
    b_cap: float = 1000.0
    subgradient_iters: int = 10000
    k_nn: int = 50
    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if not self.methods:
            raise ConfigError("methods must be nonempty")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {METHODS}")
        if self.feature_map not in ("identity", "quadratic"):
            raise ConfigError("feature_map must be 'identity' or 'quadratic'")


def _load_pool(csv_path: str, label_column: str):
    samples = load_csv(csv_path, label_column)
    X, y = samples_to_arrays(samples)
    Xn, _, _ = normalize(X)
    return Xn, y


def build_run_config(cfg: dict, base_dir: str = ".") -> RunConfig:
    try:
        run = cfg["run"]
        scen = cfg["scenario"]
    except KeyError as exc:
        raise ConfigError(f"missing section {exc}") from None
    model = cfg.get("model", {})
    k_nn = int(model.get("k_nn", 50))
    kind = scen.get("kind")
    scenarios: List[ScenarioSpec] = []
    if kind == "synthetic":
        n = int(scen.get("n", 100))
        t = int(scen.get("t", 100))
        deltas = scen.get("deltas", [scen.get("delta", 0.45)])
        for d in deltas:
            scenarios.append(
                ScenarioSpec(
                    scenario_id=f"synthetic-delta{float(d):g}",
                    kind="synthetic",
                    n=n,
                    t=t,
                    delta=float(d),
                    no_shift=bool(scen.get("no_shift", False)),
                )
            )
    elif kind == "biased-sampling":
        path = os.path.join(base_dir, scen["csv"])
        if not os.path.exists(path):
            raise ConfigError(f"dataset file not found: {path}")
        pool_x, pool_y = _load_pool(path, scen["label_column"])
        size = pool_x.shape[0]
        n = int(scen.get("n", min(300, size // 3)))
        t = int(scen.get("t", min(300, size // 3)))
        sigma = bandwidth_heuristic(pool_x, k_nn=k_nn)
        name = scen.get("name", os.path.splitext(os.path.basename(path))[0])
        for axis in scen.get("axes", ["pca"]):
            axis = str(axis)
            if axis == "pca":
                spec_axis, fidx = "pca1", 0
            elif axis.startswith("f") and axis[1:].isdigit():
                spec_axis, fidx = "feature", int(axis[1:]) - 1
            else:
                raise ConfigError(f"unknown axis {axis!r}; use 'pca' or 'f<index>'")
            scenarios.append(
                ScenarioSpec(
                    scenario_id=f"{name}-{axis}",
                    kind="biased-sampling",
                    n=n,
                    t=t,
                    axis=spec_axis,
                    feature_index=fidx,
                    delta_tr=float(scen.get("delta_tr", 0.7)),
                    delta_te=float(scen.get("delta_te", 0.3)),
                    pool_x=pool_x,
                    pool_y=pool_y,
                    sigma=sigma,
                )
            )
    elif kind == "fixed-csv":
        tr = os.path.join(base_dir, scen["csv_train"])
        te = os.path.join(base_dir, scen["csv_test"])
        for p in (tr, te):
            if not os.path.exists(p):
                raise ConfigError(f"dataset file not found: {p}")
        train_pool = _load_pool(tr, scen["label_column"])
        test_pool = _load_pool(te, scen["label_column"])
        top = int(scen.get("pearson_top", 0))
        if top > 0:
            keep = pearson_select(train_pool[0], train_pool[1], top)
            train_pool = (train_pool[0][:, keep], train_pool[1])
            test_pool = (test_pool[0][:, keep], test_pool[1])
        name = scen.get("name", os.path.splitext(os.path.basename(tr))[0])
        scenarios.append(
            ScenarioSpec(
                scenario_id=name,
                kind="fixed-csv",
                n=int(scen.get("n", min(1000, train_pool[0].shape[0]))),
                t=int(scen.get("t", min(1000, test_pool[0].shape[0]))),
                train_pool=train_pool,
                test_pool=test_pool,
                sigma=bandwidth_heuristic(np.concatenate([train_pool[0], test_pool[0]]), k_nn=k_nn),
            )
        )
    else:
        raise ConfigError(f"unknown scenario kind {kind!r}")

    return RunConfig(
        seed=int(run.get("seed", 0)),
        repetitions=int(run.get("repetitions", 1)),
        methods=[str(m) for m in run.get("methods", [])],
        outdir=os.path.join(base_dir, str(run.get("outdir", "results"))),
        scenarios=scenarios,
        feature_map=str(model.get("feature_map", "identity")),
        d_grid=[float(v) for v in model.get("d_grid", default_d_grid())],
        gamma=float(model.get("gamma", 0.5)),
        b_cap=float(model.get("b_cap", 1000.0)),
        subgradient_iters=int(model.get("subgradient_iters", 10000)),
        k_nn=int(model.get("k_nn", 50)),
        raw=cfg,
    )


# ---------------------------------------------------------------------------
# Per-repetition execution
# ---------------------------------------------------------------------------


@dataclass
class ResultRow:
    scenario: str
    method: str
    repetition: int
    error: Optional[float]
    minimax_risk: Optional[float] = None
    selected_d: Optional[float] = None
    wall_time: float = 0.0
    failure: str = ""


def _signed_labels_fit_predict(fit_fn, psi_train, train_y, psi_test):
    mu = fit_fn(psi_train, train_y)
    scores = psi_test @ mu
    return np.where(scores >= 0.0, 1, 2).astype(np.int64)


def _make_dataset(spec: ScenarioSpec, rep: int, seed: int):
    data_seed = int(stream_for_repetition(seed, rep, tag=spec.scenario_id)._seed)
    if spec.kind == "synthetic":
        scenario = gen_synthetic(
            SyntheticConfig(delta=spec.delta, n=spec.n, t=spec.t, seed=data_seed, no_shift=spec.no_shift)
        )
        return scenario.dataset, scenario.marginals
    if spec.kind == "biased-sampling":
        cfg = BiasedSamplingConfig(
            axis=spec.axis,
            delta_tr=spec.delta_tr,
            delta_te=spec.delta_te,
            n=spec.n,
            t=spec.t,
            seed=data_seed,
            feature_index=spec.feature_index,
        )
        scenario = biased_split(spec.pool_x, spec.pool_y, cfg)
        return scenario.dataset, None
    # fixed-csv: seeded subsample of each pool
    stream = Stream(data_seed)
    tr_x, tr_y = spec.train_pool
    te_x, te_y = spec.test_pool
    tr_idx = stream.child("train").permutation(tr_x.shape[0])[: spec.n]
    te_idx = stream.child("test").permutation(te_x.shape[0])[: spec.t]
    k = int(max(tr_y.max(), te_y.max()))
    ds = Dataset(tr_x[tr_idx], tr_y[tr_idx], te_x[te_idx], te_y[te_idx], n_classes=k)
    return ds, None


def run_repetition(config: RunConfig, spec: ScenarioSpec, rep: int):
    """All configured methods on one repetition's data; returns rows + metadata."""
    ds, exact_marginals = _make_dataset(spec, rep, config.seed)
    fmap = FeatureMap(
        MapKind.QUADRATIC if config.feature_map == "quadratic" else MapKind.IDENTITY,
        ds.dim,
        ds.n_classes,
    )
    # single-weight baselines use their published linear-in-instance rules
    psi_train = np.concatenate([ds.train_x, np.ones((ds.n, 1))], axis=1)
    psi_test = np.concatenate([ds.test_x, np.ones((ds.t, 1))], axis=1)
    settings = SubgradSettings(max_iter=config.subgradient_iters)

    marginals = exact_marginals
    if marginals is None:
        marginals = classifier_ratio_model(ds.train_x, ds.test_x, cap=config.b_cap)
        b_value = config.b_cap
    else:
        b_value = ratio_sup_grid(marginals)

    sigma = spec.sigma
    kmm_cfg_cache = {}

    def kernel_cfg(d_value: float) -> DwKmmConfig:
        nonlocal sigma
        if sigma is None:
            pooled = np.concatenate([ds.train_x, ds.test_x], axis=0)
            sigma = bandwidth_heuristic(pooled, k_nn=config.k_nn)
        if d_value not in kmm_cfg_cache:
            kmm_cfg_cache[d_value] = DwKmmConfig(kernel=RbfKernel(sigma), D=d_value, B=config.b_cap)
        return kmm_cfg_cache[d_value]

    def dwgcs_weight_provider(d_value: float) -> WeightPair:
        if exact_marginals is not None:
            return exact_double_weights(
                exact_marginals,
                C=b_value / np.sqrt(d_value),
                train_x=ds.train_x,
                test_x=ds.test_x,
                B=b_value,
            )
        return dw_kmm(ds.train_x, ds.test_x, kernel_cfg(d_value))

    rows = []
    for method in config.methods:
        start = time.perf_counter()
        err = risk = sel_d = None
        failure = ""
        try:
            if method == "no-adapt":
                pair = WeightPair(beta=np.ones(ds.n), alpha=np.ones(ds.t), D=1.0, B=max(b_value, 1.0))
                model = fit(ds.train_x, ds.train_y, ds.test_x, pair, Loss.ZERO_ONE, fmap, settings=settings)
                pred = predict_labels(model, ds.test_x)
                risk = model.minimax_risk
            elif method == "reweighted":
                pair = reweighted_weights(marginals, ds.train_x, ds.test_x, B=b_value)
                pred = _signed_labels_fit_predict(
                    lambda X, y: fit_reweighted_lr(X, y, pair.beta), psi_train, ds.train_y, psi_test
                )
            elif method == "robust":
                alpha_train = marginals.inverse_ratio(ds.train_x)
                pred = _signed_labels_fit_predict(
                    lambda X, y: fit_robust(X, y, alpha_train), psi_train, ds.train_y, psi_test
                )
            elif method in ("flattening-power", "flattening-mixture"):
                variant = method.split("-", 1)[1]
                pair = flattening_weights(marginals, config.gamma, variant, ds.train_x, ds.test_x, B=b_value)
                pred = _signed_labels_fit_predict(
                    lambda X, y: fit_reweighted_lr(X, y, pair.beta), psi_train, ds.train_y, psi_test
                )
            elif method == "kmm":
                pair = kmm(ds.train_x, ds.test_x, kernel_cfg(1.0))
                pred = _signed_labels_fit_predict(
                    lambda X, y: fit_reweighted_lr(X, y, pair.beta), psi_train, ds.train_y, psi_test
                )
            elif method in ("dwgcs-01", "dwgcs-log"):
                loss_kind = Loss.ZERO_ONE if method.endswith("01") else Loss.LOG
                sel_d, _, model = select_D(
                    ds.train_x,
                    ds.train_y,
                    ds.test_x,
                    config.d_grid,
                    loss_kind,
                    fmap,
                    dwgcs_weight_provider,
                    settings=settings,
                )
                pred = predict_labels(model, ds.test_x)
                risk = model.minimax_risk
            else:  # pragma: no cover - guarded by RunConfig validation
                raise ConfigError(f"unknown method {method!r}")
            err = error_rate(pred, ds.test_y)
        except Exception as exc:  # failures are recorded, the run continues
            failure = f"{type(exc).__name__}: {exc}"
        rows.append(
            ResultRow(
                scenario=spec.scenario_id,
                method=method,
                repetition=rep,
                error=err,
                minimax_risk=risk,
                selected_d=sel_d,
                wall_time=time.perf_counter() - start,
                failure=failure,
            )
        )
    meta = {"sigma": sigma, "B": b_value, "n": ds.n, "t": ds.t}
    return rows, meta


def _task(args):
    config, spec, rep = args
    return spec.scenario_id, run_repetition(config, spec, rep)


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, min(4, os.cpu_count() or 1))


def run(config: RunConfig, workers: Optional[int] = None):
    """Execute every (scenario, repetition) task and emit reports."""
    workers = workers or default_workers()
    tasks = [(config, spec, rep) for spec in config.scenarios for rep in range(config.repetitions)]
    if workers == 1:
        outputs = [_task(t) for t in tasks]
    else:
        with Pool(processes=workers) as pool:
            outputs = pool.map(_task, tasks, chunksize=1)
    rows: List[ResultRow] = []
    meta: dict = {}
    for scenario_id, (rep_rows, rep_meta) in outputs:
        rows.extend(rep_rows)
        slot = meta.setdefault(scenario_id, {"sigma": [], "B": rep_meta["B"], "n": rep_meta["n"], "t": rep_meta["t"]})
        if rep_meta["sigma"] is not None:
            slot["sigma"].append(rep_meta["sigma"])
    rows.sort(key=lambda r: (r.scenario, r.method, r.repetition))
    emit_reports(rows, config, meta)
    return rows


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _fmt_opt(value) -> str:
    return "" if value is None else f"{float(value):.17g}"


def results_csv_text(rows: List[ResultRow]) -> str:
    lines = ["scenario,method,repetition,error,minimax_risk,selected_D,failure"]
    for r in rows:
        lines.append(
            f"{r.scenario},{r.method},{r.repetition},{_fmt_opt(r.error)},"
            f"{_fmt_opt(r.minimax_risk)},{_fmt_opt(r.selected_d)},{r.failure}"
        )
    return "\n".join(lines) + "\n"


def summarize(rows: List[ResultRow]):
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.scenario, r.method), []).append(r)
    summary = []
    for (scenario, method), items in sorted(groups.items()):
        errors = np.array([r.error for r in items if r.error is not None])
        risks = np.array([r.minimax_risk for r in items if r.minimax_risk is not None])
        ds = np.array([r.selected_d for r in items if r.selected_d is not None])
        summary.append(
            {
                "scenario": scenario,
                "method": method,
                "repetitions": len(items),
                "mean_error": float(errors.mean()) if errors.size else None,
                "std_error": float(errors.std(ddof=1)) if errors.size > 1 else (0.0 if errors.size else None),
                "mean_minimax_risk": float(risks.mean()) if risks.size else None,
                "mean_selected_D": float(ds.mean()) if ds.size else None,
                "failures": sum(1 for r in items if r.failure),
            }
        )
    return summary


def summary_csv_text(summary) -> str:
    lines = ["scenario,method,repetitions,mean_error,std_error,mean_minimax_risk,mean_selected_D,failures"]
    for s in summary:
        lines.append(
            f"{s['scenario']},{s['method']},{s['repetitions']},{_fmt_opt(s['mean_error'])},"
            f"{_fmt_opt(s['std_error'])},{_fmt_opt(s['mean_minimax_risk'])},"
            f"{_fmt_opt(s['mean_selected_D'])},{s['failures']}"
        )
    return "\n".join(lines) + "\n"


def boxplot_csv_text(rows: List[ResultRow]) -> str:
    lines = [
        "# quantiles: linear interpolation between order statistics (type 7)",
        "scenario,method,min,q1,median,q3,max",
    ]
    groups: dict = {}
    for r in rows:
        if r.error is not None:
            groups.setdefault((r.scenario, r.method), []).append(r.error)
    for (scenario, method), errs in sorted(groups.items()):
        q = np.percentile(np.asarray(errs), [0, 25, 50, 75, 100])
        lines.append(f"{scenario},{method}," + ",".join(f"{v:.17g}" for v in q))
    return "\n".join(lines) + "\n"


def emit_reports(rows: List[ResultRow], config: RunConfig, meta: dict, bounds: Optional[dict] = None) -> None:
    outdir = config.outdir
    os.makedirs(outdir, exist_ok=True)

    def write(name, text):
        with open(os.path.join(outdir, name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)

    write("results.csv", results_csv_text(rows))
    summary = summarize(rows)
    write("summary.csv", summary_csv_text(summary))
    write("boxplot.csv", boxplot_csv_text(rows))
    timing: dict = {}
    for r in rows:
        timing.setdefault(f"{r.scenario}/{r.method}", []).append(r.wall_time)
    manifest = {
        "version": __version__,
        "numpy": np.__version__,
        "seed": config.seed,
        "repetitions": config.repetitions,
        "methods": config.methods,
        "feature_map": config.feature_map,
        "d_grid": list(config.d_grid),
        "b_cap": config.b_cap,
        "subgradient_iters": config.subgradient_iters,
        "scenarios": {
            sid: {
                "n": m["n"],
                "t": m["t"],
                "B": m["B"],
                "sigma_mean": float(np.mean(m["sigma"])) if m["sigma"] else None,
                "sigma_min": float(np.min(m["sigma"])) if m["sigma"] else None,
                "sigma_max": float(np.max(m["sigma"])) if m["sigma"] else None,
            }
            for sid, m in sorted(meta.items())
        },
        "mean_wall_time": {k: float(np.mean(v)) for k, v in sorted(timing.items())},
        "config": config.raw,
    }
    with open(os.path.join(outdir, "run_manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if bounds is not None:
        with open(os.path.join(outdir, "bounds.json"), "w", encoding="utf-8", newline="\n") as fh:
            json.dump(bounds, fh, indent=2, sort_keys=True)
            fh.write("\n")


def read_results_csv(path: str) -> List[ResultRow]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("scenario,method,repetition"):
            raise ValueError(f"{path}: unexpected header")
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            scenario, method, rep, err, risk, sel_d = parts[:6]
            failure = ",".join(parts[6:])
            rows.append(
                ResultRow(
                    scenario=scenario,
                    method=method,
                    repetition=int(rep),
                    error=float(err) if err else None,
                    minimax_risk=float(risk) if risk else None,
                    selected_d=float(sel_d) if sel_d else None,
                    failure=failure,
                )
            )
    return rows


# ---------------------------------------------------------------------------
# Bound verification (synthetic mode)
# ---------------------------------------------------------------------------


def verify_bounds(cfg: dict, workers: Optional[int] = None) -> dict:
    """Fit with an inflated radius and check the estimation-gap risk bound."""
    section = cfg.get("bounds", {})
    delta = float(section.get("delta", 0.35))
    d_value = float(section.get("d_value", 4.0))
    reps = int(section.get("repetitions", 50))
    mc_samples = int(section.get("mc_samples", 100000))
    n = int(section.get("n", 100))
    t = int(section.get("t", 100))
    seed = int(section.get("seed", cfg.get("run", {}).get("seed", 0)))
    iters = int(section.get("subgradient_iters", 10000))
    loss = Loss.LOG if section.get("loss") == "log" else Loss.ZERO_ONE

    fmap = FeatureMap(MapKind.QUADRATIC, 2, 2)
    reports = []
    for rep in range(reps):
        scenario = gen_synthetic(
            SyntheticConfig(delta=delta, n=n, t=t, seed=int(stream_for_repetition(seed, rep, "bounds")._seed))
        )
        ds = scenario.dataset
        B = ratio_sup_grid(scenario.marginals)
        pair = exact_double_weights(
            scenario.marginals, C=B / np.sqrt(d_value), train_x=ds.train_x, test_x=ds.test_x, B=B
        )
        from .mrc import mean_vector  # local import to keep the module graph flat

        tau = mean_vector(ds.train_x, ds.train_y, pair.beta, fmap)
        e_phi, e_phi_se = mc_alpha_feature_mean(scenario.test_sampler, pair.alpha_fn, fmap, mc_samples)
        radius = np.abs(tau - e_phi) + 3.0 * e_phi_se
        model = fit(
            ds.train_x, ds.train_y, ds.test_x, pair, loss, fmap,
            settings=SubgradSettings(max_iter=iters), radius=radius,
        )
        rep_report = bound_report(model, scenario.test_sampler, pair.alpha_fn, mc_samples=mc_samples)
        rep_report["repetition"] = rep
        reports.append(rep_report)
    holds = all(r["bound_estimation_gap_holds"] for r in reports)
    return {
        "delta": delta,
        "d_value": d_value,
        "repetitions": reps,
        "mc_samples": mc_samples,
        "loss": loss.value,
        "all_hold": holds,
        "reports": reports,
    }


# ---------------------------------------------------------------------------
# Self-test of the derived oracles
# ---------------------------------------------------------------------------


def selftest(out=sys.stdout) -> int:
    """Quick pass over the independent oracles; prints one line per check."""
    from . import selftests

    failures = 0
    for name, fn in selftests.ALL_CHECKS:
        try:
            fn()
            out.write(f"PASS {name}\n")
        except AssertionError as exc:
            failures += 1
            out.write(f"FAIL {name}: {exc}\n")
    return failures


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="dwgcs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a benchmark configuration")
    p_run.add_argument("config")
    p_run.add_argument("--workers", type=int, default=None)
    p_rep = sub.add_parser("report", help="recompute summary/boxplot from results.csv")
    p_rep.add_argument("results_dir")
    p_ver = sub.add_parser("verify-bounds", help="risk-bound verification in synthetic mode")
    p_ver.add_argument("config")
    sub.add_parser("selftest", help="run the derived-value oracle checks")
    args = parser.parse_args(argv)

    if args.command == "run":
        try:
            config = build_run_config(parse_config(args.config), base_dir=os.path.dirname(os.path.abspath(args.config)))
        except (ConfigError, OSError, KeyError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        rows = run(config, workers=args.workers)
        failures = sum(1 for r in rows if r.failure)
        print(f"wrote {config.outdir} ({len(rows)} rows, {failures} failures)")
        return 1 if failures else 0

    if args.command == "report":
        path = os.path.join(args.results_dir, "results.csv")
        try:
            rows = read_results_csv(path)
        except (OSError, ValueError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        summary = summarize(rows)
        with open(os.path.join(args.results_dir, "summary.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(summary_csv_text(summary))
        with open(os.path.join(args.results_dir, "boxplot.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(boxplot_csv_text(rows))
        for s in summary:
            err = "n/a" if s["mean_error"] is None else f"{s['mean_error']:.4f} +/- {s['std_error']:.4f}"
            print(f"{s['scenario']:<28} {s['method']:<20} {err}")
        return 1 if any(s["failures"] for s in summary) else 0

    if args.command == "verify-bounds":
        try:
            cfg = parse_config(args.config)
        except (ConfigError, OSError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        report = verify_bounds(cfg)
        outdir = os.path.join(os.path.dirname(os.path.abspath(args.config)),
                              str(cfg.get("run", {}).get("outdir", "results")))
        os.makedirs(outdir, exist_ok=True)
        with open(os.path.join(outdir, "bounds.json"), "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"bound holds in {sum(r['bound_estimation_gap_holds'] for r in report['reports'])}"
              f"/{report['repetitions']} repetitions")
        return 0 if report["all_hold"] else 1

    if args.command == "selftest":
        return 1 if selftest() else 0

    return 2  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
