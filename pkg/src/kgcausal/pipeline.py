"""Pipeline stages behind the command-line interface.

Each stage reads and writes plain files so it can be re-run on its own:

    <out>/seed_<s>/data/         panel.csv, cross_section.csv, ground_truth.json, scenarios.json
    <out>/seed_<s>/graphs/<alg>/<mode>/run_<r>/
                                 graph.json, graph.dot, constraints.json, trace.json
    <out>/seed_<s>/evaluation/   comparison.csv, comparison.txt, metrics.json
    <out>/seed_<s>/counterfactual/
                                 results.csv, summary.json
    <out>/manifest.json

Nothing written depends on wall-clock time or worker scheduling, so a re-run
with the same configuration reproduces every file byte for byte.
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .catalog import DEFAULT_TARGETS, FINANCIAL_CATALOG as CAT
from .constraints import ConstraintSet, KgEvidence, classify_edges, merge_with_proposals
from .errors import ConfigError
from .evaluation import aggregate_runs, comparison_table, score_graph, summaries_json
from .ges import run_ges
from .graph import DirectedGraph, from_json, to_dot, to_json
from .notears import run_notears
from .pc import run_pc
from .providers import EndpointConfig, build_context, live_batch, n_runs, replay
from .scm import evaluate_scenarios, fit_scm, results_csv, summary_json
from .stats import Dataset
from .synthgen import (GenConfig, GroundTruth, aggregate_cross_section, generate_panel,
                       generate_scenarios, ground_truth, load_scenarios, scenarios_json)

logger = logging.getLogger(__name__)

MODES = ("baseline", "kg", "llm", "kg+llm")
ALGORITHMS = ("pc", "ges", "notears")
PROVIDERS = ("replay", "live")
BUNDLED = "bundled"
# settings that change where or how fast results are written, not what they are
EXECUTION_ONLY = ("out", "workers", "record")


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("kgcausal") / "data" / name))


def mode_dir(mode: str) -> str:
    return mode.replace("+", "_")


@dataclass(frozen=True)
class PipelineConfig:
    out: str = "runs/default"
    data: str | None = None
    kg: str = BUNDLED
    mode: str = "all"
    algorithm: str = "all"
    provider: str = "replay"
    fixture: str | None = None
    record: str | None = None
    seeds: tuple[int, ...] = (42,)
    runs: int = 5
    n_firms: int = 500
    n_periods: int = 60
    graph: str | None = None
    scenarios: str | None = None
    truth: str | None = None
    counterfactual_algorithm: str = "notears"
    counterfactual_mode: str = "kg+llm"
    workers: int = 1

    @property
    def modes(self) -> tuple[str, ...]:
        return MODES if self.mode == "all" else (self.mode,)

    @property
    def algorithms(self) -> tuple[str, ...]:
        return ALGORITHMS if self.algorithm == "all" else (self.algorithm,)

    def kg_path(self) -> Path:
        return bundled_path("kg_evidence.json") if self.kg == BUNDLED else Path(self.kg)

    def fixture_path(self) -> Path | None:
        if self.fixture is None:
            return None
        return bundled_path("llm_proposals.jsonl") if self.fixture == BUNDLED else Path(self.fixture)

    def uses_llm(self) -> bool:
        return any("llm" in m for m in self.modes)

    def validate(self, env=None, discovery: bool = True) -> None:
        """Raise ConfigError on bad settings; provider checks only apply to discovery."""
        if self.mode != "all" and self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; choose from {', '.join(MODES)} or all")
        if self.algorithm != "all" and self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.provider not in PROVIDERS:
            raise ConfigError(f"unknown provider {self.provider!r}")
        if not self.seeds or len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be a non-empty list without repeats")
        if self.runs < 1 or self.workers < 1:
            raise ConfigError("runs and workers must be positive")
        if discovery and self.uses_llm():
            if self.provider == "replay" and self.fixture is None:
                raise ConfigError("LLM modes with the replay provider need --fixture")
            if self.provider == "live":
                EndpointConfig.from_env(env)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["seeds"] = list(self.seeds)
        return d


def parse_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys use flag spelling."""
    out = {}
    for no, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def config_from_mapping(values: dict, base: PipelineConfig = PipelineConfig()) -> PipelineConfig:
    """Coerce string values (from a config file or flags) onto the config fields."""
    kw = {}
    fields = PipelineConfig.__dataclass_fields__
    for k, v in values.items():
        if v is None:
            continue
        if k not in fields:
            raise ConfigError(f"unknown config key {k!r}")
        if k == "seeds":
            v = tuple(int(s) for s in str(v).replace(",", " ").split()) if isinstance(v, str) else tuple(int(s) for s in v)
        elif k in ("runs", "n_firms", "n_periods", "workers"):
            try:
                v = int(v)
            except ValueError:
                raise ConfigError(f"{k} must be an integer, got {v!r}") from None
        kw[k] = v
    return replace(base, **kw)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def seed_dir(cfg: PipelineConfig, seed: int) -> Path:
    return Path(cfg.out) / f"seed_{seed}"


# ----------------------------------------------------------------------
# generate


def cmd_generate(cfg: PipelineConfig) -> list[Path]:
    written = []
    for seed in cfg.seeds:
        gcfg = GenConfig(n_firms=cfg.n_firms, n_periods=cfg.n_periods, seed=seed)
        panel = generate_panel(gcfg)
        cross = aggregate_cross_section(panel)
        d = seed_dir(cfg, seed) / "data"
        files = {
            "panel.csv": panel.to_csv(),
            "cross_section.csv": cross.to_csv(),
            "ground_truth.json": ground_truth().to_json(),
            "scenarios.json": scenarios_json(generate_scenarios(gcfg)),
        }
        for name, text in files.items():
            _write(d / name, text)
            written.append(d / name)
        logger.info("seed %d: %d firms, %d panel rows clipped", seed, cross.n_samples, panel.clipped_rows)
    return written


def load_dataset(cfg: PipelineConfig, seed: int) -> Dataset:
    """The cross-section given by ``--data``, else the seed's generated file, else a fresh draw."""
    if cfg.data is not None:
        path = Path(cfg.data)
    else:
        path = seed_dir(cfg, seed) / "data" / "cross_section.csv"
        if not path.is_file():
            gcfg = GenConfig(n_firms=cfg.n_firms, n_periods=cfg.n_periods, seed=seed)
            return aggregate_cross_section(generate_panel(gcfg))
    if not path.is_file():
        raise FileNotFoundError(f"dataset not found: {path}")
    X = Dataset.read_csv(path, CAT)
    return X if X.standardized else X.standardize()


def load_truth(cfg: PipelineConfig) -> GroundTruth:
    if cfg.truth is None:
        return ground_truth()
    return GroundTruth.from_json(Path(cfg.truth).read_text(), CAT)


# ----------------------------------------------------------------------
# discover


@dataclass
class RunOutput:
    algorithm: str
    mode: str
    run: int
    graph: DirectedGraph
    converged: bool
    weights: np.ndarray | None = None
    trace: dict = field(default_factory=dict)


def kg_constraints(cfg: PipelineConfig) -> ConstraintSet:
    path = cfg.kg_path()
    if not path.is_file():
        raise FileNotFoundError(f"KG evidence file not found: {path}")
    return classify_edges(KgEvidence.load(path), CAT)


def proposal_batches(cfg: PipelineConfig, X: Dataset, kg: ConstraintSet):
    """One proposal batch per run index, from the fixture or the live endpoint."""
    if cfg.provider == "replay":
        path = cfg.fixture_path()
        available = n_runs(path)
        if cfg.runs > available:
            logger.warning("fixture has %d runs; %d requested", available, cfg.runs)
        return [replay(path, r, CAT) for r in range(min(cfg.runs, available))]
    endpoint = EndpointConfig.from_env()
    prior = DirectedGraph(len(CAT), kg.required)
    corr = X.correlation()
    contexts = {t: build_context(t, prior, corr, CAT) for t in DEFAULT_TARGETS}
    return [live_batch(endpoint, DEFAULT_TARGETS, contexts, run_index=r, fixture_path=cfg.record)
            for r in range(cfg.runs)]


def constraint_sets(cfg: PipelineConfig, X: Dataset) -> dict[str, list[ConstraintSet]]:
    n = len(CAT)
    need_kg = any(m in ("kg", "kg+llm") for m in cfg.modes)
    kg = kg_constraints(cfg) if need_kg else ConstraintSet.empty(n)
    batches = proposal_batches(cfg, X, kg) if cfg.uses_llm() else []
    out = {}
    for m in cfg.modes:
        if m == "baseline":
            out[m] = [ConstraintSet.empty(n)]
        elif m == "kg":
            out[m] = [kg]
        elif m == "llm":
            out[m] = [merge_with_proposals(None, b.proposals, CAT) for b in batches]
        else:
            out[m] = [merge_with_proposals(kg, b.proposals, CAT) for b in batches]
    return out


def discover_one(algorithm: str, X: Dataset, cs: ConstraintSet) -> tuple[DirectedGraph, bool, np.ndarray | None, dict]:
    if algorithm == "pc":
        steps: list = []
        g = run_pc(X, cs, trace=steps)
        return g, True, None, {"ci_tests": [_jsonable(s) for s in steps]}
    if algorithm == "ges":
        res = run_ges(X, cs)
        return res.graph, res.converged, None, {"score": res.score, "moves": [_jsonable(m) for m in res.moves]}
    res = run_notears(X, cs)
    stages = {k: [[CAT.name(i), CAT.name(j), round(a, 10), round(b, 10)] for i, j, a, b in v]
              for k, v in res.stages.items()}
    return res.graph, res.converged, res.W_final, {"h": res.h, "stages": stages}


def _jsonable(obj):
    if hasattr(obj, "__dataclass_fields__"):
        obj = asdict(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return round(float(obj), 10)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def run_grid(cfg: PipelineConfig, X: Dataset) -> list[RunOutput]:
    sets = constraint_sets(cfg, X)
    jobs = [(a, m, r, cs) for a in cfg.algorithms for m in cfg.modes for r, cs in enumerate(sets[m])]

    def work(job):
        a, m, r, cs = job
        g, ok, W, trace = discover_one(a, X, cs)
        trace["constraints"] = cs.to_dict(CAT)
        return RunOutput(a, m, r, g, ok, W, trace)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(work, jobs))
    return [work(j) for j in jobs]


def write_run(root: Path, out: RunOutput) -> Path:
    d = root / "graphs" / out.algorithm / mode_dir(out.mode) / f"run_{out.run}"
    _write(d / "graph.json", to_json(out.graph, CAT, out.weights))
    _write(d / "graph.dot", to_dot(out.graph, CAT, out.weights, name=f"{out.algorithm}_{mode_dir(out.mode)}"))
    cons = out.trace.pop("constraints")
    _write(d / "constraints.json", json.dumps(cons, indent=2) + "\n")
    _write(d / "trace.json", json.dumps({"converged": out.converged, **out.trace}, indent=2) + "\n")
    return d


def cmd_discover(cfg: PipelineConfig) -> bool:
    """Run the grid for every seed; returns False if any solver flagged non-convergence."""
    all_ok = True
    for seed in cfg.seeds:
        X = load_dataset(cfg, seed)
        root = seed_dir(cfg, seed)
        for out in run_grid(cfg, X):
            write_run(root, out)
            if not out.converged:
                logger.warning("seed %d %s/%s run %d did not converge", seed, out.algorithm, out.mode, out.run)
                all_ok = False
    return all_ok


# ----------------------------------------------------------------------
# evaluate


def collect_graphs(root: Path) -> dict[tuple[str, str], list[DirectedGraph]]:
    found = {}
    for a in ALGORITHMS:
        for m in MODES:
            d = root / "graphs" / a / mode_dir(m)
            runs = sorted(d.glob("run_*/graph.json"), key=lambda p: int(p.parent.name.split("_")[1]))
            if runs:
                found[(a, m)] = [from_json(p.read_text(), CAT) for p in runs]
    return found


def cmd_evaluate(cfg: PipelineConfig) -> list[Path]:
    truth = load_truth(cfg).dag
    written = []
    for seed in cfg.seeds:
        root = seed_dir(cfg, seed)
        graphs = collect_graphs(root)
        if not graphs:
            raise FileNotFoundError(f"no discovered graphs under {root / 'graphs'}")
        summaries = [aggregate_runs([score_graph(g, truth) for g in gs], a, m)
                     for (a, m), gs in graphs.items()]
        csv_text, table = comparison_table(summaries)
        d = root / "evaluation"
        _write(d / "comparison.csv", csv_text)
        _write(d / "comparison.txt", table)
        _write(d / "metrics.json", summaries_json(summaries))
        written += [d / "comparison.csv", d / "comparison.txt", d / "metrics.json"]
    return written


# ----------------------------------------------------------------------
# counterfactual


def cmd_counterfactual(cfg: PipelineConfig):
    """Fit an SCM on a discovered graph and score the scenarios; returns the summaries."""
    truth = load_truth(cfg)
    summaries = []
    for seed in cfg.seeds:
        root = seed_dir(cfg, seed)
        X = load_dataset(cfg, seed)
        if cfg.graph is not None:
            gpath = Path(cfg.graph)
        else:
            gpath = (root / "graphs" / cfg.counterfactual_algorithm / mode_dir(cfg.counterfactual_mode)
                     / "run_0" / "graph.json")
        if not gpath.is_file():
            raise FileNotFoundError(f"graph not found: {gpath}")
        g = from_json(gpath.read_text(), CAT)
        if cfg.scenarios is not None:
            scen = load_scenarios(cfg.scenarios)
        elif (root / "data" / "scenarios.json").is_file():
            scen = load_scenarios(root / "data" / "scenarios.json")
        else:
            scen = [sc for sc, _ in generate_scenarios()]
        summary = evaluate_scenarios(fit_scm(g, X), scen, truth.scm(), X)
        d = root / "counterfactual"
        _write(d / "results.csv", results_csv(summary))
        _write(d / "summary.json", summary_json(summary))
        summaries.append((seed, summary))
    return summaries


# ----------------------------------------------------------------------
# pipeline


def write_manifest(cfg: PipelineConfig, extra: dict | None = None) -> Path:
    from . import __version__

    body = {"package_version": __version__, "ground_truth_version": ground_truth().version,
            "config": {k: v for k, v in cfg.to_dict().items() if k not in EXECUTION_ONLY},
            **(extra or {})}
    path = Path(cfg.out) / "manifest.json"
    _write(path, json.dumps(body, indent=2, sort_keys=True) + "\n")
    return path


def cmd_pipeline(cfg: PipelineConfig):
    """generate -> discover -> evaluate -> counterfactual, plus a manifest."""
    cmd_generate(cfg)
    ok = cmd_discover(cfg)
    cmd_evaluate(cfg)
    cf = cmd_counterfactual(cfg)
    results = {f"seed_{s}": {"mae": round(sm.mae, 12), "directional_accuracy": sm.directional_accuracy}
               for s, sm in cf}
    write_manifest(cfg, {"converged": ok, "counterfactual": results})
    return ok, cf


def relative_files(root) -> list[str]:
    root = Path(root)
    return sorted(str(p.relative_to(root)) for p in root.rglob("*") if p.is_file())


__all__ = ["PipelineConfig", "parse_config_file", "config_from_mapping", "cmd_generate", "cmd_discover",
           "cmd_evaluate", "cmd_counterfactual", "cmd_pipeline", "run_grid", "constraint_sets",
           "bundled_path", "MODES", "ALGORITHMS"]
