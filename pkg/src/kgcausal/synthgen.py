"""Synthetic firm-quarter panel with a known 29-edge causal graph.

Construction
------------
Every observed variable ``j`` is generated per firm and quarter as

    x[f, t, j] = mean_j + scale_j * d[f, t, j] + common_j(t)

where ``d`` is a deviation in units of the firm-level standard deviation
and ``common_j`` collects shocks shared by all firms (macro cycle,
regulatory intensity), which cancel once the cross-section is z-scored.
Linear mechanisms act on the per-quarter deviations of their parents,

    d[f, t, j] = sum_p beta[p, j] * d[f, t, p] + confounders + noise,

so averaging over quarters leaves the same equation between firm means.
Noise variances are solved so that each firm-mean deviation has unit
population variance; the coefficients of the table are therefore the exact
structural coefficients of the standardized cross-section.

Events are quarterly Bernoulli draws whose logit depends on the firm's
persistent governance/emissions level, latent firm quality and (for
regulatory changes) a rising regulatory-intensity schedule. Their
population moments come from Gauss-Hermite quadrature.

Geographic revenue shares (China, US, Europe and a hidden rest-of-world
share) sum to 100 in every row.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.special import expit

from .catalog import FINANCIAL_CATALOG, VariableCatalog
from .errors import DegenerateColumn
from .graph import DirectedGraph, is_acyclic, topological_order
from .scm import InterventionScenario, LinearScm, intervention_effect
from .stats import Dataset, zscore

CAT = FINANCIAL_CATALOG
TABLE_VERSION = "1.0"
DEFAULT_PERIODS = 60

# (source, target, standardized coefficient, mechanism)
# Edges into event variables carry the linear projection coefficient of the
# event frequency on its parent at the default 60-quarter horizon; see
# ``event_parent_coefficients``.
EDGE_TABLE: tuple[tuple[str, str, float, str], ...] = (
    ("Governance_Score", "M_and_A_Event", -0.4161,
     "weakly governed firms pursue more empire-building deals (logit slope -0.28 on persistent governance)"),
    ("Carbon_Emissions_Score", "Regulatory_Change_Event", 0.4794,
     "heavy emitters are hit by more regulatory changes (logit slope 0.33)"),
    ("Governance_Score", "Cyber_Risk_Score", -0.45, "governance quality lowers cyber exposure"),
    ("Major_Product_Launch", "Cyber_Risk_Score", 0.35, "launches expand the attack surface"),
    ("Supplier_Concentration", "Supply_Chain_Risk_Score", 0.45, "single-source suppliers raise disruption risk"),
    ("China_Revenue_Percent", "Supply_Chain_Risk_Score", 0.35, "China exposure raises supply-chain risk"),
    ("Regulatory_Change_Event", "Regulatory_Risk_Score", 0.10, "regulatory events lift regulatory risk"),
    ("Carbon_Emissions_Score", "Regulatory_Risk_Score", 0.45, "emissions attract environmental regulation"),
    ("Europe_Revenue_Percent", "Regulatory_Risk_Score", 0.25, "EU exposure adds regulatory burden"),
    ("Governance_Score", "Regulatory_Risk_Score", -0.30, "strong governance lowers compliance risk"),
    ("Supply_Chain_Risk_Score", "Market_Risk_Score", 0.35, "supply shocks feed market risk"),
    ("China_Revenue_Percent", "Market_Risk_Score", 0.33, "China exposure adds FX and trade risk"),
    ("Regulatory_Risk_Score", "Revenue_Growth_YoY", -0.040, "revenue channel of regulation"),
    ("Major_Product_Launch", "Revenue_Growth_YoY", 0.42, "launches drive top-line growth"),
    ("Supply_Chain_Risk_Score", "Revenue_Growth_YoY", -0.38, "disruptions cost sales"),
    ("Market_Risk_Score", "Revenue_Growth_YoY", -0.47, "market risk depresses demand"),
    ("US_Revenue_Percent", "Revenue_Growth_YoY", 0.37, "US exposure supports growth"),
    ("Regulatory_Risk_Score", "EBITDA_Margin", 0.050, "margin channel: preemptive cost cutting"),
    ("M_and_A_Event", "EBITDA_Margin", -0.47, "integration costs compress margins"),
    ("Cyber_Risk_Score", "EBITDA_Margin", -0.47, "cyber incidents are costly"),
    ("Supply_Chain_Risk_Score", "EBITDA_Margin", -0.47, "input shortages squeeze margins"),
    ("Customer_Concentration", "EBITDA_Margin", -0.47, "powerful customers squeeze pricing"),
    ("M_and_A_Event", "Debt_to_Equity", 0.45, "deals are debt-financed"),
    ("Market_Risk_Score", "Debt_to_Equity", 0.35, "falling equity values raise leverage"),
    ("Regulatory_Risk_Score", "Monthly_Return", -0.030, "direct sentiment channel of regulation"),
    ("Revenue_Growth_YoY", "Monthly_Return", 0.300, "growth is priced"),
    ("EBITDA_Margin", "Monthly_Return", 0.400, "profitability is priced"),
    ("Market_Risk_Score", "Monthly_Return", -0.42, "risk premia and drawdowns"),
    ("Debt_to_Equity", "Monthly_Return", -0.25, "leverage raises the cost of capital"),
)

# firm-level mean, firm-level sd, clip range
SCALES: dict[str, tuple[float, float, float, float]] = {
    "China_Revenue_Percent": (18.0, 4.0, 0.0, 100.0),
    "US_Revenue_Percent": (40.0, 5.0, 0.0, 100.0),
    "Europe_Revenue_Percent": (22.0, 4.0, 0.0, 100.0),
    "Governance_Score": (60.0, 10.0, 0.0, 100.0),
    "Supplier_Concentration": (0.35, 0.08, 0.0, 1.0),
    "Customer_Concentration": (0.30, 0.07, 0.0, 1.0),
    "Carbon_Emissions_Score": (50.0, 12.0, 0.0, 100.0),
    "Supply_Chain_Risk_Score": (50.0, 8.0, 0.0, 100.0),
    "Cyber_Risk_Score": (45.0, 8.0, 0.0, 100.0),
    "Regulatory_Risk_Score": (40.0, 8.0, 0.0, 100.0),
    "Market_Risk_Score": (50.0, 8.0, 0.0, 100.0),
    "Revenue_Growth_YoY": (0.06, 0.04, -1.0, 3.0),
    "EBITDA_Margin": (0.18, 0.05, -1.0, 1.0),
    "Debt_to_Equity": (1.2, 0.2, 0.0, 10.0),
    "Monthly_Return": (0.01, 0.02, -0.9, 1.0),
}

# share of the firm-mean noise variance that comes from quarter-to-quarter
# (AR(1)) noise rather than a persistent firm effect
TRANSIENT_SHARE = 0.02
TRANSIENT_AR = 0.5
INDUSTRY_AR = 0.6
MACRO_AR = 0.8

# geographic loadings on (own factor, home-bias factor)
GEO_LOADINGS = {
    "China_Revenue_Percent": ("geo_china", math.sqrt(0.75), -0.5),
    "Europe_Revenue_Percent": ("geo_europe", math.sqrt(0.75), -0.5),
    "US_Revenue_Percent": ("geo_us", 0.6, 0.8),
}

# event logit: base, parent slope (on the persistent parent level), quality slope, intensity slope
EVENT_LOGITS = {
    "M_and_A_Event": (math.log(0.05 / 0.95), "Governance_Score", -0.28, 0.15, 0.0),
    "Major_Product_Launch": (math.log(0.05 / 0.95), None, 0.0, 0.15, 0.0),
    "Regulatory_Change_Event": (math.log(0.05 / 0.95), "Carbon_Emissions_Score", 0.33, 0.15, 1.0),
}

# hidden confounders, loadings in standardized firm-mean units
QUALITY_LOADINGS = {"Monthly_Return": 0.10}
INDUSTRY_LOADINGS = {"Supply_Chain_Risk_Score": 0.10, "Revenue_Growth_YoY": -0.10}
# common shocks, in firm-sd units per quarter (cancel in the cross-section)
MACRO_LOADINGS = {"Market_Risk_Score": 0.5, "Revenue_Growth_YoY": -0.3, "Monthly_Return": 0.5}
INTENSITY_LOADINGS = {"Regulatory_Risk_Score": 0.5}

SCENARIOS = (
    ("Regulatory Change -> Return", "Regulatory_Change_Event", 1.0, "Monthly_Return"),
    ("M&A Event -> Margin", "M_and_A_Event", 1.0, "EBITDA_Margin"),
    ("Market Risk -> Return", "Market_Risk_Score", 0.3, "Monthly_Return"),
    ("Supply Chain -> Revenue", "Supply_Chain_Risk_Score", 0.4, "Revenue_Growth_YoY"),
    ("Cyber Risk -> Margin", "Cyber_Risk_Score", 0.35, "EBITDA_Margin"),
    ("Product Launch -> Revenue", "Major_Product_Launch", 1.0, "Revenue_Growth_YoY"),
)

_GAUSS_NODES = 48


@dataclass(frozen=True)
class GenConfig:
    n_firms: int = 500
    n_periods: int = DEFAULT_PERIODS
    seed: int = 42
    include_counterfactuals: bool = True

    def __post_init__(self):
        if self.n_firms < 1:
            raise ValueError("n_firms must be at least 1")
        if self.n_periods < 8:
            raise ValueError("n_periods must be at least 8")


@dataclass(frozen=True)
class GroundTruth:
    dag: DirectedGraph
    coefficients: dict[tuple[int, int], float]
    manifest: dict[tuple[int, int], str]
    catalog: VariableCatalog = CAT
    version: str = TABLE_VERSION

    def scm(self) -> LinearScm:
        """Standardized ground-truth SCM: zero intercepts and means."""
        return LinearScm.from_coefficients(self.dag, self.catalog, self.coefficients)

    def to_json(self) -> str:
        nm = self.catalog.name
        return json.dumps({
            "version": self.version,
            "edges": [{"source": nm(u), "target": nm(v), "coefficient": self.coefficients[(u, v)],
                       "mechanism": self.manifest[(u, v)]}
                      for u, v in self.dag.sorted_edges()],
        }, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str, catalog: VariableCatalog = CAT) -> "GroundTruth":
        obj = json.loads(text)
        coef, man = {}, {}
        for e in obj["edges"]:
            key = (catalog.idx(e["source"]), catalog.idx(e["target"]))
            coef[key] = float(e["coefficient"])
            man[key] = e.get("mechanism", "")
        return cls(DirectedGraph(len(catalog), coef), coef, man, catalog, obj.get("version", TABLE_VERSION))


def ground_truth() -> GroundTruth:
    """The fixed 29-edge DAG with its standardized coefficients."""
    coef = {(CAT.idx(s), CAT.idx(t)): c for s, t, c, _ in EDGE_TABLE}
    man = {(CAT.idx(s), CAT.idx(t)): m for s, t, _, m in EDGE_TABLE}
    dag = DirectedGraph(len(CAT), coef)
    assert is_acyclic(dag) and len(dag) == 29
    return GroundTruth(dag, coef, man)


# ----------------------------------------------------------------------
# population moments


def ar1_mean_variance(T: int, phi: float) -> float:
    """Variance of the time average of a unit-variance stationary AR(1)."""
    k = np.arange(1, T)
    return float((T + 2.0 * np.sum((T - k) * phi ** k)) / T ** 2)


def intensity_schedule(T: int) -> np.ndarray:
    """Cumulative regulatory intensity, rising linearly from 1/T to 1."""
    return np.arange(1, T + 1) / T


def _event_grid(name: str, T: int):
    b0, parent, b_par, b_q, b_r = EVENT_LOGITS[name]
    x, w = hermegauss(_GAUSS_NODES)
    w = w / w.sum()
    r = intensity_schedule(T)
    U, Q = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    logit = b0 + b_par * U[..., None] + b_q * Q[..., None] + b_r * (r - r.mean())
    p = expit(logit)
    pbar = p.mean(axis=-1)
    binom = (p * (1 - p)).mean(axis=-1) / T
    return U, Q, W, pbar, binom


@dataclass(frozen=True)
class EventMoments:
    mean: float
    sd: float
    cov_parent_level: float  # with the parent's persistent (unit) factor
    cov_quality: float
    mean_given_quality: np.ndarray  # E[pbar | q] on the quadrature nodes


@lru_cache(maxsize=None)
def event_moments(name: str, T: int = DEFAULT_PERIODS) -> EventMoments:
    U, Q, W, pbar, binom = _event_grid(name, T)
    mu = float(np.sum(W * pbar))
    var = float(np.sum(W * pbar ** 2) - mu ** 2 + np.sum(W * binom))
    sd = math.sqrt(var)
    cu = float(np.sum(W * pbar * U)) / sd
    cq = float(np.sum(W * pbar * Q)) / sd
    wq = W.sum(axis=0)
    m_q = (W * pbar).sum(axis=0) / wq
    return EventMoments(mu, sd, cu, cq, m_q)


def event_parent_coefficients(T: int = DEFAULT_PERIODS) -> dict[tuple[str, str], float]:
    """Standardized coefficient of each event on its observed parent."""
    out = {}
    for name, (_, parent, *_rest) in EVENT_LOGITS.items():
        if parent is not None:
            out[(parent, name)] = event_moments(name, T).cov_parent_level * math.sqrt(1 - TRANSIENT_SHARE)
    return out


class _Model:
    """Linear loadings of every standardized firm-mean on a common basis."""

    def __init__(self, T: int, strict: bool = True):
        self.T = T
        self.strict = strict
        gt = ground_truth()
        self.gt = gt
        gauss = ["geo_china", "geo_europe", "geo_us", "geo_home", "quality", "industry"]
        gauss += [f"level:{n}" for n in ("Governance_Score", "Supplier_Concentration",
                                        "Customer_Concentration", "Carbon_Emissions_Score")]
        gauss += [f"noise:{n}" for n in CAT.names if n not in EVENT_LOGITS]
        events = [f"event:{n}" for n in EVENT_LOGITS]
        self.basis = gauss + events
        self.bix = {b: i for i, b in enumerate(self.basis)}
        nb = len(self.basis)
        S = np.eye(nb)
        ev_names = list(EVENT_LOGITS)
        mom = {n: event_moments(n, T) for n in ev_names}
        x, w = hermegauss(_GAUSS_NODES)
        w = w / w.sum()
        for a in range(len(ev_names)):
            for b in range(len(ev_names)):
                na, nb_ = ev_names[a], ev_names[b]
                ma, mb = mom[na], mom[nb_]
                if a == b:
                    resid = 1.0 - ma.cov_quality ** 2 - (ma.cov_parent_level ** 2 if EVENT_LOGITS[na][1] else 0.0)
                    S[self.bix[f"event:{na}"], self.bix[f"event:{na}"]] = resid
                else:
                    cov = (float(np.sum(w * ma.mean_given_quality * mb.mean_given_quality)) - ma.mean * mb.mean)
                    cov /= ma.sd * mb.sd
                    S[self.bix[f"event:{na}"], self.bix[f"event:{nb_}"]] = cov - ma.cov_quality * mb.cov_quality
        self.Sigma = S
        self.mom = mom
        self.loadings: dict[str, np.ndarray] = {}
        self.noise_var: dict[str, float] = {}
        self._build()

    def _vec(self, **kw) -> np.ndarray:
        v = np.zeros(len(self.basis))
        for k, c in kw.items():
            v[self.bix[k]] += c
        return v

    def _e(self, key: str, c: float = 1.0) -> np.ndarray:
        v = np.zeros(len(self.basis))
        v[self.bix[key]] = c
        return v

    def _build(self):
        tau = TRANSIENT_SHARE
        gt = self.gt
        for j in topological_order(gt.dag):
            name = CAT.name(j)
            if name in GEO_LOADINGS:
                own, a, h = GEO_LOADINGS[name]
                L = math.sqrt(1 - tau) * (self._e(own, a) + self._e("geo_home", h)) + self._e(f"noise:{name}", math.sqrt(tau))
                self.noise_var[name] = tau
            elif f"level:{name}" in self.bix:
                L = self._e(f"level:{name}", math.sqrt(1 - tau)) + self._e(f"noise:{name}", math.sqrt(tau))
                self.noise_var[name] = tau
            elif name in EVENT_LOGITS:
                _, parent, *_ = EVENT_LOGITS[name]
                m = self.mom[name]
                L = self._e("quality", m.cov_quality) + self._e(f"event:{name}")
                if parent is not None:
                    L += self._e(f"level:{parent}", m.cov_parent_level)
            else:
                L = np.zeros(len(self.basis))
                for p in gt.dag.parents(j):
                    L += gt.coefficients[(p, j)] * self.loadings[CAT.name(p)]
                L += self._e("quality", QUALITY_LOADINGS.get(name, 0.0))
                L += self._e("industry", INDUSTRY_LOADINGS.get(name, 0.0))
                signal = float(L @ self.Sigma @ L)
                nv = 1.0 - signal
                if nv <= 0 and self.strict:
                    raise ValueError(f"coefficient table leaves no noise variance for {name} (signal {signal:.3f})")
                self.noise_var[name] = nv
                L += self._e(f"noise:{name}", math.sqrt(max(nv, 0.0)))
            self.loadings[name] = L

    def covariance(self) -> np.ndarray:
        L = np.array([self.loadings[n] for n in CAT.names])
        return L @ self.Sigma @ L.T


@lru_cache(maxsize=None)
def population_model(T: int = DEFAULT_PERIODS) -> _Model:
    return _Model(T)


def population_covariance(T: int = DEFAULT_PERIODS) -> np.ndarray:
    """Exact covariance (= correlation) matrix of the standardized cross-section."""
    return population_model(T).covariance()


# ----------------------------------------------------------------------
# panel generation


@dataclass(frozen=True, eq=False)
class PanelDataset:
    firm_id: np.ndarray
    period: np.ndarray
    values: np.ndarray
    hidden: dict = field(default_factory=dict)
    clipped_rows: int = 0
    catalog: VariableCatalog = CAT

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.catalog.idx(name)]

    def to_csv(self, path=None, digits: int = 10) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["firm_id", "period", *self.catalog.names])
        for f, t, row in zip(self.firm_id, self.period, self.values):
            w.writerow([int(f), int(t), *(_fmt(x, digits) for x in row)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def dynamics(self, names=("Revenue_Growth_YoY", "EBITDA_Margin", "Market_Risk_Score", "Monthly_Return"),
                 lags=(1, 2, 3), window: int = 6) -> dict[str, np.ndarray]:
        """Lagged copies and trailing moving averages per firm (NaN where undefined)."""
        firms = np.unique(self.firm_id)
        T = self.n_rows // len(firms)
        out = {}
        for name in names:
            x = self.column(name).reshape(len(firms), T)
            for k in lags:
                lagged = np.full_like(x, np.nan)
                lagged[:, k:] = x[:, :-k]
                out[f"{name}_lag{k}"] = lagged.ravel()
            ma = np.full_like(x, np.nan)
            c = np.cumsum(np.pad(x, ((0, 0), (1, 0))), axis=1)
            ma[:, window - 1:] = (c[:, window:] - c[:, :-window]) / window
            out[f"{name}_ma{window}"] = ma.ravel()
        return out


def _fmt(x: float, digits: int) -> str:
    s = f"{x:.{digits}g}"
    return "0" if s == "-0" else s


class _Streams:
    """One PCG64 stream per (component, firm); common series use firm = -1."""

    def __init__(self, seed: int):
        self.seed = seed
        self._ids: dict[str, int] = {}

    def rng(self, component: str, firm: int) -> np.random.Generator:
        cid = self._ids.setdefault(component, _component_id(component))
        ss = np.random.SeedSequence(self.seed, spawn_key=(cid, firm + 1))
        return np.random.Generator(np.random.PCG64(ss))

    def normal(self, component: str, n_firms: int, size: int = 1) -> np.ndarray:
        return np.stack([self.rng(component, f).standard_normal(size) for f in range(n_firms)])

    def uniform(self, component: str, n_firms: int, size: int) -> np.ndarray:
        return np.stack([self.rng(component, f).random(size) for f in range(n_firms)])


def _component_id(name: str) -> int:
    # stable across runs and platforms (no Python hash randomisation)
    h = 0
    for ch in name.encode():
        h = (h * 131 + ch) % (2 ** 31 - 1)
    return h


def _ar1(innov: np.ndarray, phi: float) -> np.ndarray:
    """Stationary unit-variance AR(1) along the last axis from standard normals."""
    out = np.empty_like(innov)
    out[..., 0] = innov[..., 0]
    s = math.sqrt(1 - phi * phi)
    for t in range(1, innov.shape[-1]):
        out[..., t] = phi * out[..., t - 1] + s * innov[..., t]
    return out


def generate_panel(cfg: GenConfig = GenConfig()) -> PanelDataset:
    """Simulate the firm x quarter panel; fully determined by ``cfg.seed``."""
    F, T = cfg.n_firms, cfg.n_periods
    model = population_model(T)
    gt = model.gt
    st = _Streams(cfg.seed)
    kappa = ar1_mean_variance(T, TRANSIENT_AR)
    kappa_ind = ar1_mean_variance(T, INDUSTRY_AR)

    # step 2: hidden confounders
    macro = _ar1(st.rng("macro", -1).standard_normal(T), MACRO_AR)
    intensity = intensity_schedule(T)
    quality = st.normal("quality", F)[:, 0]
    industry = _ar1(st.normal("industry", F, T), INDUSTRY_AR)
    factors = {k: st.normal(k, F)[:, 0] for k in ("geo_china", "geo_europe", "geo_us", "geo_home")}
    levels = {n: st.normal(f"level:{n}", F)[:, 0] for n in
              ("Governance_Score", "Supplier_Concentration", "Customer_Concentration", "Carbon_Emissions_Score")}

    def transient(name: str, var_of_mean: float) -> np.ndarray:
        if var_of_mean <= 0:
            return np.zeros((F, T))
        return math.sqrt(var_of_mean / kappa) * _ar1(st.normal(f"transient:{name}", F, T), TRANSIENT_AR)

    tau = TRANSIENT_SHARE
    dev: dict[str, np.ndarray] = {}
    raw: dict[str, np.ndarray] = {}
    # steps 3a-3d in causal order
    for j in topological_order(gt.dag):
        name = CAT.name(j)
        if name in GEO_LOADINGS:
            own, a, h = GEO_LOADINGS[name]
            level = math.sqrt(1 - tau) * (a * factors[own] + h * factors["geo_home"])
            d = level[:, None] + transient(name, tau)
        elif name in levels:
            d = math.sqrt(1 - tau) * levels[name][:, None] + transient(name, tau)
        elif name in EVENT_LOGITS:
            b0, parent, b_par, b_q, b_r = EVENT_LOGITS[name]
            logit = b0 + b_q * quality[:, None] + b_r * (intensity - intensity.mean())[None, :]
            if parent is not None:
                logit = logit + b_par * levels[parent][:, None]
            p = expit(logit) * np.ones((F, T))
            B = (st.uniform(f"event:{name}", F, T) < p).astype(float)
            m = model.mom[name]
            raw[name] = B
            # an event quarter moves children by one firm-level sd (times beta);
            # the rest of the effect is the firm's realised event-rate exposure.
            # Both parts average to (rate - mean) / sd over the panel.
            a = m.sd / (1.0 - m.mean)
            rate = B.mean(axis=1, keepdims=True)
            dev[name] = (a * (B - m.mean) + (1.0 - a) * (rate - m.mean)) / m.sd
            continue
        else:
            d = np.zeros((F, T))
            for pj in gt.dag.parents(j):
                d += gt.coefficients[(pj, j)] * dev[CAT.name(pj)]
            d += QUALITY_LOADINGS.get(name, 0.0) * quality[:, None]
            d += INDUSTRY_LOADINGS.get(name, 0.0) * industry / math.sqrt(kappa_ind)
            nv = model.noise_var[name]
            d += math.sqrt(nv * (1 - tau)) * st.normal(f"persistent:{name}", F)
            d += transient(name, nv * tau)
        mu, sd, _, _ = SCALES[name]
        common = MACRO_LOADINGS.get(name, 0.0) * macro + INTENSITY_LOADINGS.get(name, 0.0) * (intensity - intensity.mean())
        dev[name] = d
        raw[name] = mu + sd * (d + common[None, :])

    clipped = np.zeros((F, T), dtype=bool)
    for name, (_, _, lo, hi) in SCALES.items():
        x = raw[name]
        out = (x < lo) | (x > hi)
        if out.any():
            clipped |= out
            raw[name] = np.clip(x, lo, hi)

    # shares: rest of world absorbs the remainder so every row sums to 100
    geo = ["China_Revenue_Percent", "US_Revenue_Percent", "Europe_Revenue_Percent"]
    tot = sum(raw[g] for g in geo)
    bad = tot > 100.0
    if bad.any():
        for g in geo:
            raw[g] = np.where(bad, raw[g] * 100.0 / tot, raw[g])
        clipped |= bad
    row_world = np.where(bad, 0.0, 100.0 - tot)

    values = np.stack([raw[n].ravel() for n in CAT.names], axis=1)
    firm_id = np.repeat(np.arange(F), T)
    period = np.tile(np.arange(T), F)
    hidden = {
        "macro_condition": np.tile(macro, F),
        "regulatory_intensity": np.tile(intensity, F),
        "industry_shock": industry.ravel(),
        "firm_quality": np.repeat(quality, T),
        "Rest_of_World_Revenue_Percent": row_world.ravel(),
    }
    return PanelDataset(firm_id, period, values, hidden, int(clipped.sum()))


def aggregate_cross_section(panel: PanelDataset) -> Dataset:
    """Firm-level means, z-scored column by column."""
    if panel.n_rows == 0:
        raise ValueError("empty panel")
    firms, inv = np.unique(panel.firm_id, return_inverse=True)
    sums = np.zeros((len(firms), panel.values.shape[1]))
    np.add.at(sums, inv, panel.values)
    counts = np.bincount(inv).astype(float)
    means = sums / counts[:, None]
    if len(firms) < 2:
        raise DegenerateColumn("a single firm gives zero variance in every column")
    return Dataset(zscore(means, panel.catalog), panel.catalog, standardized=True)


def generate_scenarios(cfg: GenConfig = GenConfig()) -> list[tuple[InterventionScenario, float]]:
    """The six intervention scenarios with their ground-truth effects."""
    if not cfg.include_counterfactuals:
        raise ValueError("counterfactual scenarios were not requested (include_counterfactuals=False)")
    truth = ground_truth().scm()
    out = []
    for label, var, value, target in SCENARIOS:
        sc = InterventionScenario(label, var, value, target)
        out.append((sc, intervention_effect(truth, var, value, target)))
    return out


def scenarios_json(items) -> str:
    return json.dumps([{**sc.to_dict(), "true_effect": round(eff, 12)} for sc, eff in items], indent=2) + "\n"


def load_scenarios(path) -> list[InterventionScenario]:
    return [InterventionScenario.from_dict(d) for d in json.loads(Path(path).read_text())]
