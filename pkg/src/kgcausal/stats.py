"""Statistical kernels: datasets, partial correlation, Fisher-z, OLS, BIC."""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import norm

from .catalog import VariableCatalog
from .errors import CycleError, DegenerateColumn, DomainError, SingularError
from .graph import DirectedGraph, topological_order

RIDGE_PENALTY = 1e-8
# residual variances are floored here so that exactly determined columns do
# not send the log-likelihood to +inf
VARIANCE_FLOOR = 1e-12
_COND_LIMIT = 1e12


class NumericalWarning(UserWarning):
    """Emitted when a kernel falls back to a regularised computation."""


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    catalog: VariableCatalog
    standardized: bool = False

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(self.catalog):
            raise ValueError(f"data shape {X.shape} does not match {len(self.catalog)} variables")
        if not np.all(np.isfinite(X)):
            raise ValueError("dataset contains non-finite values")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        if self.standardized:
            mu, sd = X.mean(axis=0), X.std(axis=0)
            if np.any(np.abs(mu) >= 1e-9) or np.any(np.abs(sd - 1.0) >= 1e-6):
                raise ValueError("standardized flag set on non-standardized data")

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_vars(self) -> int:
        return self.X.shape[1]

    def column(self, name_or_idx) -> np.ndarray:
        j = self.catalog.idx(name_or_idx) if isinstance(name_or_idx, str) else name_or_idx
        return self.X[:, j]

    def standardize(self) -> "Dataset":
        return Dataset(zscore(self.X, self.catalog), self.catalog, standardized=True)

    def correlation(self) -> np.ndarray:
        return np.corrcoef(self.X, rowvar=False)

    def to_csv(self, path=None, digits: int = 12) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.catalog.names)
        for row in self.X:
            w.writerow([_fmt(x, digits) for x in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def read_csv(cls, path, catalog: VariableCatalog | None = None) -> "Dataset":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        if catalog is None:
            catalog = VariableCatalog(header)
        elif list(header) != list(catalog.names):
            from .errors import CatalogMismatch

            raise CatalogMismatch(f"{path}: header does not match the variable catalog")
        X = np.array([[float(x) for x in r] for r in body], dtype=float).reshape(len(body), len(header))
        mu, sd = X.mean(axis=0), X.std(axis=0)
        std = bool(np.all(np.abs(mu) < 1e-9) and np.all(np.abs(sd - 1) < 1e-6))
        return cls(X, catalog, standardized=std)


def _fmt(x: float, digits: int) -> str:
    s = f"{x:.{digits}g}"
    return "0" if s == "-0" else s


def zscore(X: np.ndarray, catalog: VariableCatalog | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    bad = np.nonzero(sd <= 1e-12 * np.maximum(1.0, np.abs(mu)))[0]
    if bad.size:
        names = [catalog.name(j) if catalog else str(j) for j in bad]
        raise DegenerateColumn(f"zero-variance column(s): {', '.join(names)}")
    Z = (X - mu) / sd
    # second pass removes the O(eps) residue of the first
    Z -= Z.mean(axis=0)
    Z /= Z.std(axis=0)
    return Z


def _as_matrix(X) -> np.ndarray:
    return X.X if isinstance(X, Dataset) else np.asarray(X, dtype=float)


def partial_correlation(X, i: int, j: int, S: Sequence[int] = (), corr: np.ndarray | None = None) -> float:
    """Partial correlation of columns ``i`` and ``j`` given ``S``.

    Inverts the correlation submatrix over ``{i, j} | S`` and reads the
    off-diagonal of the precision matrix. When that submatrix is
    ill-conditioned, the conditional covariance is formed with a
    pseudo-inverse of the ``S`` block instead (a ``NumericalWarning`` is
    emitted). A column that ``S`` determines exactly is conditionally
    constant, and the pair is reported as uncorrelated.
    """
    S = [int(s) for s in S]
    if i == j:
        raise ValueError("i and j must differ")
    if i in S or j in S:
        raise ValueError("conditioning set must exclude i and j")
    if corr is None:
        M = _as_matrix(X)
        n = M.shape[0]
        if n <= len(S) + 3:
            raise DomainError("too few samples for this conditioning set")
        idx = [i, j, *S]
        C = np.corrcoef(M[:, idx], rowvar=False)
    else:
        idx = [i, j, *S]
        C = corr[np.ix_(idx, idx)]
    if not S:
        return float(np.clip(C[0, 1], -1.0, 1.0))
    if np.linalg.cond(C) < _COND_LIMIT:
        P = np.linalg.inv(C)
        r = -P[0, 1] / math.sqrt(P[0, 0] * P[1, 1])
        return float(np.clip(r, -1.0, 1.0))
    warnings.warn("singular correlation submatrix; using pseudo-inverse", NumericalWarning, stacklevel=2)
    A, B, D = C[:2, :2], C[:2, 2:], C[2:, 2:]
    cond = A - B @ np.linalg.pinv(D, rcond=1e-10) @ B.T
    if cond[0, 0] <= 1e-10 or cond[1, 1] <= 1e-10:
        return 0.0
    r = cond[0, 1] / math.sqrt(cond[0, 0] * cond[1, 1])
    return float(np.clip(r, -1.0, 1.0))


def fisher_z_pvalue(rho: float, n_samples: int, cond_size: int) -> float:
    """Two-sided p-value of H0: zero partial correlation."""
    dof = n_samples - cond_size - 3
    if dof <= 0:
        raise DomainError("n_samples - cond_size - 3 must be positive")
    if abs(rho) >= 1.0:
        if abs(rho) > 1.0 + 1e-9 or not math.isfinite(rho):
            raise DomainError(f"|rho| = {abs(rho)} exceeds 1")
        warnings.warn("|rho| == 1 clamped to 1 - 1e-12", NumericalWarning, stacklevel=2)
        rho = math.copysign(1.0 - 1e-12, rho)
    z = 0.5 * math.log((1.0 + rho) / (1.0 - rho)) * math.sqrt(dof)
    return float(min(1.0, 2.0 * norm.sf(abs(z))))


@dataclass(frozen=True)
class OlsFit:
    intercept: float
    coefficients: dict[int, float]
    residual_variance: float
    regularized: bool = False


def ols_fit(y: int, parents: Sequence[int], X) -> OlsFit:
    """Least squares of column ``y`` on ``parents`` with an intercept.

    ``residual_variance`` uses the 1/n (maximum-likelihood) denominator.
    Collinear parents trigger a tiny ridge penalty and set ``regularized``.
    """
    M = _as_matrix(X)
    n = M.shape[0]
    parents = [int(p) for p in parents]
    if y in parents:
        raise ValueError("a node cannot be its own parent")
    if n <= len(parents) + 1:
        raise DomainError("too few samples for this parent set")
    t = M[:, y]
    if not parents:
        mu = float(t.mean())
        return OlsFit(mu, {}, float(np.mean((t - mu) ** 2)))
    P = M[:, parents]
    pm = P.mean(axis=0)
    Pc = P - pm
    tc = t - t.mean()
    G = Pc.T @ Pc
    regularized = False
    if np.linalg.cond(G) >= _COND_LIMIT:
        warnings.warn("collinear parents; applying ridge penalty", NumericalWarning, stacklevel=2)
        G = G + RIDGE_PENALTY * n * np.eye(len(parents))
        regularized = True
    beta = np.linalg.solve(G, Pc.T @ tc)
    resid = tc - Pc @ beta
    intercept = float(t.mean() - pm @ beta)
    return OlsFit(intercept, {p: float(b) for p, b in zip(parents, beta)},
                  float(np.mean(resid ** 2)), regularized)


class LocalScorer:
    """Decomposable linear-Gaussian BIC with cached local scores.

    ``local(j, parents)`` is the maximised log-likelihood of node ``j`` given
    its parents minus ``(k/2) ln n`` with ``k = |parents| + 2`` (intercept,
    coefficients, variance). Higher is better.
    """

    def __init__(self, X):
        M = _as_matrix(X)
        self.n = M.shape[0]
        Mc = M - M.mean(axis=0)
        self.cov = Mc.T @ Mc / self.n
        self._cache: dict[tuple[int, tuple[int, ...]], float] = {}

    def residual_variance(self, j: int, parents: Sequence[int]) -> float:
        ps = list(parents)
        v = self.cov[j, j]
        if ps:
            Cpp = self.cov[np.ix_(ps, ps)]
            cpj = self.cov[ps, j]
            try:
                sol = np.linalg.solve(Cpp, cpj)
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(Cpp, cpj, rcond=None)[0]
            v = v - cpj @ sol
        return float(max(v, VARIANCE_FLOOR))

    def local(self, j: int, parents: Sequence[int]) -> float:
        key = (j, tuple(sorted(parents)))
        s = self._cache.get(key)
        if s is None:
            var = self.residual_variance(j, key[1])
            ll = -0.5 * self.n * (math.log(2.0 * math.pi * var) + 1.0)
            k = len(key[1]) + 2
            s = ll - 0.5 * k * math.log(self.n)
            self._cache[key] = s
        return s

    def score(self, g: DirectedGraph) -> float:
        return sum(self.local(j, g.parents(j)) for j in range(g.n))


def bic_score(g: DirectedGraph, X) -> float:
    """Linear-Gaussian BIC of a DAG (higher is better)."""
    topological_order(g)  # raises CycleError
    return LocalScorer(X).score(g)


__all__ = [
    "Dataset", "zscore", "partial_correlation", "fisher_z_pvalue", "OlsFit", "ols_fit",
    "LocalScorer", "bic_score", "NumericalWarning", "CycleError", "SingularError",
]
