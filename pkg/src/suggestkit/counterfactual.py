"""Clipped inverse-propensity reward estimation and policy fitting.

Given logged (context, phrase, reward, propensity) interactions from a
stochastic logging policy, estimate the expected reward of a candidate
log-linear policy by importance sampling, clip the importance weights at M to
bound variance, and fit weights by quasi-Newton ascent of the clipped
estimate. Also provides the temperature-only ablation and grouped k-fold
cross-validated evaluation across a grid of M values.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .features import DIM, FeatureTable, PosLexicon
from .ngram import NgramModel

DEFAULT_M = 10.0
DEFAULT_M_GRID = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0)


class EstimationError(ValueError):
    pass


@dataclass(frozen=True)
class LoggedInteraction:
    """One displayed suggestion: the unit of the logged dataset.

    ``per_word_probs`` are the logging policy's per-word sampling
    probabilities (their product is ``propensity``); ``group`` identifies the
    source document/review for fold assignment.
    """

    context: tuple[str, ...]
    words: tuple[str, ...]
    reward: float
    propensity: float
    per_word_probs: tuple[float, ...] | None = None
    group: str | None = None

    def __post_init__(self):
        if self.propensity <= 0.0:
            raise EstimationError(f"propensity must be positive, got {self.propensity}")
        if self.reward < 0.0:
            raise EstimationError(f"reward must be non-negative, got {self.reward}")
        if len(self.words) < 1:
            raise EstimationError("logged phrase must be non-empty")

    def log_propensity(self) -> float:
        if self.per_word_probs is not None:
            return float(sum(np.log(p) for p in self.per_word_probs))
        return float(np.log(self.propensity))


@dataclass(frozen=True)
class EstimateReport:
    estimate: float
    n: int
    clip_fraction: float
    m: float


class PreparedDataset:
    """Logged data with per-position base-LM log-prob rows precomputed.

    The candidate policy's phrase probability factorizes over word positions;
    each position's softmax depends on the context only through the base-LM
    log-prob vector, which is fixed across candidate weights. Deduplicates
    positions sharing the same truncated context, so repeated evaluation
    during fitting is a handful of dense matrix ops.
    """

    def __init__(
        self,
        data: list[LoggedInteraction],
        lm: NgramModel,
        lex: PosLexicon,
        table: FeatureTable | None = None,
    ):
        if not data:
            raise EstimationError("empty dataset")
        self.data = list(data)
        self.lm = lm
        self.table = table if table is not None else FeatureTable(lm, lex)
        self.static = self.table.static
        order = lm.order
        ctx_index: dict[tuple[int, ...], int] = {}
        rows: list[np.ndarray] = []
        pos_u, pos_w, pos_rec = [], [], []
        for i, rec in enumerate(self.data):
            ctx = lm.encode(rec.context)
            for w in rec.words:
                key = tuple(ctx[-(order - 1):]) if order > 1 else ()
                u = ctx_index.get(key)
                if u is None:
                    u = len(rows)
                    ctx_index[key] = u
                    rows.append(lm.next_log_distribution(ctx))
                wid = lm.token_id(w)
                pos_u.append(u)
                pos_w.append(wid)
                pos_rec.append(i)
                ctx.append(wid)
        self.L = np.vstack(rows)  # (U, V)
        self.pos_u = np.array(pos_u, dtype=np.int64)
        self.pos_w = np.array(pos_w, dtype=np.int64)
        self.pos_rec = np.array(pos_rec, dtype=np.int64)
        self.delta = np.array([r.reward for r in self.data])
        self.log_p = np.array([r.log_propensity() for r in self.data])
        self.n = len(self.data)

    def _position_stats(self, theta: np.ndarray, with_expectations: bool):
        """Per-unique-context word probabilities and feature expectations."""
        theta = np.asarray(theta, dtype=np.float64)
        c = self.static @ theta[1:]
        scores = theta[0] * self.L + c
        m = scores.max(axis=1)
        e = np.exp(scores - m[:, None])
        z = e.sum(axis=1)
        probs = e / z[:, None]
        chosen = probs[self.pos_u, self.pos_w]
        if not with_expectations:
            return chosen, None, None
        e_lm = (probs * self.L).sum(axis=1)  # (U,)
        e_static = probs @ self.static  # (U, DIM-1)
        return chosen, e_lm, e_static

    def log_ratios(self, theta: np.ndarray) -> np.ndarray:
        """log(h_theta(y|x) / p) per record."""
        chosen, _, _ = self._position_stats(theta, with_expectations=False)
        log_h = np.bincount(self.pos_rec, weights=np.log(chosen), minlength=self.n)
        return log_h - self.log_p

    def clipped_value(self, theta: np.ndarray, m_clip: float) -> EstimateReport:
        if m_clip < 1.0:
            raise EstimationError(f"clip level M must be >= 1, got {m_clip}")
        ratios = np.exp(self.log_ratios(theta))
        est = float(np.mean(self.delta * np.minimum(m_clip, ratios)))
        return EstimateReport(est, self.n, float(np.mean(ratios >= m_clip)), m_clip)

    def ips_value(self, theta: np.ndarray) -> float:
        return float(np.mean(self.delta * np.exp(self.log_ratios(theta))))

    def objective_and_gradient(self, theta: np.ndarray, m_clip: float) -> tuple[float, np.ndarray]:
        """Clipped estimate and its gradient in theta.

        Clipped records sit on the flat side of min{M, r}; they get zero
        gradient (the subgradient choice that keeps ascent well-defined).
        """
        if m_clip < 1.0:
            raise EstimationError(f"clip level M must be >= 1, got {m_clip}")
        chosen, e_lm, e_static = self._position_stats(theta, with_expectations=True)
        log_h = np.bincount(self.pos_rec, weights=np.log(chosen), minlength=self.n)
        ratios = np.exp(log_h - self.log_p)
        value = float(np.mean(self.delta * np.minimum(m_clip, ratios)))
        rec_w = np.where(ratios < m_clip, self.delta * ratios, 0.0) / self.n
        pw = rec_w[self.pos_rec]
        uw = np.bincount(self.pos_u, weights=pw, minlength=self.L.shape[0])
        grad = np.zeros(DIM)
        grad[0] = float(pw @ self.L[self.pos_u, self.pos_w] - uw @ e_lm)
        grad[1:] = np.bincount(
            self.pos_w, weights=pw, minlength=self.static.shape[0]
        ) @ self.static - uw @ e_static
        return value, grad


def ips_estimate(data, theta, lm, lex) -> float:
    """Unclipped importance-sampling estimate (1/n) sum d_i h(y|x)/p_i."""
    return PreparedDataset(data, lm, lex).ips_value(np.asarray(theta))


def clipped_estimate(data, theta, m_clip, lm, lex) -> EstimateReport:
    """Clipped estimate (1/n) sum d_i min{M, h(y|x)/p_i} with diagnostics."""
    return PreparedDataset(data, lm, lex).clipped_value(np.asarray(theta), m_clip)


def objective_and_gradient(data, theta, m_clip, lm, lex) -> tuple[float, np.ndarray]:
    return PreparedDataset(data, lm, lex).objective_and_gradient(np.asarray(theta), m_clip)


@dataclass
class FitOptions:
    max_iter: int = 200
    gtol: float = 1e-6
    starts: list[np.ndarray] = field(default_factory=list)  # extra starting points


def fit(
    data_or_prepared,
    theta0: np.ndarray,
    m_clip: float,
    lm: NgramModel | None = None,
    lex: PosLexicon | None = None,
    opts: FitOptions | None = None,
) -> np.ndarray:
    """Maximize the clipped estimate by BFGS from theta0; returns best iterate."""
    prep = (
        data_or_prepared
        if isinstance(data_or_prepared, PreparedDataset)
        else PreparedDataset(data_or_prepared, lm, lex)
    )
    opts = opts or FitOptions()
    theta0 = np.asarray(theta0, dtype=np.float64)
    v0, _ = prep.objective_and_gradient(theta0, m_clip)
    if not np.isfinite(v0):
        raise EstimationError(f"objective is not finite at the starting point ({v0})")

    best = {"theta": theta0.copy(), "value": v0}

    def neg(theta):
        value, grad = prep.objective_and_gradient(theta, m_clip)
        if value > best["value"]:
            best["value"] = value
            best["theta"] = np.array(theta, dtype=np.float64)
        return -value, -grad

    for start in [theta0, *opts.starts]:
        minimize(
            neg,
            np.asarray(start, dtype=np.float64),
            jac=True,
            method="BFGS",
            options={"gtol": opts.gtol, "maxiter": opts.max_iter},
        )
    return best["theta"]


@dataclass(frozen=True)
class TemperatureFit:
    tau: float
    estimate: float
    flat: bool  # objective indistinguishable from constant over the search


def fit_temperature(
    data_or_prepared,
    m_clip: float,
    lm: NgramModel | None = None,
    lex: PosLexicon | None = None,
    lo: float = 0.05,
    hi: float = 5.0,
    tol: float = 1e-4,
) -> TemperatureFit:
    """Golden-section maximization of the clipped estimate over temperature.

    Searches theta = (1/tau, 0, ...) for tau in [lo, hi]; deterministic.
    """
    prep = (
        data_or_prepared
        if isinstance(data_or_prepared, PreparedDataset)
        else PreparedDataset(data_or_prepared, lm, lex)
    )

    def value(tau: float) -> float:
        theta = np.zeros(DIM)
        theta[0] = 1.0 / tau
        return prep.clipped_value(theta, m_clip).estimate

    seen: list[float] = []

    def probe(tau: float) -> float:
        v = value(tau)
        seen.append(v)
        return v

    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = probe(c), probe(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = probe(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = probe(d)
    tau = (a + b) / 2.0
    est = value(tau)
    flat = (max(seen) - min(seen)) <= 1e-9 * max(1.0, abs(max(seen)))
    return TemperatureFit(float(tau), float(est), bool(flat))


@dataclass(frozen=True)
class EvalCell:
    model: str  # "fitted" | "temperature" | "reference"
    m: float
    fold: int
    estimate: float


def crossval_evaluate(
    data: list[LoggedInteraction],
    reference_theta: np.ndarray,
    lm: NgramModel,
    lex: PosLexicon,
    folds: int = 5,
    m_fit: float = DEFAULT_M,
    m_grid=DEFAULT_M_GRID,
    fit_opts: FitOptions | None = None,
) -> list[EvalCell]:
    """Grouped k-fold evaluation of fitted / temperature-only / reference.

    Records from the same source document always share a fold. For each fold,
    the full model and the temperature ablation are fit on the remaining
    folds at ``m_fit`` and all three policies are evaluated on the held-out
    fold at every M in ``m_grid``.
    """
    if folds < 2:
        raise EstimationError(f"folds must be >= 2, got {folds}")
    groups = sorted({r.group if r.group is not None else str(i) for i, r in enumerate(data)})
    if len(groups) < folds:
        raise EstimationError(f"{len(groups)} source documents cannot fill {folds} folds")
    fold_of = {g: i % folds for i, g in enumerate(groups)}
    table = FeatureTable(lm, lex)
    cells: list[EvalCell] = []
    for k in range(folds):
        train = [r for i, r in enumerate(data) if fold_of[r.group if r.group is not None else str(i)] != k]
        held = [r for i, r in enumerate(data) if fold_of[r.group if r.group is not None else str(i)] == k]
        prep_train = PreparedDataset(train, lm, lex, table=table)
        prep_held = PreparedDataset(held, lm, lex, table=table)
        theta_fit = fit(prep_train, reference_theta, m_fit, opts=fit_opts)
        tau_fit = fit_temperature(prep_train, m_fit)
        theta_tau = np.zeros(DIM)
        theta_tau[0] = 1.0 / tau_fit.tau
        for m_eval in m_grid:
            for name, theta in (
                ("fitted", theta_fit),
                ("temperature", theta_tau),
                ("reference", np.asarray(reference_theta)),
            ):
                est = prep_held.clipped_value(theta, m_eval).estimate
                cells.append(EvalCell(name, float(m_eval), k, est))
    return cells


def summarize_cells(cells: list[EvalCell]) -> list[dict]:
    """Mean and std of the per-fold estimates for each (model, M)."""
    out = []
    keys = sorted({(c.model, c.m) for c in cells}, key=lambda t: (t[1], t[0]))
    for model, m in keys:
        vals = np.array([c.estimate for c in cells if c.model == model and c.m == m])
        out.append(
            {"model": model, "m": m, "mean": float(vals.mean()), "std": float(vals.std(ddof=1)) if len(vals) > 1 else 0.0, "folds": len(vals)}
        )
    return out


def write_evaluation_table(path: str | Path, cells: list[EvalCell]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "m", "fold", "estimate"])
        for c in cells:
            w.writerow([c.model, repr(c.m), c.fold, repr(c.estimate)])


def write_summary_table(path: str | Path, summary: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["model", "m", "mean", "std", "folds"])
        for row in summary:
            w.writerow([row["model"], repr(row["m"]), repr(row["mean"]), repr(row["std"]), row["folds"]])
