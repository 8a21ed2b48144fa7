"""Hyperparameter search: Gaussian-process surrogate with Expected
Improvement, a uniform random baseline, and a crash-resumable sequential
search loop writing one JSON line per trial."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import minimize
from scipy.stats import norm

from .model import ModelConfig

WARMUP_TRIALS = 5
GP_NOISE = 1e-6


@dataclass(frozen=True)
class IntDim:
    name: str
    lo: int
    hi: int
    log: bool = False


@dataclass(frozen=True)
class FloatDim:
    name: str
    lo: float
    hi: float
    log: bool = False


@dataclass(frozen=True)
class CatDim:
    name: str
    choices: tuple


@dataclass
class SearchSpace:
    dims: list

    def sample(self, rng: np.random.Generator) -> dict:
        """Uniform (log-uniform where flagged) independent draw."""
        out = {}
        for d in self.dims:
            if isinstance(d, CatDim):
                out[d.name] = d.choices[int(rng.integers(len(d.choices)))]
            elif isinstance(d, IntDim):
                if d.log:
                    v = math.exp(rng.uniform(math.log(d.lo), math.log(d.hi)))
                else:
                    v = rng.uniform(d.lo, d.hi + 1)
                out[d.name] = int(min(d.hi, max(d.lo, round(v))))
            else:
                if d.log:
                    out[d.name] = math.exp(rng.uniform(math.log(d.lo), math.log(d.hi)))
                else:
                    out[d.name] = float(rng.uniform(d.lo, d.hi))
        return out

    def contains(self, params: dict) -> bool:
        for d in self.dims:
            v = params[d.name]
            if isinstance(d, CatDim):
                if v not in d.choices:
                    return False
            elif not (d.lo <= v <= d.hi):
                return False
        return True

    def encode(self, params: dict) -> np.ndarray:
        """Normalized GP input: numeric dims scaled to [0,1] (log scale
        where flagged), categoricals one-hot."""
        feats = []
        for d in self.dims:
            v = params[d.name]
            if isinstance(d, CatDim):
                onehot = [1.0 if v == c else 0.0 for c in d.choices]
                feats.extend(onehot)
            else:
                lo, hi, x = d.lo, d.hi, float(v)
                if d.log:
                    lo, hi, x = math.log(lo), math.log(hi), math.log(x)
                feats.append((x - lo) / (hi - lo) if hi > lo else 0.0)
        return np.array(feats)


def search_space_for(featurizer: str) -> SearchSpace:
    """Default space; contains every published winning configuration."""
    dims = [
        IntDim("lstm_size", 32, 512, log=True),
        FloatDim("lstm_keep", 0.5, 1.0),
        FloatDim("fc_keep", 0.5, 1.0),
        FloatDim("learning_rate", 1e-5, 1e-2, log=True),
        FloatDim("adam_eps", 1e-8, 0.1, log=True),
        CatDim("activation", ("relu", "tanh")),
        CatDim("adam_beta1", (0.5, 0.9)),
    ]
    if featurizer == "cnn":
        dims += [IntDim("conv_filters", 4, 64), FloatDim("conv_keep", 0.5, 1.0)]
    elif featurizer == "rnn":
        dims += [
            IntDim("input_lstm_size", 32, 512, log=True),
            FloatDim("input_lstm_keep", 0.5, 1.0),
            CatDim("input_activation", ("relu", "tanh")),
        ]
    elif featurizer != "baseline":
        raise ValueError(f"unknown featurizer {featurizer!r}")
    return SearchSpace(dims)


def config_from_params(params: dict, featurizer: str, **extra) -> ModelConfig:
    return ModelConfig(featurizer=featurizer, **params, **extra).validate()


@dataclass
class Trial:
    number: int
    params: dict
    score: float = 0.0
    status: str = "done"
    wall_time: float = 0.0

    def to_json(self) -> str:
        return json.dumps(
            {
                "trial": self.number,
                "params": self.params,
                "score": self.score,
                "status": self.status,
                "wall_time": self.wall_time,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, line: str) -> "Trial":
        obj = json.loads(line)
        return cls(obj["trial"], obj["params"], obj["score"], obj["status"], obj.get("wall_time", 0.0))


# ---------------------------------------------------------------------------
# Gaussian process with Matern-5/2 kernel


def _matern52(xa: np.ndarray, xb: np.ndarray, lengthscales: np.ndarray, amplitude: float):
    diff = xa[:, None, :] - xb[None, :, :]
    r = np.sqrt(np.maximum(1e-30, ((diff / lengthscales) ** 2).sum(-1)))
    s5r = math.sqrt(5.0) * r
    return amplitude * (1.0 + s5r + 5.0 * r * r / 3.0) * np.exp(-s5r)


class GaussianProcess:
    """Noiseless-ish GP regression, hyperparameters fit by marginal
    likelihood with multi-start L-BFGS."""

    def __init__(self, x: np.ndarray, y: np.ndarray, restarts: int = 5, seed: int = 0):
        self.x = np.asarray(x, dtype=float)
        self.y_mean = float(np.mean(y))
        self.y_std = float(np.std(y)) or 1.0
        self.y = (np.asarray(y, dtype=float) - self.y_mean) / self.y_std
        self.dim = self.x.shape[1]
        self._fit(restarts, seed)

    def _nll(self, theta):
        theta = np.clip(theta, -8.0, 8.0)
        ls = np.exp(theta[: self.dim])
        amp = math.exp(theta[self.dim])
        k = _matern52(self.x, self.x, ls, amp) + GP_NOISE * np.eye(len(self.x))
        try:
            c, low = cho_factor(k, lower=True)
        except np.linalg.LinAlgError:
            return 1e10
        alpha = cho_solve((c, low), self.y)
        return float(0.5 * self.y @ alpha + np.log(np.diag(c)).sum())

    def _fit(self, restarts, seed):
        rng = np.random.default_rng(seed)
        best = None
        for i in range(restarts):
            theta0 = np.zeros(self.dim + 1) if i == 0 else rng.uniform(-2, 1, self.dim + 1)
            res = minimize(
                self._nll,
                theta0,
                method="L-BFGS-B",
                bounds=[(-8.0, 8.0)] * (self.dim + 1),
                options={"maxiter": 50},
            )
            if best is None or res.fun < best.fun:
                best = res
        self.lengthscales = np.exp(best.x[: self.dim])
        self.amplitude = math.exp(best.x[self.dim])
        k = _matern52(self.x, self.x, self.lengthscales, self.amplitude)
        k += GP_NOISE * np.eye(len(self.x))
        self._chol = cho_factor(k, lower=True)
        self._alpha = cho_solve(self._chol, self.y)

    def predict(self, xq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and standard deviation (original y units)."""
        ks = _matern52(np.asarray(xq, dtype=float), self.x, self.lengthscales, self.amplitude)
        mean = ks @ self._alpha
        v = cho_solve(self._chol, ks.T)
        var = np.maximum(0.0, self.amplitude + GP_NOISE - np.einsum("ij,ji->i", ks, v))
        return mean * self.y_std + self.y_mean, np.sqrt(var) * self.y_std


def expected_improvement(mean: np.ndarray, std: np.ndarray, best: float) -> np.ndarray:
    """EI for maximization; nonnegative, zero where dominated for sure."""
    out = np.zeros_like(mean)
    improve = mean - best
    pos = std > 0
    z = improve[pos] / std[pos]
    out[pos] = improve[pos] * norm.cdf(z) + std[pos] * norm.pdf(z)
    out[~pos] = np.maximum(0.0, improve[~pos])
    return np.maximum(out, 0.0)


def suggest(
    history: list[Trial],
    space: SearchSpace,
    rng: np.random.Generator,
    n_candidates: int = 1000,
) -> dict:
    """Next configuration to try: random warm-up, then the EI maximizer
    over random candidates under a GP surrogate."""
    done = [t for t in history if t.status in ("done", "failed")]
    if len(done) < WARMUP_TRIALS:
        return space.sample(rng)
    x = np.stack([space.encode(t.params) for t in done])
    y = np.array([t.score for t in done])
    if np.ptp(y) == 0:
        return space.sample(rng)
    try:
        gp = GaussianProcess(x, y)
    except np.linalg.LinAlgError:
        return space.sample(rng)
    candidates = [space.sample(rng) for _ in range(n_candidates)]
    xq = np.stack([space.encode(c) for c in candidates])
    mean, std = gp.predict(xq)
    ei = expected_improvement(mean, std, float(y.max()))
    return candidates[int(np.argmax(ei))]


def load_history(path: str | Path) -> list[Trial]:
    p = Path(path)
    if not p.exists():
        return []
    return [Trial.from_json(line) for line in p.read_text(encoding="utf-8").splitlines() if line.strip()]


def run_search(
    space: SearchSpace,
    objective,
    budget: int = 30,
    history_path: str | Path | None = None,
    seed: int = 0,
    use_gp: bool = True,
    log=None,
) -> tuple[Trial, list[Trial]]:
    """Sequential trials up to `budget`, resumable from the history file.

    `objective(params) -> score`; exceptions mark the trial failed with
    score 0 and the search continues.
    """
    history = load_history(history_path) if history_path else []
    rng = np.random.default_rng(seed + len(history))
    while len(history) < budget:
        params = suggest(history, space, rng) if use_gp else space.sample(rng)
        start = time.monotonic()
        trial = Trial(number=len(history), params=params)
        try:
            trial.score = float(objective(params))
        except Exception as exc:  # noqa: BLE001 - trial crash must not kill the search
            trial.score, trial.status = 0.0, "failed"
            if log:
                log({"trial": trial.number, "error": str(exc)})
        trial.wall_time = time.monotonic() - start
        history.append(trial)
        if history_path:
            with open(history_path, "a", encoding="utf-8") as fh:
                fh.write(trial.to_json() + "\n")
        if log:
            log({"trial": trial.number, "score": trial.score, "status": trial.status})
    best = max(history, key=lambda t: t.score)
    return best, history
