"""Feedforward surrogate networks and the surrogate-assisted hawk optimizer.

The surrogate is a small tanh MLP trained with Adam on internal coordinates
normalized to [0, 1] per variable and standardized targets.  It is written
directly in numpy so that predictions are bitwise deterministic, members of
an ensemble train independently, and the exact analytic gradient of the
output with respect to the inputs is available.

``NHHO`` implements offline data-driven optimization in four phases:

1. sample and truly evaluate ``true_budget`` points (in parallel),
2. train an ensemble of networks on bootstrap resamples of that data,
3. run the hawk optimizer against the ensemble-mean prediction,
4. truly re-evaluate the top-K distinct surrogate optima and return the best
   true-fitness point found anywhere (initial samples included).

There is no infill loop: the surrogate is never retrained, and every reported
fitness is a true evaluation.
"""

from __future__ import annotations

import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .algorithms.base import HyperParam, _coerce_fitness, _coerce_space
from .algorithms.hho import HHO
from .engine import Evaluator, GenRecord, RunLog, config_hash
from .problems import FitnessSpec

__all__ = ["TrainConfig", "SurrogateNet", "train_surrogate", "predict", "NHHO"]


@dataclass(frozen=True)
class TrainConfig:
    """Training setup for one surrogate network."""

    hidden: tuple[int, ...] = (64, 64)
    epochs: int = 400
    learning_rate: float = 5e-3
    batch_size: int = 32
    val_split: float = 0.1
    seed: int | None = None


@dataclass
class SurrogateNet:
    """A trained tanh MLP with its input/output normalization."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    x_low: np.ndarray
    x_high: np.ndarray
    y_mean: float
    y_std: float
    val_error: float = float("nan")

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    def _normalize(self, x: np.ndarray) -> np.ndarray:
        return (x - self.x_low) / (self.x_high - self.x_low)

    def _forward(self, z: np.ndarray) -> np.ndarray:
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            z = np.tanh(z @ w + b)
        return z @ self.weights[-1] + self.biases[-1]

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.input_dim:
            raise ValueError(f"expected {self.input_dim} inputs, got {x.shape[1]}")
        out = self._forward(self._normalize(x))
        return out[:, 0] * self.y_std + self.y_mean

    def predict(self, x) -> float:
        return float(self.predict_batch(np.asarray(x, dtype=float)[None, :])[0])

    def gradient(self, x) -> np.ndarray:
        """Analytic d(prediction)/d(input) at one point."""
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.input_dim:
            raise ValueError(f"expected {self.input_dim} inputs, got {x.shape[0]}")
        z = self._normalize(x[None, :])
        # forward pass storing activations
        acts = [z]
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            z = np.tanh(z @ w + b)
            acts.append(z)
        # backward: d out / d input, chained through tanh' = 1 - tanh^2
        grad = self.weights[-1][:, 0]
        for w, act in zip(reversed(self.weights[:-1]), reversed(acts[1:])):
            grad = w @ ((1.0 - act[0] ** 2) * grad)
        return grad * self.y_std / (self.x_high - self.x_low)


def predict(net: SurrogateNet, x) -> float:
    """Deterministic forward pass for one internal-coordinate vector."""
    return net.predict(x)


def train_surrogate(x: np.ndarray, y: np.ndarray, low: np.ndarray, high: np.ndarray,
                    cfg: TrainConfig = TrainConfig()) -> SurrogateNet:
    """Fit one network with Adam; returns the best-validation weights.

    Inputs are normalized to [0, 1] with the supplied per-variable bounds and
    targets standardized.  Constant targets yield a constant predictor with a
    warning.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = x.shape
    rng = np.random.default_rng(cfg.seed)

    y_mean = float(y.mean())
    y_std = float(y.std())
    widths = [d, *cfg.hidden, 1]

    def init_net() -> tuple[list[np.ndarray], list[np.ndarray]]:
        ws, bs = [], []
        for fan_in, fan_out in zip(widths[:-1], widths[1:]):
            scale = np.sqrt(6.0 / (fan_in + fan_out))
            ws.append(rng.uniform(-scale, scale, size=(fan_in, fan_out)))
            bs.append(np.zeros(fan_out))
        return ws, bs

    if y_std == 0.0:
        warnings.warn("surrogate targets are constant; returning a constant predictor")
        ws, bs = init_net()
        ws = [np.zeros_like(w) for w in ws]
        return SurrogateNet(ws, bs, np.asarray(low, float), np.asarray(high, float),
                            y_mean, 1.0, val_error=0.0)

    xn = (x - low) / (np.asarray(high, float) - low)
    yn = (y - y_mean) / y_std

    n_val = max(1, int(round(cfg.val_split * n))) if n >= 10 else 0
    perm = rng.permutation(n)
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    x_tr, y_tr = xn[train_idx], yn[train_idx]
    x_val, y_val = xn[val_idx], yn[val_idx]

    ws, bs = init_net()
    m_w = [np.zeros_like(w) for w in ws]
    v_w = [np.zeros_like(w) for w in ws]
    m_b = [np.zeros_like(b) for b in bs]
    v_b = [np.zeros_like(b) for b in bs]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0

    def forward_full(z):
        acts = [z]
        for w, b in zip(ws[:-1], bs[:-1]):
            z = np.tanh(z @ w + b)
            acts.append(z)
        acts.append(z @ ws[-1] + bs[-1])
        return acts

    best_val = np.inf
    best = ([w.copy() for w in ws], [b.copy() for b in bs])
    n_tr = len(train_idx)
    batch = min(cfg.batch_size, n_tr)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n_tr)
        for at in range(0, n_tr, batch):
            idx = order[at:at + batch]
            acts = forward_full(x_tr[idx])
            resid = (acts[-1][:, 0] - y_tr[idx]) / len(idx)
            delta = resid[:, None]  # d(loss)/d(pre-output), loss = 0.5*mse
            grads_w, grads_b = [], []
            for li in range(len(ws) - 1, -1, -1):
                grads_w.append(acts[li].T @ delta)
                grads_b.append(delta.sum(axis=0))
                if li > 0:
                    delta = (delta @ ws[li].T) * (1.0 - acts[li] ** 2)
            grads_w.reverse()
            grads_b.reverse()
            step += 1
            for li in range(len(ws)):
                for param, grad, m, v in ((ws[li], grads_w[li], m_w[li], v_w[li]),
                                          (bs[li], grads_b[li], m_b[li], v_b[li])):
                    m *= beta1
                    m += (1 - beta1) * grad
                    v *= beta2
                    v += (1 - beta2) * grad ** 2
                    mhat = m / (1 - beta1 ** step)
                    vhat = v / (1 - beta2 ** step)
                    param -= cfg.learning_rate * mhat / (np.sqrt(vhat) + eps)
        if n_val:
            pred = forward_full(x_val)[-1][:, 0]
            val = float(np.mean((pred - y_val) ** 2))
            if val < best_val:
                best_val = val
                best = ([w.copy() for w in ws], [b.copy() for b in bs])
    if n_val:
        ws, bs = best
        val_error = float(np.sqrt(best_val) * y_std)
    else:
        val_error = float("nan")
    return SurrogateNet(ws, bs, np.asarray(low, float), np.asarray(high, float),
                        y_mean, y_std, val_error=val_error)


class NHHO:
    """Offline surrogate-assisted Harris hawks optimization.

    ``evolute(true_budget, ngen_surrogate)`` runs the four phases and returns
    ``(x_best, y_best, log)``; ``y_best`` is always a true fitness value and
    exactly ``true_budget + top_k`` true evaluations are spent (``true_budget``
    when ``ngen_surrogate == 0`` skips the surrogate phases).
    """

    name = "nhho"
    version = "1.0"
    pop_alias = "nhawks"
    default_population = 20
    min_population = 2
    HYPERPARAMS = {
        "ensemble": HyperParam("int", 5, 1, 50, doc="surrogate ensemble size"),
        "top_k": HyperParam("int", 5, 1, 100, doc="surrogate optima re-evaluated"),
        "epochs": HyperParam("int", 400, 10, 10000, doc="training epochs per member"),
        "hidden": HyperParam("int", 64, 4, 1024, doc="hidden layer width (two layers)"),
    }
    EXTRA_PARAMS = ("true_budget", "ngen_surrogate")

    def __init__(self, mode, fit, bounds, nhawks: int = 20, ensemble: int = 5,
                 top_k: int = 5, epochs: int = 400, hidden: int = 64,
                 true_budget: int | None = None, ngen_surrogate: int | None = None,
                 seed=None, workers: int = 1):
        self.mode = mode
        self.space = _coerce_space(bounds)
        self.fitspec = _coerce_fitness(fit, mode)
        self._sign = 1.0 if mode == "min" else -1.0
        self.nhawks = int(nhawks)
        self.ensemble = int(ensemble)
        self.top_k = int(top_k)
        self.epochs = int(epochs)
        self.hidden = int(hidden)
        self.seed = seed
        self.workers = int(workers)
        # CLI-style configs carry the phase budgets in the algorithm block.
        self.true_budget = true_budget
        self.ngen_surrogate = ngen_surrogate
        self.log = RunLog(mode=mode)
        self.nets: list[SurrogateNet] = []

    def config(self) -> dict:
        return {
            "algorithm": self.name,
            "mode": self.mode,
            "space": self.space.to_dict(),
            "nhawks": self.nhawks,
            "seed": self.seed,
            "hyperparams": {"ensemble": self.ensemble, "top_k": self.top_k,
                            "epochs": self.epochs, "hidden": self.hidden},
        }

    def ensemble_mean(self, internal: np.ndarray) -> float:
        """Mean prediction over the trained ensemble (order-invariant)."""
        return float(np.mean([net.predict(internal) for net in self.nets]))

    def evolute(self, true_budget: int | None = None,
                ngen_surrogate: int | None = None, verbose: bool = False):
        true_budget = self.true_budget if true_budget is None else true_budget
        ngen_surrogate = (self.ngen_surrogate if ngen_surrogate is None
                          else ngen_surrogate)
        if true_budget is None or ngen_surrogate is None:
            raise ValueError("true_budget and ngen_surrogate are required")
        d = self.space.dimension
        if true_budget < 10 * d:
            raise ValueError(f"true_budget must be >= 10*d = {10 * d}, "
                             f"got {true_budget}")
        rng = np.random.default_rng(self.seed)
        self.log = RunLog(mode=self.mode)

        with Evaluator(self.space, self.fitspec, workers=self.workers) as ev:
            # Phase 1: design of experiments with true evaluations.
            t0 = time.perf_counter()
            x_samples = self.space.sample_internal(rng, true_budget)
            raw = ev(x_samples)
            g = self._sign * raw
            i_best = int(np.argmin(g))
            xbest, gbest = x_samples[i_best].copy(), float(g[i_best])
            self.log.append(GenRecord(
                generation=1, nevals=ev.eval_count,
                best=self._sign * gbest,
                gen_best=float(raw.min() if self.mode == "min" else raw.max()),
                gen_mean=float(raw.mean()),
                elapsed_s=time.perf_counter() - t0))
            if verbose:
                print(f"[nhho] sampled {true_budget} true points, "
                      f"best={self._sign * gbest:.6g}", flush=True)

            if ngen_surrogate > 0:
                # Phase 2: bootstrap ensemble (members are independent; train
                # concurrently when workers allow).
                t0 = time.perf_counter()
                lo, hi = self.space.internal_lower, self.space.internal_upper
                member_cfgs = []
                for m in range(self.ensemble):
                    idx = rng.integers(true_budget, size=true_budget)
                    member_cfgs.append((x_samples[idx], raw[idx],
                                        TrainConfig(hidden=(self.hidden, self.hidden),
                                                    epochs=self.epochs,
                                                    seed=int(rng.integers(2 ** 31)))))
                if self.workers > 1:
                    with ThreadPoolExecutor(max_workers=self.workers) as pool:
                        self.nets = list(pool.map(
                            lambda c: train_surrogate(c[0], c[1], lo, hi, c[2]),
                            member_cfgs))
                else:
                    self.nets = [train_surrogate(xm, ym, lo, hi, cfg)
                                 for xm, ym, cfg in member_cfgs]
                if verbose:
                    errs = ", ".join(f"{n.val_error:.3g}" for n in self.nets)
                    print(f"[nhho] trained {self.ensemble} surrogates "
                          f"(held-out rmse: {errs})", flush=True)

                # Phase 3: hawks on the ensemble-mean prediction.
                def surrogate_fitness(decoded):
                    return self.ensemble_mean(self.space.encode(decoded))

                hho = HHO(mode=self.mode,
                          fit=FitnessSpec(name="surrogate", evaluator=surrogate_fitness,
                                          mode=self.mode),
                          bounds=self.space, nhawks=self.nhawks,
                          seed=int(rng.integers(2 ** 31)), workers=1)
                hho_ev = Evaluator(self.space, hho.fitspec, workers=1, record=True)
                hho._evaluator = hho_ev
                hho.rng = np.random.default_rng(hho.seed)
                hho._ngen_total = ngen_surrogate
                hho._gen_values = []
                hho._initialize(None)
                for k in range(1, ngen_surrogate + 1):
                    hho._gen_values = []
                    hho._step(k)
                tape = hho_ev.drain_records()

                # Phase 4: re-evaluate the top-K distinct surrogate optima.
                order = sorted(range(len(tape)),
                               key=lambda t: (self._sign * tape[t][2], tape[t][0]))
                seen, top = set(), []
                for t in order:
                    key = tuple(self.space.decode(tape[t][1]))
                    if key in seen:
                        continue
                    seen.add(key)
                    top.append(tape[t][1])
                    if len(top) == self.top_k:
                        break
                top = np.stack(top)
                raw_top = ev(top)
                g_top = self._sign * raw_top
                j = int(np.argmin(g_top))
                if g_top[j] < gbest:
                    gbest = float(g_top[j])
                    xbest = top[j].copy()
                self.log.append(GenRecord(
                    generation=2, nevals=ev.eval_count,
                    best=self._sign * gbest,
                    gen_best=float(raw_top.min() if self.mode == "min"
                                   else raw_top.max()),
                    gen_mean=float(raw_top.mean()),
                    elapsed_s=time.perf_counter() - t0))
                if verbose:
                    print(f"[nhho] re-evaluated top {len(top)}, "
                          f"best={self._sign * gbest:.6g}", flush=True)

        return self.space.decode(xbest), self._sign * gbest, self.log
