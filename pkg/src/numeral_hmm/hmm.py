"""Discrete hidden Markov models: evaluation, decoding, Baum-Welch, classification.

A model is ``(init, trans, emit)`` with ``init[i] = P(q_1 = i)``,
``trans[i, j] = P(q_{t+1} = j | q_t = i)`` and ``emit[j, k] = P(o_t = k | q_t = j)``.
Likelihoods are natural logs computed with per-step scaling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import EmptySequence, InvalidModel, MissingClass, NoTrainingData, SymbolOutOfRange

N_CLASSES = 10
STOCHASTIC_TOL = 1e-9


@dataclass(frozen=True)
class Topology:
    """``ergodic`` or ``left_to_right`` where ``skip`` is the largest forward jump."""

    kind: str = "ergodic"
    skip: int = 0

    def __post_init__(self):
        if self.kind not in ("ergodic", "left_to_right"):
            raise ValueError(f"unknown topology {self.kind!r}")
        if self.kind == "left_to_right" and self.skip < 1:
            raise ValueError("left_to_right topology needs skip >= 1")

    @classmethod
    def left_to_right(cls, skip: int = 1) -> "Topology":
        return cls("left_to_right", skip)

    @classmethod
    def parse(cls, text: str) -> "Topology":
        parts = text.split()
        if parts == ["ergodic"]:
            return cls()
        if len(parts) == 2 and parts[0] == "left_to_right":
            return cls.left_to_right(int(parts[1]))
        raise ValueError(f"bad topology {text!r}")

    def __str__(self) -> str:
        return "ergodic" if self.kind == "ergodic" else f"left_to_right {self.skip}"

    def mask(self, n_states: int) -> np.ndarray:
        """Boolean matrix of transitions the topology allows."""
        if self.kind == "ergodic":
            return np.ones((n_states, n_states), dtype=bool)
        i, j = np.indices((n_states, n_states))
        return (j >= i) & (j <= i + self.skip)


ERGODIC = Topology()


@dataclass(frozen=True, eq=False)
class DiscreteHmm:
    init: np.ndarray
    trans: np.ndarray
    emit: np.ndarray
    topology: Topology = ERGODIC

    def __post_init__(self):
        for name in ("init", "trans", "emit"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        self.validate()

    @property
    def n_states(self) -> int:
        return self.init.shape[0]

    @property
    def n_symbols(self) -> int:
        return self.emit.shape[1]

    def validate(self, tol: float = STOCHASTIC_TOL) -> None:
        n = self.init.shape[0] if self.init.ndim == 1 else -1
        if n < 1 or self.trans.shape != (n, n) or self.emit.ndim != 2 or self.emit.shape[0] != n:
            raise InvalidModel(
                f"inconsistent shapes init{self.init.shape} trans{self.trans.shape} emit{self.emit.shape}"
            )
        if self.emit.shape[1] < 1:
            raise InvalidModel("alphabet is empty")
        for name, arr in (("init", self.init[None, :]), ("trans", self.trans), ("emit", self.emit)):
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise InvalidModel(f"{name} has negative or non-finite entries")
            worst = np.max(np.abs(arr.sum(axis=1) - 1.0))
            if worst > tol:
                raise InvalidModel(f"{name} rows do not sum to 1 (off by {worst:.3g})")
        if self.topology.kind == "left_to_right":
            if np.any(self.trans[~self.topology.mask(n)] != 0):
                raise InvalidModel("transition outside the left-to-right band")
            if self.init[0] != 1.0 or np.any(self.init[1:] != 0):
                raise InvalidModel("left-to-right model must start in state 0")


@dataclass(frozen=True)
class TrainConfig:
    n_states: int = 10
    topology: Topology = field(default_factory=lambda: Topology.left_to_right(1))
    max_iters: int = 100
    tol: float = 1e-4
    emission_floor: float = 1e-6
    seed: int = 0
    n_symbols: int = 10

    def __post_init__(self):
        if self.n_states < 1:
            raise ValueError("n_states must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if not 0 < self.emission_floor < 1.0 / self.n_symbols:
            raise ValueError("emission_floor must lie in (0, 1/n_symbols)")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


# --------------------------------------------------------------------------
# evaluation and decoding


def _as_obs(model: DiscreteHmm, obs: Sequence[int]) -> np.ndarray:
    arr = np.asarray(obs, dtype=np.int64).reshape(-1)
    if arr.size == 0:
        raise EmptySequence("observation sequence is empty")
    if arr.min() < 0 or arr.max() >= model.n_symbols:
        raise SymbolOutOfRange(f"symbols must lie in [0, {model.n_symbols})")
    return arr


def log_likelihood(model: DiscreteHmm, obs: Sequence[int]) -> float:
    """``ln P(obs | model)`` by the scaled forward recursion."""
    o = _as_obs(model, obs)
    alpha = model.init * model.emit[:, o[0]]
    total = 0.0
    for t in range(len(o)):
        if t:
            alpha = (alpha @ model.trans) * model.emit[:, o[t]]
        c = alpha.sum()
        if c <= 0:
            return -math.inf
        total += math.log(c)
        alpha = alpha / c
    return total


# Log scores this close (relative) count as tied, so paths whose
# probabilities are equal in exact arithmetic break ties by index rather
# than by rounding noise.
TIE_TOL = 1e-12


def _lowest_max(x: np.ndarray, axis: int = 0) -> np.ndarray:
    top = np.max(x, axis=axis, keepdims=True)
    slack = TIE_TOL * np.maximum(1.0, np.abs(np.where(np.isfinite(top), top, 0.0)))
    return np.argmax(x >= top - slack, axis=axis)


def viterbi(model: DiscreteHmm, obs: Sequence[int]) -> tuple[list[int], float]:
    """Most probable state path and its joint log probability.

    Ties go to the lower state index, both for the final state and at each
    backtracking step.
    """
    o = _as_obs(model, obs)
    with np.errstate(divide="ignore"):
        log_a = np.log(model.trans)
        log_b = np.log(model.emit)
        delta = np.log(model.init) + log_b[:, o[0]]
    back = np.zeros((len(o), model.n_states), dtype=np.int64)
    for t in range(1, len(o)):
        cand = delta[:, None] + log_a
        back[t] = _lowest_max(cand, axis=0)
        delta = cand[back[t], np.arange(model.n_states)] + log_b[:, o[t]]
    state = int(_lowest_max(delta))
    best = float(delta[state])
    path = [state]
    for t in range(len(o) - 1, 0, -1):
        state = int(back[t, state])
        path.append(state)
    path.reverse()
    return path, best


def _pad(model: DiscreteHmm, sequences: Sequence[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
    arrays = [_as_obs(model, s) for s in sequences]
    lengths = np.array([len(a) for a in arrays], dtype=np.int64)
    padded = np.zeros((len(arrays), int(lengths.max())), dtype=np.int64)
    for i, a in enumerate(arrays):
        padded[i, : len(a)] = a
    return padded, lengths


def _forward_batch(model: DiscreteHmm, padded: np.ndarray, lengths: np.ndarray):
    """Scaled forward pass over a batch of padded sequences.

    Returns scaled alphas ``(S, T, N)``, scale factors ``(S, T)`` (1 past the end
    of each sequence) and the per-step emission probabilities ``(S, T, N)``.
    """
    n_seq, t_max = padded.shape
    em = model.emit.T[padded]
    alpha = np.empty((n_seq, t_max, model.n_states))
    scale = np.ones((n_seq, t_max))
    a = model.init[None, :] * em[:, 0]
    for t in range(t_max):
        if t:
            live = t < lengths
            a = (alpha[:, t - 1] @ model.trans) * em[:, t]
            a[~live] = alpha[~live, t - 1]
            c = np.where(live, a.sum(axis=1), 1.0)
        else:
            c = a.sum(axis=1)
        if np.any(c <= 0):
            raise InvalidModel("a sequence has zero probability under the model")
        a = a / c[:, None]
        alpha[:, t] = a
        scale[:, t] = c
    return alpha, scale, em


def score_batch(model: DiscreteHmm, sequences: Sequence[Sequence[int]]) -> np.ndarray:
    """Log-likelihood of each sequence; same values as :func:`log_likelihood`."""
    if len(sequences) == 0:
        return np.zeros(0)
    padded, lengths = _pad(model, sequences)
    n_seq, t_max = padded.shape
    em = model.emit.T[padded]
    a = model.init[None, :] * em[:, 0]
    total = np.zeros(n_seq)
    dead = np.zeros(n_seq, dtype=bool)
    for t in range(t_max):
        live = t < lengths
        if t:
            a = np.where(live[:, None], (a @ model.trans) * em[:, t], a)
        c = np.where(live, a.sum(axis=1), 1.0)
        dead |= c <= 0
        c = np.where(c > 0, c, 1.0)
        total += np.log(c)
        a = a / c[:, None]
    total[dead] = -np.inf
    return total


# --------------------------------------------------------------------------
# training


def _floored_rows(counts: np.ndarray, floor: float, previous: np.ndarray) -> np.ndarray:
    """Row-wise maximizer of ``sum_k n_k log b_k`` subject to ``b_k >= floor``.

    Entries whose proportional share would fall under the floor are pinned
    to it and the rest of the mass is shared in proportion to the counts.
    Rows with no counts keep their previous values.
    """
    out = previous.copy()
    for i, row in enumerate(counts):
        if row.sum() <= 0:
            continue
        pinned = np.zeros(row.shape, dtype=bool)
        while True:
            free_mass = 1.0 - floor * pinned.sum()
            vals = row * (free_mass / row[~pinned].sum())
            newly = ~pinned & (vals < floor)
            if not newly.any():
                break
            pinned |= newly
        out[i] = np.where(pinned, floor, vals)
    return out


def _expectations(model: DiscreteHmm, padded: np.ndarray, lengths: np.ndarray):
    alpha, scale, em = _forward_batch(model, padded, lengths)
    n_seq, t_max = padded.shape
    beta = np.ones_like(alpha)
    for t in range(t_max - 2, -1, -1):
        live = (t + 1) < lengths
        b = ((em[:, t + 1] * beta[:, t + 1]) @ model.trans.T) / scale[:, t + 1][:, None]
        beta[:, t] = np.where(live[:, None], b, 1.0)
    valid = np.arange(t_max)[None, :] < lengths[:, None]
    gamma = alpha * beta * valid[:, :, None]
    init_counts = gamma[:, 0].sum(axis=0)
    if t_max > 1:
        step = valid[:, 1:, None]
        weighted = em[:, 1:] * beta[:, 1:] / scale[:, 1:, None] * step
        trans_counts = np.einsum("sti,stj->ij", alpha[:, :-1], weighted) * model.trans
    else:
        trans_counts = np.zeros_like(model.trans)
    onehot = np.eye(model.n_symbols)[padded]
    emit_counts = np.einsum("stn,stk->nk", gamma, onehot)
    ll = float(np.log(scale).sum())
    return ll, init_counts, trans_counts, emit_counts


def _reestimate(model: DiscreteHmm, stats, n_seq: int, floor: float) -> DiscreteHmm:
    _, init_counts, trans_counts, emit_counts = stats
    init = init_counts / n_seq
    init = init / init.sum()
    if model.topology.kind == "left_to_right":
        init = model.init.copy()
    row = trans_counts.sum(axis=1, keepdims=True)
    trans = np.where(row > 0, trans_counts / np.where(row > 0, row, 1.0), model.trans)
    emit = _floored_rows(emit_counts, floor, model.emit)
    return DiscreteHmm(init, trans, emit, model.topology)


def baum_welch(
    initial: DiscreteHmm,
    sequences: Sequence[Sequence[int]],
    cfg: TrainConfig,
    on_iteration: Optional[Callable[[DiscreteHmm, float], None]] = None,
) -> tuple[DiscreteHmm, list[float]]:
    """Multi-sequence EM re-estimation.

    Returns the trained model and the total log-likelihood before training
    followed by the value after each iteration. Training stops after
    ``cfg.max_iters`` iterations or once the per-symbol gain drops below
    ``cfg.tol``. Emission rows are re-estimated under the lower bound
    ``cfg.emission_floor``, which keeps the likelihood sequence monotone.
    ``on_iteration`` sees each re-estimated model with its log-likelihood.
    """
    if len(sequences) == 0:
        raise NoTrainingData("no training sequences")
    padded, lengths = _pad(initial, sequences)
    n_symbols_total = int(lengths.sum())
    model = initial
    stats = _expectations(model, padded, lengths)
    history = [stats[0]]
    for _ in range(cfg.max_iters):
        model = _reestimate(model, stats, len(sequences), cfg.emission_floor)
        stats = _expectations(model, padded, lengths)
        history.append(stats[0])
        if on_iteration is not None:
            on_iteration(model, stats[0])
        if (history[-1] - history[-2]) / n_symbols_total < cfg.tol:
            break
    return model, history


def init_model(cfg: TrainConfig, class_seed_offset: int = 0) -> DiscreteHmm:
    """Near-uniform starting model drawn from the ``(seed, offset)`` stream."""
    rng = np.random.default_rng([cfg.seed, class_seed_offset])
    n, m = cfg.n_states, cfg.n_symbols
    mask = cfg.topology.mask(n)
    trans = mask * rng.uniform(0.8, 1.2, size=(n, n))
    trans /= trans.sum(axis=1, keepdims=True)
    emit = rng.uniform(0.8, 1.2, size=(n, m))
    emit /= emit.sum(axis=1, keepdims=True)
    if cfg.topology.kind == "left_to_right":
        init = np.zeros(n)
        init[0] = 1.0
    else:
        init = rng.uniform(0.8, 1.2, size=n)
        init /= init.sum()
    return DiscreteHmm(init, trans, emit, cfg.topology)


# --------------------------------------------------------------------------
# model bank and classification


@dataclass(frozen=True, eq=False)
class ModelBank:
    models: tuple[DiscreteHmm, ...]

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(self.models))
        if len(self.models) != N_CLASSES:
            raise InvalidModel(f"a bank needs {N_CLASSES} models, got {len(self.models)}")
        if len({m.n_symbols for m in self.models}) != 1:
            raise InvalidModel("models in a bank must share one alphabet")
        for m in self.models:
            m.validate()

    @property
    def n_symbols(self) -> int:
        return self.models[0].n_symbols


@dataclass(frozen=True)
class Prediction:
    label: Optional[int]
    scores: Optional[tuple[float, ...]]

    @property
    def rejected(self) -> bool:
        return self.label is None


REJECT = Prediction(None, None)


def _train_one(args):
    digit, sequences, cfg = args
    model, _ = baum_welch(init_model(cfg, digit), sequences, cfg)
    return model


def train_bank(
    dataset: Mapping[int, Sequence[Sequence[int]]], cfg: TrainConfig, workers: int = 1
) -> ModelBank:
    """Train one model per digit from ``{digit: [sequence, ...]}``."""
    for digit in range(N_CLASSES):
        if not dataset.get(digit):
            raise MissingClass(digit)
    jobs = [(d, list(dataset[d]), cfg) for d in range(N_CLASSES)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            models = list(pool.map(_train_one, jobs))
    else:
        models = [_train_one(j) for j in jobs]
    return ModelBank(tuple(models))


def classify(bank: ModelBank, obs: Sequence[int]) -> Prediction:
    """Label with the highest log-likelihood; an empty sequence is rejected."""
    if len(obs) == 0:
        return REJECT
    scores = np.array([log_likelihood(m, obs) for m in bank.models])
    return Prediction(int(np.argmax(scores)), tuple(float(s) for s in scores))


def classify_batch(bank: ModelBank, sequences: Sequence[Sequence[int]]) -> list[Prediction]:
    """Vectorized :func:`classify` over many sequences."""
    keep = [i for i, s in enumerate(sequences) if len(s) > 0]
    out = [REJECT] * len(sequences)
    if not keep:
        return out
    batch = [sequences[i] for i in keep]
    scores = np.stack([score_batch(m, batch) for m in bank.models], axis=1)
    for row, i in zip(scores, keep):
        out[i] = Prediction(int(np.argmax(row)), tuple(float(s) for s in row))
    return out
