"""Exact soft-covering experiments for single-layer and superposition codebooks."""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError, DimensionError
from ..probcore import DEFAULT_GUARD, JointDistribution
from ..regions.coupling import AuxiliaryCoupling
from .codebook import check_guard, draw_superposition, index_count, sample_single_layer
from .report import ExperimentReport


def word_histogram(words: np.ndarray, k: int) -> np.ndarray:
    """Empirical law of the rows of ``words`` (N, n) as a (k,)*n tensor."""
    n = words.shape[-1]
    flat = np.ravel_multi_index(tuple(words.reshape(-1, n).T), (k,) * n) if n else np.zeros(len(words), int)
    hist = np.bincount(flat, minlength=k**n).astype(float)
    return (hist / hist.sum()).reshape((k,) * n)


def push_through(hist: np.ndarray, channel: np.ndarray) -> np.ndarray:
    """Apply a memoryless channel ``channel[u, x]`` along every axis of ``hist``."""
    out = hist
    for t in range(hist.ndim):
        out = np.moveaxis(np.tensordot(out, channel, axes=([t], [0])), -1, t)
    return out


def product_tensor(q: np.ndarray, n: int) -> np.ndarray:
    out = np.ones(())
    for _ in range(n):
        out = np.multiply.outer(out, q)
    return out


def mixture_tv(words: np.ndarray, channel: np.ndarray, qx: np.ndarray) -> float:
    """Exact TV between the uniform codeword mixture pushed through ``channel`` and Q_X^n."""
    n = words.shape[-1]
    px = push_through(word_histogram(words, channel.shape[0]), channel)
    return 0.5 * float(np.abs(px - product_tensor(qx, n)).sum())


def _trial_seeds(seed: int, trials: int) -> range:
    if trials < 1:
        raise ArgumentError("need at least one trial")
    return range(int(seed), int(seed) + int(trials))


def _state_guard(n: int, alphabets: int, words: int, guard: int) -> None:
    check_guard(max(alphabets**n, words * n), guard, f"soft-covering state at n={n}")


def softcover_experiment(
    q_ux: JointDistribution, rate: float, n_list, trials: int, seed: int = 0, guard: int = DEFAULT_GUARD
) -> ExperimentReport:
    """ceil(2^{nR}) words i.i.d. Q_U, pushed through Q_{X|U}; exact TV to Q_X^n per (n, seed)."""
    if set(q_ux.names) != {"U", "X"}:
        raise DimensionError(f"expected a joint over (U, X), got {q_ux.names}")
    q_u = q_ux.marginal_array("U")
    w = q_ux.conditional("X", "U")
    qx = q_ux.marginal_array("X")
    cfg = {"rate": float(rate), "n_list": [int(n) for n in n_list], "trials": int(trials), "seed": int(seed)}
    rep = ExperimentReport("softcover-single", cfg)
    for n in cfg["n_list"]:
        count = index_count(rate, n)
        _state_guard(n, max(len(q_u), len(qx)), count, guard)
        for s in _trial_seeds(seed, trials):
            words = sample_single_layer(q_u, n, count, s, guard)
            rep.add(s, n, tv=mixture_tv(words, w, qx), words=count)
    return rep


def _xuv(coupling) -> JointDistribution:
    joint = coupling.joint if isinstance(coupling, AuxiliaryCoupling) else coupling
    if not {"X", "U", "V"} <= set(joint.names):
        raise DimensionError(f"coupling must contain X, U and V, got {joint.names}")
    return joint.marginal(("X", "U", "V"))


def superposition_softcover_experiment(
    coupling, rates, n_list, trials: int, seed: int = 0, guard: int = DEFAULT_GUARD
) -> ExperimentReport:
    """Two-layer codebook: ceil(2^{nR_b}) V words, ceil(2^{nR_a}) U words on each.

    The mixture over all (m_a, m_b) is pushed through Q_{X|UV}.  Draws share the
    streams of the cascade codebook (with one key), so a degenerate V reproduces
    :func:`softcover_experiment` whenever the index counts multiply.
    """
    r_a, r_b = (float(r) for r in rates)
    if min(r_a, r_b) < 0:
        raise ArgumentError(f"negative rate in {rates}")
    joint = _xuv(coupling)
    cu, cv = joint.size_of("U"), joint.size_of("V")
    q_v = joint.marginal_array("V")
    q_u_v = joint.conditional("U", "V")
    w = joint.conditional("X", ("U", "V")).reshape(cu * cv, -1)
    qx = joint.marginal_array("X")
    cfg = {"rates": [r_a, r_b], "n_list": [int(n) for n in n_list], "trials": int(trials), "seed": int(seed)}
    rep = ExperimentReport("softcover-superposition", cfg)
    for n in cfg["n_list"]:
        n_a, n_b = index_count(r_a, n), index_count(r_b, n)
        _state_guard(n, max(cu * cv, len(qx)), n_a * n_b, guard)
        for s in _trial_seeds(seed, trials):
            u, v = draw_superposition(q_v, q_u_v, n, 1, n_a, n_b, s)
            pair = (u * cv + v[None]).reshape(-1, n)
            rep.add(s, n, tv=mixture_tv(pair, w, qx), words_a=n_a, words_b=n_b)
    return rep
