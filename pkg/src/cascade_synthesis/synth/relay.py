"""Relay cascade built from two point-to-point likelihood-encoder stages.

Stage 1 takes X^n as its source and the relay synthesizes U^n; stage 2 takes that
U^n as its source and the last node synthesizes Z^n.  Each stage has its own
message rate and common randomness.  A stage codes the sufficient statistic W
of its output for its source (output symbols with equal source posteriors are
merged), and the decoder draws the output from Q_{O|W} with local randomness.
"""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError, ConstraintError
from ..probcore import DEFAULT_GUARD
from ..regions.coupling import MARKOV_TOL, RelayCoupling
from ..rng import stream
from .cascade import _log, normalize_log_weights
from .codebook import block_digits, check_guard, draw_symbols, index_count
from .report import ExperimentReport
from .softcover import product_tensor

COMMON_MARGIN = 0.5
CLASS_DECIMALS = 12


def default_common_rate(rate: float, w_entropy: float, margin: float = COMMON_MARGIN) -> float:
    """Common randomness so that message plus common rate clears H(W) by ``margin``."""
    return max(0.0, w_entropy + margin - rate)


def sufficient_statistic(p_so: np.ndarray):
    """Merge output symbols with identical source posteriors.

    Returns (q_w, s_given_w [w, s], o_given_w [w, o]) for a joint ``p_so[s, o]``.
    """
    p_o = p_so.sum(axis=0)
    live = np.flatnonzero(p_o > 0)
    post = np.round(p_so[:, live] / p_o[live], CLASS_DECIMALS).T
    _, first, label = np.unique(post, axis=0, return_index=True, return_inverse=True)
    label = label.reshape(-1)
    q_w = np.bincount(label, weights=p_o[live])
    o_given_w = np.zeros((len(q_w), len(p_o)))
    o_given_w[label, live] = p_o[live] / q_w[label]
    s_given_w = p_so[:, live[first]].T / p_o[live[first]][:, None]
    return q_w, s_given_w, o_given_w


def _entropy(q: np.ndarray) -> float:
    q = q[q > 0]
    return float(-(q * np.log2(q)).sum())


def stage_kernel(p_so: np.ndarray, words: np.ndarray, guard: int, stat=None) -> np.ndarray:
    """Exact P(o^n | s^n) of one stage as a (|S|^n, |O|^n) matrix.

    ``words`` (N_K, N, n) are W symbols.  A source block with zero likelihood under
    every word of a key draws the message uniformly.
    """
    _, s_given_w, o_given_w = stat if stat is not None else sufficient_statistic(p_so)
    n_k, n_m, n = words.shape
    sd = block_digits(p_so.shape[0], n)
    check_guard(n_k * sd.shape[0] * n_m + n_k * n_m * p_so.shape[1] ** n, guard, "relay stage")
    lb = _log(s_given_w)
    logl = np.zeros((n_k, sd.shape[0], n_m))
    for t in range(n):
        logl += lb[words[:, None, :, t], sd[None, :, None, t]]
    post, _ = normalize_log_weights(logl, (2,))
    out = np.ones((n_k, n_m, 1))
    for t in range(n):
        out = (out[..., None] * o_given_w[words[:, :, t]][:, :, None, :]).reshape(n_k, n_m, -1)
    return np.einsum("ksm,kmo->so", post, out) / n_k


def _stages(coupling: RelayCoupling):
    p = coupling.joint
    p_xu = p.marginal_array(("X", "U"))
    p_uz = p.marginal_array(("U", "Z"))
    return sufficient_statistic(p_xu), sufficient_statistic(p_uz)


def relay_induced(coupling: RelayCoupling, n: int, rates, common, seed: int, guard: int = DEFAULT_GUARD) -> np.ndarray:
    """Exact P_{X^n Z^n} as a (|X|^n, |Z|^n) matrix for one codebook seed."""
    p = coupling.joint
    st1, st2 = _stages(coupling)
    n1, n2 = (index_count(r, n) for r in rates)
    k1, k2 = (index_count(c, n) for c in common)
    check_guard(max(k1 * n1, k2 * n2) * n, guard, "relay codebook")
    w1 = draw_symbols(stream(seed, "codebook", n, "stage1").random((k1, n1, n)), st1[0])
    w2 = draw_symbols(stream(seed, "codebook", n, "stage2").random((k2, n2, n)), st2[0])
    k_xu = stage_kernel(p.marginal_array(("X", "U")), w1, guard, st1)
    k_uz = stage_kernel(p.marginal_array(("U", "Z")), w2, guard, st2)
    qx = p.marginal_array("X")
    px = np.prod(qx[block_digits(len(qx), n)], axis=1)
    return px[:, None] * (k_xu @ k_uz)


def relay_scheme_experiment(
    q_xz,
    coupling_u: RelayCoupling,
    rates,
    n_list,
    trials: int,
    seed: int = 0,
    common_rates=None,
    guard: int = DEFAULT_GUARD,
) -> ExperimentReport:
    """Exact TV(P_{X^n Z^n}, Q_XZ^n) of the two-stage relay scheme per (n, seed)."""
    if trials < 1:
        raise ArgumentError("need at least one trial")
    r1, r2 = (float(r) for r in rates)
    if min(r1, r2) < 0:
        raise ArgumentError(f"negative rate in {rates}")
    dev = coupling_u.chain_deviation
    if dev > MARKOV_TOL:
        raise ConstraintError(f"X-U-Z violated by {dev:.3e}", "X-U-Z", dev)
    target = q_xz.reorder(("X", "Z")) if q_xz is not None else coupling_u.target
    if common_rates is None:
        st1, st2 = _stages(coupling_u)
        common_rates = (default_common_rate(r1, _entropy(st1[0])), default_common_rate(r2, _entropy(st2[0])))
    c1, c2 = (float(c) for c in common_rates)
    cfg = {
        "rates": [r1, r2],
        "common_rates": [c1, c2],
        "n_list": [int(n) for n in n_list],
        "trials": int(trials),
        "seed": int(seed),
    }
    rep = ExperimentReport("relay", cfg)
    q = target.pmf
    for n in cfg["n_list"]:
        qn = product_tensor(q.reshape(-1), n)  # pairs (x, z) flattened per time
        qn = qn.reshape((q.shape[0], q.shape[1]) * n)
        perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
        qn = qn.transpose(perm).reshape(q.shape[0] ** n, q.shape[1] ** n)
        for s in range(int(seed), int(seed) + int(trials)):
            pxz = relay_induced(coupling_u, n, (r1, r2), (c1, c2), s, guard)
            rep.add(s, n, tv=0.5 * float(np.abs(pxz - qn).sum()))
    return rep
