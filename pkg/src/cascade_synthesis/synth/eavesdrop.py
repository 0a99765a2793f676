"""Monte Carlo cascade samples and a G-test of message/sequence independence.

Sampling is for block lengths beyond exact enumeration.  Only the contingency
table between messages and sequences is estimated; plug-in TV on full blocks
would be hopelessly biased at feasible sample sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2_contingency

from ..errors import ArgumentError
from ..rng import stream
from .cascade import CascadeSystem, _log, normalize_log_weights
from .codebook import draw_symbols

MONTE_CARLO_NOTE = "Monte Carlo: only the message/sequence contingency table is estimated, never full-block TV"


@dataclass(frozen=True)
class CascadeSamples:
    """Per-sample blocks and messages; ``x``, ``y``, ``z`` have shape (S, n)."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    m_a: np.ndarray
    m_b: np.ndarray
    k: np.ndarray

    @property
    def size(self) -> int:
        return len(self.k)

    def sequences(self) -> np.ndarray:
        return np.concatenate([self.x, self.y, self.z], axis=1)

    def messages(self) -> np.ndarray:
        return np.stack([self.m_a, self.m_b], axis=1)


def sample_cascade(system: CascadeSystem, samples: int, seed: int, batch: int = 4096) -> CascadeSamples:
    """Run the operational scheme ``samples`` times on fresh i.i.d. source blocks."""
    if samples < 1:
        raise ArgumentError("need at least one sample")
    cb = system.codebook
    n, (n_k, n_a, n_b) = cb.n, cb.sizes
    qx, wx, wy, wz = system.channels()
    u, v = system.words()  # (K, Na, Nb, n), (K, Nb, n)
    g = stream(seed, "eavesdrop", n)
    lwx = _log(wx)
    out = {key: [] for key in ("x", "y", "z", "m_a", "m_b", "k")}
    for start in range(0, samples, batch):
        s = min(batch, samples - start)
        k = g.integers(0, n_k, size=s)
        x = draw_symbols(g.random((s, n)), qx)
        logl = np.zeros((s, n_a, n_b))
        for t in range(n):
            logl += lwx[u[k, :, :, t], v[k, None, :, t], x[:, t, None, None]]
        post, _ = normalize_log_weights(logl, (1, 2))
        pick = draw_symbols(g.random(s), post.reshape(s, -1), np.arange(s))
        m_a, m_b = np.divmod(pick, n_b)
        uu, vv = u[k, m_a, m_b], v[k, m_b]
        y = draw_symbols(g.random((s, n)), wy, (uu, vv))
        z = draw_symbols(g.random((s, n)), wz, vv)
        for key, val in zip(out, (x, y, z, m_a, m_b, k)):
            out[key].append(val)
    return CascadeSamples(**{key: np.concatenate(val) for key, val in out.items()})


@dataclass(frozen=True)
class IndependenceTest:
    statistic: float
    dof: int
    p_value: float
    reject: bool
    inconclusive: bool
    samples: int
    significance: float
    reason: str = ""

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _codes(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim == 1:
        a = a[:, None]
    return np.unique(a.reshape(len(a), -1), axis=0, return_inverse=True)[1].reshape(-1)


def eavesdropper_independence_test(sequences, messages=None, significance: float = 0.05) -> IndependenceTest:
    """G-test of independence between message tuples and sequence tuples.

    ``sequences`` may be a :class:`CascadeSamples`; otherwise both arguments are
    arrays with one row per sample.  Empty categories are dropped; a table with a
    single row or column is flagged inconclusive.
    """
    if isinstance(sequences, CascadeSamples):
        sequences, messages = sequences.sequences(), sequences.messages()
    if messages is None:
        raise ArgumentError("messages are required")
    if not 0 < significance < 1:
        raise ArgumentError(f"significance must lie in (0, 1), got {significance}")
    s_codes, m_codes = _codes(sequences), _codes(messages)
    if len(s_codes) != len(m_codes):
        raise ArgumentError("sequences and messages must have the same number of samples")
    count = len(s_codes)
    if count < 2:
        raise ArgumentError("need at least two samples")
    table = np.zeros((m_codes.max() + 1, s_codes.max() + 1))
    np.add.at(table, (m_codes, s_codes), 1.0)
    if min(table.shape) < 2:
        return IndependenceTest(0.0, 0, 1.0, False, True, count, significance, "degenerate contingency table")
    stat, p, dof, _ = chi2_contingency(table, correction=False, lambda_="log-likelihood")
    return IndependenceTest(float(stat), int(dof), float(p), bool(p < significance), False, count, significance)
