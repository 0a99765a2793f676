"""Random codebooks: single-layer, two-layer superposition and m-layer nested."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError, CapacityError
from ..probcore import DEFAULT_GUARD
from ..regions.coupling import AuxiliaryCoupling, CascadeCoupling
from ..rng import stream

CEIL_SLACK = 1e-9


def index_count(rate: float, n: int) -> int:
    """ceil(2^(n R)), with a relative slack so that 2^(n log2 3) counts as 3."""
    if rate < 0:
        raise ArgumentError(f"negative rate {rate}")
    v = 2.0 ** (n * rate)
    return max(1, math.ceil(v * (1.0 - CEIL_SLACK)))


def draw_symbols(uniforms: np.ndarray, rows: np.ndarray, parents: np.ndarray | None = None) -> np.ndarray:
    """Inverse-CDF draws: ``rows`` is a pmf (or a table of pmfs indexed by ``parents``)."""
    cdf = np.cumsum(np.asarray(rows, dtype=float), axis=-1)
    if parents is None:
        out = np.searchsorted(cdf, uniforms, side="right")
        return np.minimum(out, cdf.shape[-1] - 1)
    table = cdf[parents]
    out = np.sum(uniforms[..., None] >= table, axis=-1)
    return np.minimum(out, cdf.shape[-1] - 1)


def block_digits(k: int, n: int) -> np.ndarray:
    """All length-``n`` sequences over ``[k]`` in row-major order, shape (k^n, n)."""
    return np.stack(np.unravel_index(np.arange(k**n), (k,) * n), axis=1) if n > 0 else np.zeros((1, 0), int)


def check_guard(required: int, guard: int, what: str) -> None:
    if required > guard:
        raise CapacityError(f"{what} needs {required} entries, above the guard {guard}", required, guard)


@dataclass(frozen=True)
class SuperpositionCodebook:
    """V words indexed (m_b, k); U words indexed (m_a, m_b, k)."""

    n: int
    rates: tuple[float, float, float]
    sizes: tuple[int, int, int]  # (N_K, N_a, N_b)
    v_words: np.ndarray
    u_words: np.ndarray
    seed: int

    @property
    def n_k(self) -> int:
        return self.sizes[0]

    @property
    def n_a(self) -> int:
        return self.sizes[1]

    @property
    def n_b(self) -> int:
        return self.sizes[2]


def superposition_sizes(n: int, rates) -> tuple[int, int, int]:
    r0, r1, r2 = (float(r) for r in rates)
    if min(r0, r1, r2) < 0 or r1 < r2 - 1e-12:
        raise ArgumentError(f"need R1 >= R2 >= 0 and R0 >= 0, got {rates}")
    return index_count(r0, n), index_count(max(r1 - r2, 0.0), n), index_count(r2, n)


def draw_superposition(q_v, q_u_v, n: int, n_k: int, n_a: int, n_b: int, seed: int):
    """V words (N_b, N_K, n) i.i.d. Q_V and U words (N_a, N_b, N_K, n) through Q_U|V."""
    v = draw_symbols(stream(seed, "codebook", n, "layer2").random((n_b, n_k, n)), q_v)
    uni = stream(seed, "codebook", n, "layer1").random((n_a, n_b, n_k, n))
    u = draw_symbols(uni, q_u_v, np.broadcast_to(v, uni.shape))
    for arr in (u, v):
        arr.setflags(write=False)
    return u, v


def sample_codebook(coupling: AuxiliaryCoupling, n: int, rates, seed: int, guard: int = DEFAULT_GUARD) -> SuperpositionCodebook:
    """V words i.i.d. Q_V; each U word drawn through Q_U|V from its parent V word."""
    if n < 1:
        raise ArgumentError("block length must be at least 1")
    n_k, n_a, n_b = superposition_sizes(n, rates)
    check_guard(n_k * n_a * n_b * n, guard, "codebook")
    joint = coupling.joint
    u, v = draw_superposition(joint.marginal_array("V"), joint.conditional("U", "V"), n, n_k, n_a, n_b, seed)
    return SuperpositionCodebook(n, tuple(float(r) for r in rates), (n_k, n_a, n_b), v, u, int(seed))


@dataclass(frozen=True)
class NestedCodebook:
    """m-layer codebook; ``words[j]`` holds layer U_{j+1}, indexed (m'_{j+1}, ..., m'_{m-1}, k, t)."""

    n: int
    rates: tuple[float, ...]  # (R0, R1, ..., R_{m-1})
    sizes: tuple[int, ...]  # (N_K, N'_1, ..., N'_{m-1})
    words: tuple[np.ndarray, ...]
    seed: int


def nested_sizes(n: int, rates) -> tuple[int, ...]:
    r = [float(v) for v in rates]
    if min(r) < 0 or any(a < b - 1e-12 for a, b in zip(r[1:], r[2:])):
        raise ArgumentError(f"need R0 >= 0 and R1 >= R2 >= ... >= 0, got {rates}")
    k = len(r) - 1
    inner = [index_count(max(r[j] - (r[j + 1] if j < k else 0.0), 0.0), n) for j in range(1, k + 1)]
    return (index_count(r[0], n),) + tuple(inner)


def sample_nested_codebook(coupling: CascadeCoupling, n: int, rates, seed: int, guard: int = DEFAULT_GUARD) -> NestedCodebook:
    """Layer U_{m-1} i.i.d.; layer U_j drawn through Q_{U_j|U_{j+1}} from the layer above.

    For m = 3 the draws coincide with :func:`sample_codebook` (layer 2 is V, layer 1 is U).
    """
    k = coupling.m - 1
    if len(rates) != k + 1:
        raise ArgumentError(f"expected {k + 1} rates (R0, R1..R{k}), got {len(rates)}")
    sizes = nested_sizes(n, rates)
    n_k, msgs = sizes[0], sizes[1:]
    check_guard(n_k * math.prod(msgs) * n, guard, "codebook")
    joint = coupling.joint
    words: list[np.ndarray] = [None] * k  # type: ignore[list-item]
    top = f"U{k}"
    shape = (msgs[k - 1], n_k, n)
    words[k - 1] = draw_symbols(stream(seed, "codebook", n, f"layer{k}").random(shape), joint.marginal_array(top))
    for j in range(k - 2, -1, -1):
        cond = joint.conditional(f"U{j + 1}", f"U{j + 2}")
        shape = (msgs[j],) + words[j + 1].shape
        uni = stream(seed, "codebook", n, f"layer{j + 1}").random(shape)
        words[j] = draw_symbols(uni, cond, np.broadcast_to(words[j + 1], shape))
    for w in words:
        w.setflags(write=False)
    return NestedCodebook(n, tuple(float(r) for r in rates), sizes, tuple(words), int(seed))


def sample_single_layer(q_u: np.ndarray, n: int, count: int, seed: int, guard: int = DEFAULT_GUARD) -> np.ndarray:
    """``count`` words i.i.d. Q_U, drawn from the same stream as the inner superposition layer."""
    check_guard(count * n, guard, "codebook")
    return draw_symbols(stream(seed, "codebook", n, "layer1").random((count, n)), q_u)
