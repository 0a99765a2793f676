"""Exact induced distributions of the likelihood-encoder cascade at small n.

The operational joint of the three-node scheme is

    P(k, x^n, m_a, m_b, y^n, z^n) = (1/N_K) Q_X^n(x^n) Post(m_a, m_b | x^n, k)
                                    Q_{Y|UV}^n(y^n | u^n(m_a,m_b,k), v^n(m_b,k))
                                    Q_{Z|V}^n(z^n | v^n(m_b,k)),

with the posterior proportional to the codeword likelihood of x^n.  All
arrays here index length-n blocks row-major over time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError, ConstraintError, DegeneratePosteriorError, DimensionError
from ..probcore import (
    DEFAULT_GUARD,
    FiniteDistribution,
    JointDistribution,
    conditional_mutual_information,
)
from ..regions.coupling import AuxiliaryCoupling, CascadeCoupling, check_membership_D
from .codebook import NestedCodebook, SuperpositionCodebook, block_digits, check_guard

MARKOV_TOL = 1e-6


def _log(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(p)


def normalize_log_weights(logw: np.ndarray, axes: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Normalize exp(logw) over ``axes`` with max subtraction.

    Returns the normalized weights and a mask of slices whose total weight is zero;
    those slices are filled uniformly.
    """
    top = np.max(logw, axis=axes, keepdims=True)
    dead = ~np.isfinite(top)
    w = np.exp(logw - np.where(dead, 0.0, top))
    w = np.where(dead, 1.0, w)
    w = w / w.sum(axis=axes, keepdims=True)
    return w, np.squeeze(dead, axis=axes)


def channel_block(table: np.ndarray, inputs: np.ndarray, k_out: int) -> np.ndarray:
    """Product-channel law of every output block for each input word.

    ``table[..., y]`` is indexed by the leading input symbols; ``inputs`` has shape
    (..., n, n_in) or (..., n) for a single input variable.  Returns (..., k_out^n).
    """
    if table.ndim == 2:
        inputs = inputs[..., None]
    n = inputs.shape[-2]
    digits = block_digits(k_out, n)  # (B, n)
    out = np.ones(inputs.shape[:-2] + (digits.shape[0],))
    for t in range(n):
        idx = tuple(inputs[..., t, j][..., None] for j in range(inputs.shape[-1]))
        out = out * table[idx + (digits[:, t],)]
    return out


@dataclass(frozen=True)
class CascadeSystem:
    """A coupling in D together with a codebook drawn from it."""

    coupling: AuxiliaryCoupling
    codebook: SuperpositionCodebook

    def __post_init__(self) -> None:
        rep = check_membership_D(self.coupling, MARKOV_TOL)
        if rep.chain1_dev > MARKOV_TOL or rep.chain2_dev > MARKOV_TOL:
            raise ConstraintError(
                f"coupling violates D (chain deviations {rep.chain1_dev:.2e}, {rep.chain2_dev:.2e})",
                "X-(U,V)-Y" if rep.chain1_dev > MARKOV_TOL else "(X,Y,U)-V-Z",
                max(rep.chain1_dev, rep.chain2_dev),
            )
        cu, cv = self.coupling.cards
        if self.codebook.u_words.max(initial=0) >= cu or self.codebook.v_words.max(initial=0) >= cv:
            raise DimensionError("codebook symbols exceed the coupling alphabets")

    @property
    def target(self) -> JointDistribution:
        return self.coupling.target

    @property
    def n(self) -> int:
        return self.codebook.n

    @property
    def alphabets(self) -> tuple[int, int, int]:
        return self.target.sizes  # type: ignore[return-value]

    def channels(self):
        j = self.coupling.joint
        return (
            j.marginal_array("X"),
            j.conditional("X", ("U", "V")),  # [u, v, x]
            j.conditional("Y", ("U", "V")),  # [u, v, y]
            j.conditional("Z", "V"),  # [v, z]
        )

    def words(self):
        """U and V words rearranged to (k, m_a, m_b, t) and (k, m_b, t)."""
        cb = self.codebook
        return np.moveaxis(cb.u_words, 2, 0), np.moveaxis(cb.v_words, 1, 0)


def likelihood_encoder_posterior(x_block, k: int, system: CascadeSystem) -> FiniteDistribution:
    """Posterior over message pairs, flattened as ``m_a * N_b + m_b``."""
    x = np.asarray(x_block, dtype=int)
    cb = system.codebook
    if x.shape != (cb.n,):
        raise ArgumentError(f"x block must have length {cb.n}")
    if not 0 <= k < cb.n_k:
        raise ArgumentError(f"k={k} outside [0, {cb.n_k})")
    _, wx, _, _ = system.channels()
    u = cb.u_words[:, :, k, :]
    v = cb.v_words[None, :, k, :]
    logw = _log(wx[u, v, x]).sum(axis=-1)  # (N_a, N_b)
    if not np.isfinite(logw.max()):
        raise DegeneratePosteriorError(f"x block {x.tolist()} has zero likelihood under every codeword pair (k={k})")
    w, _ = normalize_log_weights(logw, (0, 1))
    return FiniteDistribution(w.reshape(-1))


@dataclass(frozen=True)
class InducedDistribution:
    """Exact operational joint over (K, X^n, Y^n, Z^n, M_a, M_b).

    M1 = (M_a, M_b) and M2 = M_b, so the message pair is carried by (M_a, M_b).
    ``degenerate`` counts (k, x^n) pairs whose likelihood vanished for every codeword
    pair; the encoder then picks messages uniformly.
    """

    joint: JointDistribution
    n: int
    degenerate: int = 0

    @property
    def names(self) -> tuple[str, ...]:
        return self.joint.names

    def without_k(self) -> JointDistribution:
        return self.joint.marginal(tuple(n for n in self.joint.names if n != "K"))

    def message_names(self) -> tuple[str, ...]:
        return tuple(n for n in self.joint.names if n.startswith("M"))

    def sequence_names(self) -> tuple[str, ...]:
        return tuple(n for n in self.joint.names if n not in ("K",) and not n.startswith("M"))


def induced_distribution_exact(system: CascadeSystem, size_guard: int = DEFAULT_GUARD) -> InducedDistribution:
    cb = system.codebook
    n = cb.n
    nx, ny, nz = system.alphabets
    n_k, n_a, n_b = cb.sizes
    bx, by, bz = nx**n, ny**n, nz**n
    check_guard(n_k * bx * by * bz * n_a * n_b, size_guard, "induced distribution")
    qx, wx, wy, wz = system.channels()
    u, v = system.words()  # (K, Na, Nb, n), (K, Nb, n)
    xd = block_digits(nx, n)

    logl = np.zeros((n_k, bx, n_a, n_b))
    lwx = _log(wx)
    for t in range(n):
        logl += lwx[u[:, None, :, :, t], v[:, None, None, :, t], xd[None, :, None, None, t]]
    post, dead = normalize_log_weights(logl, (2, 3))

    px = np.prod(qx[xd], axis=1)  # (X^n,)
    py = channel_block(wy, np.stack([u, np.broadcast_to(v[:, None], u.shape)], axis=-1), ny)  # (K, Na, Nb, Y^n)
    pz = channel_block(wz, v, nz)  # (K, Nb, Z^n)
    arr = np.einsum("x,kxab,kaby,kbz->kxyzab", px / n_k, post, py, pz)
    names = ("K", f"X^{n}", f"Y^{n}", f"Z^{n}", "Ma", "Mb")
    return InducedDistribution(JointDistribution(names, arr, atol=1e-9), n, int(dead.sum()))


def iid_target_block(target: JointDistribution, n: int) -> np.ndarray:
    """Q^n over (X^n, Y^n, ...) blocks for a target over the listed variables."""
    q = target.pmf
    digits = [block_digits(s, n) for s in q.shape]
    out = np.ones(tuple(d.shape[0] for d in digits))
    d = len(digits)
    for t in range(n):
        idx = tuple(digits[i][:, t].reshape((-1,) + (1,) * (d - 1 - i)) for i in range(d))
        out = out * q[idx]
    return out


def _aligned_target(induced: InducedDistribution, target: JointDistribution) -> JointDistribution:
    base = tuple(name.split("^")[0] for name in induced.sequence_names())
    if set(base) != set(target.names):
        raise DimensionError(f"target variables {target.names} do not match the sequences {base}")
    return target.reorder(base)


def secrecy_tv(induced: InducedDistribution, target: JointDistribution) -> float:
    """TV between P(sequences, messages) and P(messages) x Q^n(sequences)."""
    p = induced.without_k()
    seq, msg = induced.sequence_names(), induced.message_names()
    qn = iid_target_block(_aligned_target(induced, target), induced.n)
    arr = p.reorder(seq + msg).pmf
    if arr.shape[: len(seq)] != qn.shape:
        raise DimensionError(f"sequence alphabets {arr.shape[:len(seq)]} do not match the target {qn.shape}")
    pm = arr.sum(axis=tuple(range(len(seq))))
    prod = qn.reshape(qn.shape + (1,) * pm.ndim) * pm
    return 0.5 * float(np.abs(arr - prod).sum())


def synthesis_tv(induced: InducedDistribution, target: JointDistribution) -> float:
    """TV between the sequence marginal and Q^n; never exceeds :func:`secrecy_tv`."""
    p = induced.without_k()
    qn = iid_target_block(_aligned_target(induced, target), induced.n)
    arr = p.marginal_array(induced.sequence_names())
    if arr.shape != qn.shape:
        raise DimensionError(f"sequence alphabets {arr.shape} do not match the target {qn.shape}")
    return 0.5 * float(np.abs(arr - qn).sum())


def x_marginal_deviation(induced: InducedDistribution, qx: np.ndarray) -> float:
    """Max absolute deviation of the X^n marginal from Q_X^n."""
    name = induced.sequence_names()[0]
    xd = block_digits(len(qx), induced.n)
    return float(np.abs(induced.joint.marginal_array(name) - np.prod(np.asarray(qx)[xd], axis=1)).max())


def markov_checks(induced: InducedDistribution) -> dict[str, float]:
    """The two physical chains of the idealized distribution, as conditional MIs."""
    p = induced.joint
    n = induced.n
    x, y, z = f"X^{n}", f"Y^{n}", f"Z^{n}"
    return {
        "I(X;M2,Y|M1,K)": conditional_mutual_information(p, x, ("Ma", "Mb", "K"), y),
        "I(X,Y,M1;Z|M2,K)": conditional_mutual_information(p, (x, y, "Ma"), ("Mb", "K"), z),
    }


# -- m-node cascade -----------------------------------------------------------


@dataclass(frozen=True)
class NestedCascadeSystem:
    coupling: CascadeCoupling
    codebook: NestedCodebook

    def __post_init__(self) -> None:
        devs = self.coupling.constraint_deviations()
        bad = {k: v for k, v in devs.items() if v > MARKOV_TOL}
        if bad:
            name, dev = max(bad.items(), key=lambda kv: kv[1])
            raise ConstraintError(f"coupling violates {name} by {dev:.2e}", name, dev)

    @property
    def m(self) -> int:
        return self.coupling.m


def general_cascade_exact(system: NestedCascadeSystem, size_guard: int = DEFAULT_GUARD) -> InducedDistribution:
    """Exact joint over (K, X^n, Y_1^n .. Y_{m-1}^n, M'_1 .. M'_{m-1}).

    Node 1 draws the full index tuple (M'_1, ..., M'_{m-1}) from the likelihood
    posterior under Q_{X|U_1}; node i+1 sees M_i = (M'_i, ..., M'_{m-1}), recovers
    the layer-i word and emits Y_i through Q_{Y_i|U_i}.
    """
    cb, cp = system.codebook, system.coupling
    n, k_layers = cb.n, cp.m - 1
    joint = cp.joint
    n_k, msgs = cb.sizes[0], cb.sizes[1:]
    nx = joint.size_of("X")
    ys = [joint.size_of(f"Y{i}") for i in range(1, k_layers + 1)]
    total = n_k * nx**n * math.prod(s**n for s in ys) * math.prod(msgs)
    check_guard(total, size_guard, "induced distribution")

    # words[j]: (m'_{j+1}, ..., m'_{k}, K, t) -> move K first and broadcast to the full index grid
    grid = (n_k,) + tuple(msgs)
    full = []
    for j, w in enumerate(cb.words):
        w = np.moveaxis(w, -2, 0)  # (K, m'_{j+1}.., m'_k, t)
        shape = (n_k,) + (1,) * j + tuple(msgs[j:]) + (n,)
        full.append(np.broadcast_to(w.reshape(shape), grid + (n,)))

    qx = joint.marginal_array("X")
    wx = joint.conditional("X", "U1")  # [u1, x]
    xd = block_digits(nx, n)
    lwx = _log(wx)
    logl = np.zeros((n_k, xd.shape[0]) + tuple(msgs))
    u1 = full[0]
    for t in range(n):
        xs = xd[:, t].reshape((1, -1) + (1,) * k_layers)
        logl += lwx[u1[:, None, ..., t], xs]
    post, dead = normalize_log_weights(logl, tuple(range(2, 2 + k_layers)))
    arr = (np.prod(qx[xd], axis=1) / n_k).reshape((1, -1) + (1,) * k_layers) * post  # (K, X, m'...)

    names = ["K", f"X^{n}"]
    for i in range(1, k_layers + 1):
        wy = joint.conditional(f"Y{i}", f"U{i}")
        py = channel_block(wy, full[i - 1], ys[i - 1])  # (K, m'..., Y_i^n)
        # insert the Y_i axis right after the existing sequence axes
        py = np.moveaxis(py, -1, 1)
        arr = np.expand_dims(arr, axis=1 + i) * np.expand_dims(py, axis=tuple(range(1, 1 + i)))
        names.append(f"Y{i}^{n}")
    names += [f"M{j}'" for j in range(1, k_layers + 1)]
    return InducedDistribution(JointDistribution(tuple(names), arr, atol=1e-9), n, int(dead.sum()))
