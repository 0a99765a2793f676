"""Numerical minimization over the coupling sets.

Every objective handled here is affine in entropies of the auxiliary
"atoms", so the minimum over couplings is a concave-envelope problem:

    min  const - sum_j lambda_j g(atom_j)   s.t.  sum_j lambda_j P_j = Q,

where atom ``j`` is a product distribution (or, when I(X;V) is weighted, a
V-block made of product distributions sharing one Z factor) and ``P_j`` its
distribution over the target cells.  The global stage solves this by column
generation: an LP over the current atoms gives dual prices, and a new atom is
priced by coordinate ascent with closed-form steps.  The local stage polishes
the result and runs random restarts with SLSQP on a product-of-conditionals
parametrization, which keeps every Markov chain exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from ..errors import ArgumentError, SearchFailure
from ..probcore import JointDistribution
from ..rng import stream
from .coupling import XYZ, AuxiliaryCoupling, RatePoint, cardinality_bounds, rate_triple
from .factor_model import Factor, FactorModel

FEASIBILITY_TOL = 1e-6
GAP_TOL = 1e-8  # column generation stops once no atom improves the LP by more


@dataclass(frozen=True)
class OptimizerConfig:
    """Search settings.

    Pricing uses ``4 * restarts`` starting points per round, jittered from the
    simplex lattice with denominator ``grid_resolution``, each refined for at most
    ``pricing_sweeps`` coordinate sweeps.  ``max_iterations`` caps each SLSQP polish.
    With ``local_search`` set, ``restarts`` random SLSQP restarts also run.  ``tolerance`` bounds accepted chain
    deviations and is the agreement scale used by the consistency checks.
    """

    restarts: int = 8
    grid_resolution: int = 8
    max_iterations: int = 400
    seed: int = 0
    tolerance: float = 1e-3
    column_rounds: int = 80
    pricing_sweeps: int = 100
    local_search: bool = False

    def __post_init__(self) -> None:
        for name in ("restarts", "grid_resolution", "max_iterations", "column_rounds", "pricing_sweeps"):
            if int(getattr(self, name)) <= 0:
                raise ArgumentError(f"{name} must be positive")
        if not self.tolerance > 0:
            raise ArgumentError("tolerance must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ArgumentError("seed must fit in 64 bits")

    def generator(self, name: str) -> np.random.Generator:
        """Independent generator per named stream (restart index, pricing round, ...)."""
        return stream(self.seed, "search", name)


# -- entropy helpers ----------------------------------------------------------


def _h(p: np.ndarray, axis=None) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return t.sum(axis=axis)


def _soft(score: np.ndarray, temp: float) -> np.ndarray:
    """Row-wise argmax over the simplex of ``temp * H(p) + p . score``.

    The maximizer is proportional to ``2 ** (score / temp)``; a zero temperature gives
    the point mass at the largest score.
    """
    if temp <= 1e-15:
        out = np.zeros_like(score, dtype=float)
        np.put_along_axis(out, np.argmax(score, axis=-1)[..., None], 1.0, axis=-1)
        return out
    s = score / temp
    top = np.max(s, axis=-1, keepdims=True)
    top = np.where(np.isfinite(top), top, 0.0)
    w = np.exp2(s - top)
    tot = w.sum(axis=-1, keepdims=True)
    return np.where(tot > 0, w / np.where(tot > 0, tot, 1.0), 1.0 / score.shape[-1])


_LETTERS = "abcdefgh"


def _contract_except(nu: np.ndarray, ps: list[np.ndarray], i: int) -> np.ndarray:
    """Batched ``nu`` contracted with every factor but the ``i``-th; rows index starts."""
    k = len(ps)
    subs = [_LETTERS[:k]] + [f"s{_LETTERS[j]}" for j in range(k) if j != i]
    ops = [nu] + [ps[j] for j in range(k) if j != i]
    return np.einsum(",".join(subs) + f"->s{_LETTERS[i]}", *ops)


def _batch_outer(ps: list[np.ndarray]) -> np.ndarray:
    k = len(ps)
    subs = ",".join(f"s{_LETTERS[j]}" for j in range(k))
    return np.einsum(subs + f"->s{_LETTERS[:k]}", *ps)


def _lattice_starts(rng: np.random.Generator, count: int, k: int, res: int) -> np.ndarray:
    """Random lattice points of the simplex with denominator ``res``, mixed with uniform."""
    cuts = np.sort(rng.integers(0, res + 1, size=(count, k - 1)), axis=1)
    counts = np.diff(np.concatenate((np.zeros((count, 1)), cuts, np.full((count, 1), res)), axis=1), axis=1)
    return 0.9 * counts / res + 0.1 / k


# -- atoms --------------------------------------------------------------------


@dataclass
class _Atom:
    """One column: its distribution over target cells, its value, and its parameters."""

    vector: np.ndarray
    value: float
    params: dict


class _ProductPricer:
    """Atoms ``p_1 x ... x p_k`` with value ``sum_i alpha_i H(p_i)``."""

    def __init__(self, shape: tuple[int, ...], alphas: tuple[float, ...]):
        self.shape = shape
        self.alphas = alphas

    def make(self, ps: list[np.ndarray]) -> _Atom:
        value = float(sum(a * _h(p) for a, p in zip(self.alphas, ps)))
        return _Atom(_batch_outer([p[None] for p in ps])[0].reshape(-1), value, {"factors": [p.copy() for p in ps]})

    def point_atoms(self) -> list[_Atom]:
        atoms = []
        for cell in itertools.product(*(range(n) for n in self.shape)):
            atoms.append(self.make([np.eye(n)[c] for n, c in zip(self.shape, cell)]))
        return atoms

    def _gain(self, nu, ps):
        ent = sum(a * _h(p, axis=1) for a, p in zip(self.alphas, ps))
        return ent - np.einsum("sa,sa->s", _contract_except(nu, ps, 0), ps[0])

    def price(self, nu, rng, starts, res, sweeps) -> list[tuple[float, _Atom]]:
        nu = nu.reshape(self.shape)
        ps = [_lattice_starts(rng, starts, n, res) for n in self.shape]
        prev = np.full(starts, -np.inf)
        for _ in range(sweeps):
            for i, a in enumerate(self.alphas):
                ps[i] = _soft(-_contract_except(nu, ps, i), a)
            gain = self._gain(nu, ps)
            if np.max(gain - prev) < 1e-13:
                break
            prev = gain
        return [(float(g), self.make([p[s] for p in ps])) for s, g in enumerate(gain)]


class _BlockPricer:
    """V-blocks of the three-node objective.

    A block is ``c`` on Z with inner atoms ``(pi_k, a_k, b_k)`` on (X, Y).  Its value is
    ``w2 H(sum_k pi_k a_k) + w0 H(c) + sum_k pi_k [(w0 + w1) H(a_k) + w0 H(b_k)]``.
    Pricing maximizes a variational lower bound of the ``w2`` term, which makes every
    coordinate step closed form and the ascent monotone.
    """

    def __init__(self, shape: tuple[int, int, int], w: tuple[float, float, float], inner: int):
        self.shape = shape
        self.w0, self.w1, self.w2 = w
        self.inner = inner

    def value(self, pi, a, b, c):
        """Block values; leading axes of the arguments are batch axes."""
        m = np.einsum("...k,...kx->...x", pi, a)
        inner = (self.w0 + self.w1) * _h(a, axis=-1) + self.w0 * _h(b, axis=-1)
        return self.w2 * _h(m, axis=-1) + self.w0 * _h(c, axis=-1) + np.sum(pi * inner, axis=-1)

    def make(self, pi, a, b, c) -> _Atom:
        s = np.einsum("k,kx,ky->xy", pi, a, b)
        vec = np.multiply.outer(s, c).reshape(-1)
        return _Atom(vec, float(self.value(pi, a, b, c)), {"pi": pi.copy(), "a": a.copy(), "b": b.copy(), "c": c.copy()})

    def point_atoms(self) -> list[_Atom]:
        nx, ny, nz = self.shape
        atoms = []
        for x, y, z in itertools.product(range(nx), range(ny), range(nz)):
            pi = np.zeros(self.inner)
            pi[0] = 1.0
            a = np.tile(np.eye(nx)[x], (self.inner, 1))
            b = np.tile(np.eye(ny)[y], (self.inner, 1))
            atoms.append(self.make(pi, a, b, np.eye(nz)[z]))
        return atoms

    @staticmethod
    def _log_posterior(pi, a):
        m = np.einsum("sk,skx->sx", pi, a)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = pi[:, :, None] * a / m[:, None, :]
            return np.where(r > 0, np.log2(np.where(r > 0, r, 1.0)), -np.inf)

    def price(self, nu, rng, starts, res, sweeps):
        nx, ny, nz = self.shape
        w0, w1, w2 = self.w0, self.w1, self.w2
        wa = w0 + w1 + w2
        nu = nu.reshape(self.shape)
        K = self.inner
        pi = _lattice_starts(rng, starts, K, res)
        a = _lattice_starts(rng, starts * K, nx, res).reshape(starts, K, nx)
        b = _lattice_starts(rng, starts * K, ny, res).reshape(starts, K, ny)
        c = _lattice_starts(rng, starts, nz, res)
        prev = np.full(starts, -np.inf)
        for _ in range(sweeps):
            c = _soft(-np.einsum("xyz,skx,sky,sk->sz", nu, a, b, pi), w0)
            nuc = np.einsum("xyz,sz->sxy", nu, c)
            for k in range(K):
                b[:, k] = _soft(-np.einsum("sx,sxy->sy", a[:, k], nuc), w0)
                logr = self._log_posterior(pi, a)[:, k]
                a[:, k] = _soft(w2 * logr - np.einsum("sxy,sy->sx", nuc, b[:, k]), wa)
            logr = self._log_posterior(pi, a)
            lr = np.where(a > 0, np.where(np.isfinite(logr), logr, 0.0), 0.0)
            cross = np.einsum("skx,sky,sxy->sk", a, b, nuc)
            score = wa * _h(a, axis=-1) + w0 * _h(b, axis=-1) - cross + w2 * np.sum(a * lr, axis=-1)
            pi = _soft(score, w2)
            gain = self.value(pi, a, b, c) - np.sum(pi * cross, axis=-1)
            if np.max(np.abs(gain - prev)) < 1e-13:
                break
            prev = gain
        return [(float(g), self.make(pi[s], a[s], b[s], c[s])) for s, g in enumerate(gain)]


def _column_generation(q: np.ndarray, pricer, cfg: OptimizerConfig, tag: str):
    """Maximize ``sum_j lambda_j value_j`` over mixtures of atoms matching ``q``."""
    base = pricer.point_atoms()
    generated: list[_Atom] = []
    starts = max(8, 4 * cfg.restarts)
    for rnd in range(cfg.column_rounds):
        atoms = base + generated
        a_eq = np.stack([t.vector for t in atoms], axis=1)
        values = np.array([t.value for t in atoms])
        res = linprog(-values, A_eq=a_eq, b_eq=q, bounds=(0, None), method="highs")
        if res.status != 0:
            raise SearchFailure(f"master LP failed: {res.message}", float("inf"))
        lam = res.x
        best_value = -res.fun
        nu = -res.eqlin.marginals
        rng = cfg.generator(f"{tag}/price/{rnd}")
        cands = pricer.price(nu, rng, starts, cfg.grid_resolution, cfg.pricing_sweeps)
        cands.sort(key=lambda gc: -gc[0])
        fresh: list[_Atom] = []
        for gain, atom in cands:
            if gain <= GAP_TOL or len(fresh) >= 4:
                break
            if any(np.abs(atom.vector - t.vector).max() < 1e-9 for t in fresh):
                continue
            fresh.append(atom)
        if not fresh:
            break
        if len(generated) > 300:
            active = lam[len(base) :] > 1e-12
            generated = [t for t, keep in zip(generated, active) if keep]
            lam = None
        generated += fresh
    atoms = base + generated
    if lam is None or len(lam) != len(atoms):
        a_eq = np.stack([t.vector for t in atoms], axis=1)
        res = linprog(-np.array([t.value for t in atoms]), A_eq=a_eq, b_eq=q, bounds=(0, None), method="highs")
        lam, best_value = res.x, -res.fun
    support = [(float(l), t) for l, t in zip(lam, atoms) if l > 1e-12]
    return best_value, support


# -- three-node weighted objective ---------------------------------------------


def _check_target(target: JointDistribution) -> np.ndarray:
    if set(target.names) != set(XYZ):
        raise ArgumentError(f"target must be over X, Y, Z, got {target.names}")
    return target.reorder(XYZ).pmf


def _d_model(q: np.ndarray, weights, cu: int, cv: int, phi: tuple[int, ...] | None) -> FactorModel:
    nx, ny, nz = q.shape
    w0, w1, w2 = weights
    variables = [("X", nx), ("Y", ny), ("Z", nz), ("U", cu), ("V", cv)]
    if phi is None:
        factors = [Factor(("U", "V")), Factor(("X",), ("U", "V")), Factor(("Y",), ("U", "V")), Factor(("Z",), ("V",))]
    else:
        fixed = np.zeros((cu, cv))
        fixed[np.arange(cu), phi] = 1.0
        factors = [
            Factor(("U",)),
            Factor(("V",), ("U",), fixed=fixed),
            Factor(("X",), ("U",)),
            Factor(("Y",), ("U",)),
            Factor(("Z",), ("V",)),
        ]
    terms = []
    if w0:
        terms += [(w0, ("X", "Y", "Z")), (w0, ("U", "V")), (-w0, ("X", "Y", "Z", "U", "V"))]
    if w1:
        terms += [(w1, ("X",)), (w1, ("U", "V")), (-w1, ("X", "U", "V"))]
    if w2:
        terms += [(w2, ("X",)), (w2, ("V",)), (-w2, ("X", "V"))]
    return FactorModel(variables, factors, ("X", "Y", "Z"), q, terms)


def _blocks_to_arrays(support, inner: int, nx: int, ny: int, nz: int, prime: bool):
    """Coupling factor arrays (p_uv, x|uv, y|uv, z|v) from LP atoms."""
    blocks = []
    for lam, atom in support:
        p = atom.params
        if "pi" in p:
            keep = p["pi"] > 1e-12
            blocks.append((lam, p["pi"][keep] / p["pi"][keep].sum(), p["a"][keep], p["b"][keep], p["c"]))
        else:
            a, b, c = p["factors"]
            blocks.append((lam, np.ones(1), a[None], b[None], c))
    cv = len(blocks)
    if prime:
        cu = sum(len(bl[1]) for bl in blocks)
    else:
        cu = max(len(bl[1]) for bl in blocks)
    p_uv = np.zeros((cu, cv))
    xg = np.full((cu, cv, nx), 1.0 / nx)
    yg = np.full((cu, cv, ny), 1.0 / ny)
    zg = np.zeros((cv, nz))
    u0 = 0
    for v, (lam, pi, a, b, c) in enumerate(blocks):
        k = len(pi)
        us = np.arange(u0, u0 + k) if prime else np.arange(k)
        p_uv[us, v] = lam * pi
        xg[us, v] = a
        yg[us, v] = b
        zg[v] = c
        if prime:
            u0 += k
    p_uv /= p_uv.sum()
    return p_uv, xg, yg, zg


def _pad(arrays, cu: int, cv: int):
    p_uv, xg, yg, zg = arrays
    u0, v0 = p_uv.shape
    nx, ny, nz = xg.shape[2], yg.shape[2], zg.shape[1]
    P = np.zeros((cu, cv))
    P[:u0, :v0] = p_uv
    X = np.full((cu, cv, nx), 1.0 / nx)
    X[:u0, :v0] = xg
    Y = np.full((cu, cv, ny), 1.0 / ny)
    Y[:u0, :v0] = yg
    Z = np.full((cv, nz), 1.0 / nz)
    Z[:v0] = zg
    return P, X, Y, Z


def _phi_of(p_uv: np.ndarray) -> tuple[int, ...]:
    return tuple(int(v) for v in np.argmax(p_uv, axis=1))


def _surjections(cu: int, cv: int, rng: np.random.Generator, count: int) -> list[tuple[int, ...]]:
    """Maps [cu] -> [cv] hitting every symbol; enumerated when few, sampled otherwise."""
    if cv > cu:
        raise ArgumentError("no surjection from a smaller alphabet")
    if cv**cu <= 4096:
        maps = [f for f in itertools.product(range(cv), repeat=cu) if len(set(f)) == cv and f[0] == 0]
        # symmetry: canonical labelling (first occurrence order) removes V relabellings
        canon = [f for f in maps if list(dict.fromkeys(f)) == list(range(cv))]
        if len(canon) <= count:
            return canon
        idx = rng.choice(len(canon), size=count, replace=False)
        return [canon[i] for i in sorted(idx)]
    out = []
    for _ in range(count):
        f = np.concatenate([np.arange(cv), rng.integers(0, cv, size=cu - cv)])
        rng.shuffle(f)
        out.append(tuple(int(v) for v in f))
    return out


def _arrays_to_theta(model: FactorModel, arrays, phi):
    p_uv, xg, yg, zg = arrays
    if phi is None:
        return model.pack([p_uv[None, None, None], xg.transpose(2, 0, 1)[:, None, None], yg.transpose(2, 0, 1)[None, :, None], zg.T[None, None, :, None, :]])
    cu = p_uv.shape[0]
    idx = np.arange(cu)
    pu = p_uv[idx, phi]
    xu = xg[idx, phi].T  # [x, u]
    yu = yg[idx, phi].T
    return model.pack([pu[None, None, None, :, None], xu[:, None, None, :, None], yu[None, :, None, :, None], zg.T[None, None, :, None, :]])


def _rank_key(obj: float, rates: RatePoint):
    return (round(obj, 12), rates.r0, rates.r)


def minimize_rates(
    target: JointDistribution,
    objective: tuple[float, float, float],
    cards: tuple[int, int] | None = None,
    restrict_to_Dprime: bool = False,
    cfg: OptimizerConfig | None = None,
) -> tuple[AuxiliaryCoupling, RatePoint]:
    """Minimize ``w0 R0 + w1 R1 + w2 R2`` over couplings in D (or D').

    ``cards`` caps (|U|, |V|); by default the cardinality bounds of the region.
    The result is an upper bound on the true minimum.
    """
    cfg = cfg or OptimizerConfig()
    q = _check_target(target)
    w = tuple(float(v) for v in objective)
    if len(w) != 3 or min(w) < 0 or max(w) <= 0:
        raise ArgumentError(f"weights must be three nonnegative numbers, not all zero; got {objective}")
    nx, ny, nz = q.shape
    u_max, v_max = cardinality_bounds(nx, ny, nz)
    cu_cap, cv_cap = (u_max, v_max) if cards is None else (int(cards[0]), int(cards[1]))
    if cu_cap < 1 or cv_cap < 1 or cv_cap > v_max or cu_cap > cardinality_bounds(nx, ny, nz, cv_cap)[0]:
        raise ArgumentError(f"cards {cards} outside the bounds |V| <= {v_max}, |U| <= |X||Y||Z||V|+3")
    if restrict_to_Dprime and cu_cap < cv_cap:
        cv_cap = cu_cap

    tag = f"D'{w}" if restrict_to_Dprime else f"D{w}"
    candidates = []  # (objective, arrays, phi or None)

    # global stage
    inner = nx * ny if w[2] > 0 else 1
    pricer = _BlockPricer((nx, ny, nz), w, inner) if w[2] > 0 else _ProductPricer(
        (nx, ny, nz), (w[0] + w[1], w[0], w[0])
    )
    _, support = _column_generation(q.reshape(-1), pricer, cfg, tag)
    arrays = _blocks_to_arrays(support, inner, nx, ny, nz, restrict_to_Dprime)
    gu, gv = arrays[0].shape
    if gu <= cu_cap and gv <= cv_cap:
        phi = _phi_of(arrays[0]) if restrict_to_Dprime else None
        model = _d_model(q, w, gu, gv, phi)
        theta = _arrays_to_theta(model, arrays, phi)
        j = model.joint(theta)
        candidates.append((model.objective_of_joint(j), j, _tv(model, j)))
        fit = model.fit(theta, cfg.max_iterations)
        candidates.append((fit.objective, fit.joint, fit.marginal_deviation))
        local_cards = (gu, gv)
    else:
        local_cards = (min(cu_cap, 8), min(cv_cap, 8))

    # local random restarts
    if cfg.local_search or not candidates:
        cu, cv = local_cards
        rng = cfg.generator(f"{tag}/phi")
        phis = _surjections(cu, cv, rng, cfg.restarts) if restrict_to_Dprime else [None]
        for r in range(cfg.restarts):
            phi = phis[r % len(phis)]
            model = _d_model(q, w, cu, cv, phi)
            theta = model.random_theta(cfg.generator(f"{tag}/restart/{r}"))
            fit = model.fit(theta, cfg.max_iterations)
            candidates.append((fit.objective, fit.joint, fit.marginal_deviation))

    feasible = [c for c in candidates if c[2] <= FEASIBILITY_TOL]
    if not feasible:
        best_dev = min(c[2] for c in candidates)
        raise SearchFailure(f"no coupling matched the target within {FEASIBILITY_TOL}", best_dev)
    best = None
    for obj, j, _ in feasible:
        aux = _to_coupling(j, target)
        rates = rate_triple(aux)
        key = _rank_key(obj, rates)
        if best is None or key < best[0]:
            best = (key, aux, rates)
    return best[1], best[2]


def _tv(model: FactorModel, j: np.ndarray) -> float:
    m = j.sum(axis=tuple(range(3, j.ndim))).reshape(-1)
    return 0.5 * float(np.abs(m - model.target).sum())


def _to_coupling(j: np.ndarray, target: JointDistribution) -> AuxiliaryCoupling:
    j = np.clip(j, 0.0, None)
    j = j / j.sum()
    # drop unused auxiliary symbols
    used_u = j.sum(axis=(0, 1, 2, 4)) > 0
    used_v = j.sum(axis=(0, 1, 2, 3)) > 0
    j = j[:, :, :, used_u][:, :, :, :, used_v]
    return AuxiliaryCoupling(JointDistribution(("X", "Y", "Z", "U", "V"), j, atol=1e-9), target)


# -- common information ----------------------------------------------------------


def _product_envelope(pmf: np.ndarray, names: tuple[str, ...], cfg: OptimizerConfig, card: int | None):
    """min I(all; W) over W making the coordinates of ``pmf`` mutually independent."""
    shape = pmf.shape
    total = float(_h(pmf.reshape(-1)))
    pricer = _ProductPricer(shape, (1.0,) * len(shape))
    tag = f"wyner{shape}"
    value, support = _column_generation(pmf.reshape(-1), pricer, cfg, tag)
    best = total - value
    atoms = len(support)

    def model_for(k):
        variables = [(n, s) for n, s in zip(names, shape)] + [("W", k)]
        factors = [Factor(("W",))] + [Factor((n,), ("W",)) for n in names]
        terms = [(1.0, names), (1.0, ("W",)), (-1.0, names + ("W",))]
        return FactorModel(variables, factors, names, pmf, terms)

    if card is None or atoms <= card:
        k = atoms
        model = model_for(k)
        lam = np.array([l for l, _ in support])
        arrays = [(lam / lam.sum()).reshape((1,) * len(shape) + (k,))]
        for i in range(len(shape)):
            tab = np.array([t.params["factors"][i] for _, t in support]).T  # [s_i, w]
            arrays.append(tab.reshape(tuple(shape[i] if a == i else 1 for a in range(len(shape))) + (k,)))
        fit = model.fit(model.pack(arrays), cfg.max_iterations)
        if fit.marginal_deviation <= FEASIBILITY_TOL:
            best = min(best, fit.objective)
        found = True
    else:
        best, found = np.inf, False

    if cfg.local_search or not found:
        k = card if card is not None else atoms
        model = model_for(k)
        for r in range(cfg.restarts):
            fit = model.fit(model.random_theta(cfg.generator(f"{tag}/{k}/restart/{r}")), cfg.max_iterations)
            if fit.marginal_deviation <= FEASIBILITY_TOL:
                best = min(best, fit.objective)
    if not np.isfinite(best):
        raise SearchFailure(f"no |W|={card} decomposition matched the target", float("nan"))
    return max(0.0, float(best))


def wyner_common_information(q_xy: JointDistribution, card_u: int | None = None, cfg: OptimizerConfig | None = None) -> float:
    """C(X;Y) = min I(X,Y;U) over U with X-U-Y, with |U| <= ``card_u``."""
    cfg = cfg or OptimizerConfig()
    if set(q_xy.names) != {"X", "Y"}:
        raise ArgumentError(f"expected a joint over X and Y, got {q_xy.names}")
    if card_u is not None and card_u < 1:
        raise ArgumentError("card_u must be at least 1")
    pmf = q_xy.reorder(("X", "Y")).pmf
    return _product_envelope(pmf, ("X", "Y"), cfg, card_u)


def triple_wyner(q_xyz: JointDistribution, cfg: OptimizerConfig | None = None, card_w: int | None = None) -> float:
    """min I(X,Y,Z;W) over W rendering X, Y, Z mutually conditionally independent."""
    cfg = cfg or OptimizerConfig()
    return _product_envelope(_check_target(q_xyz), XYZ, cfg, card_w)


def cascade_common_information(q_xyz: JointDistribution, cfg: OptimizerConfig | None = None) -> float:
    """C_c: the least common-randomness rate over the cascade coupling set D."""
    _, rates = minimize_rates(q_xyz, (1.0, 0.0, 0.0), cfg=cfg)
    return rates.r0
