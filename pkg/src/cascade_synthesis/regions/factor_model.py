"""Couplings parametrized as products of conditional factors.

A :class:`FactorModel` writes a joint pmf over named variables as

    J = prod_k F_k

where each free factor ``F_k`` is a conditional pmf (rows over its child
variables sum to one) and fixed factors are constant 0/1 indicator arrays.
Markov structure is therefore exact by construction; only the marginal on
the target variables has to be enforced, which is done as an equality
constraint in SLSQP with analytic gradients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

_LN2 = math.log(2.0)
_FLOOR = 1e-300


@dataclass
class Factor:
    child: tuple[str, ...]
    parents: tuple[str, ...] = ()
    fixed: np.ndarray | None = None  # array over the sorted scope, if not free


@dataclass
class FitResult:
    joint: np.ndarray
    objective: float
    marginal_deviation: float
    success: bool
    params: list[np.ndarray] = field(default_factory=list)


class FactorModel:
    """Joint pmf as a product of conditional factors over ``variables``.

    Parameters
    ----------
    variables
        ``[(name, size), ...]``; the axis order of every joint array.
    factors
        Free conditionals and fixed indicator factors.
    target_vars
        Variables whose marginal must equal ``target``.
    entropy_terms
        ``[(coef, (names...)), ...]``; the objective is
        ``sum coef * H(names)`` in bits.
    """

    def __init__(self, variables, factors, target_vars, target, entropy_terms):
        self.names = tuple(v[0] for v in variables)
        self.shape = tuple(int(v[1]) for v in variables)
        self.factors = list(factors)
        self.target_axes = tuple(self.names.index(n) for n in target_vars)
        self.target = np.asarray(target, dtype=float).reshape(-1)
        self.terms = [(float(c), tuple(self.names.index(n) for n in names)) for c, names in entropy_terms]

        full = np.indices(self.shape).reshape(len(self.shape), -1)
        self._tidx = np.ravel_multi_index(full[list(self.target_axes)], [self.shape[a] for a in self.target_axes])
        self._scopes, self._sidx, self._bshape = [], [], []
        self._free = []
        for f in self.factors:
            axes = tuple(sorted(self.names.index(n) for n in f.child + f.parents))
            self._scopes.append(axes)
            sshape = [self.shape[a] for a in axes]
            self._sidx.append(np.ravel_multi_index(full[list(axes)], sshape))
            self._bshape.append(tuple(self.shape[a] if a in axes else 1 for a in range(len(self.shape))))
            self._free.append(f.fixed is None)
        self._layout()

    def _layout(self):
        self._offsets = []
        rows = []
        off = 0
        for k, f in enumerate(self.factors):
            if not self._free[k]:
                self._offsets.append(None)
                continue
            axes = self._scopes[k]
            size = math.prod(self.shape[a] for a in axes)
            self._offsets.append((off, size))
            # one normalization row per parent configuration
            child_axes = [axes.index(self.names.index(n)) for n in f.child]
            idx = np.indices([self.shape[a] for a in axes]).reshape(len(axes), -1)
            parent_pos = [i for i in range(len(axes)) if i not in child_axes]
            if parent_pos:
                pkey = np.ravel_multi_index(idx[parent_pos], [self.shape[axes[i]] for i in parent_pos])
            else:
                pkey = np.zeros(size, dtype=int)
            nrows = int(pkey.max()) + 1
            block = np.zeros((nrows, size))
            block[pkey, np.arange(size)] = 1.0
            rows.append((off, block))
            off += size
        self.n_params = off
        self._norm = np.zeros((sum(b.shape[0] for _, b in rows), off))
        r = 0
        for o, b in rows:
            self._norm[r : r + b.shape[0], o : o + b.shape[1]] = b
            r += b.shape[0]

    # -- evaluation ---------------------------------------------------------

    def factor_arrays(self, theta: np.ndarray) -> list[np.ndarray]:
        out = []
        for k, f in enumerate(self.factors):
            if self._free[k]:
                o, s = self._offsets[k]
                out.append(theta[o : o + s].reshape(self._bshape[k]))
            else:
                out.append(np.asarray(f.fixed, dtype=float).reshape(self._bshape[k]))
        return out

    def joint(self, theta: np.ndarray) -> np.ndarray:
        j = np.ones(self.shape)
        for a in self.factor_arrays(theta):
            j = j * a
        return j

    def _others(self, arrays, k):
        o = np.ones(self.shape)
        for i, a in enumerate(arrays):
            if i != k:
                o = o * a
        return o

    def objective(self, theta: np.ndarray) -> float:
        j = self.joint(theta)
        return self.objective_of_joint(j)

    def objective_of_joint(self, j: np.ndarray) -> float:
        val = 0.0
        for c, axes in self.terms:
            m = _marg(j, axes)
            m = m[m > 0]
            val -= c * float(np.sum(m * np.log(m))) / _LN2
        return val

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        arrays = self.factor_arrays(theta)
        j = np.ones(self.shape)
        for a in arrays:
            j = j * a
        g = np.zeros(self.shape)
        for c, axes in self.terms:
            m = _marg(j, axes, keepdims=True)
            g = g - c * (np.log(np.maximum(m, _FLOOR)) / _LN2 + 1.0 / _LN2)
        grad = np.zeros(self.n_params)
        for k in range(len(self.factors)):
            if not self._free[k]:
                continue
            o, s = self._offsets[k]
            w = (g * self._others(arrays, k)).reshape(-1)
            grad[o : o + s] = np.bincount(self._sidx[k], weights=w, minlength=s)
        return grad

    def marginal(self, theta: np.ndarray) -> np.ndarray:
        return _marg(self.joint(theta), self.target_axes).reshape(-1)

    def marginal_jacobian(self, theta: np.ndarray) -> np.ndarray:
        arrays = self.factor_arrays(theta)
        t = self.target.size
        jac = np.zeros((t, self.n_params))
        for k in range(len(self.factors)):
            if not self._free[k]:
                continue
            o, s = self._offsets[k]
            w = self._others(arrays, k).reshape(-1)
            cell = self._tidx * s + self._sidx[k]
            jac[:, o : o + s] = np.bincount(cell, weights=w, minlength=t * s).reshape(t, s)
        return jac

    def pack(self, arrays: list[np.ndarray]) -> np.ndarray:
        """Parameter vector from one array per free factor, each broadcastable to its scope."""
        theta = np.zeros(self.n_params)
        free = [k for k in range(len(self.factors)) if self._free[k]]
        if len(arrays) != len(free):
            raise ValueError(f"expected {len(free)} factor arrays, got {len(arrays)}")
        for k, arr in zip(free, arrays):
            o, s = self._offsets[k]
            theta[o : o + s] = np.broadcast_to(np.asarray(arr, dtype=float), self._bshape[k]).reshape(-1)
        return self.normalize(theta)

    # -- search -------------------------------------------------------------

    def random_theta(self, rng: np.random.Generator, concentration: float = 1.0) -> np.ndarray:
        theta = rng.gamma(concentration, size=self.n_params) + 1e-3
        return self.normalize(theta)

    def normalize(self, theta: np.ndarray) -> np.ndarray:
        theta = np.clip(theta, 0.0, None)
        sums = self._norm @ theta
        theta = theta / (self._norm.T @ np.where(sums > 0, sums, 1.0))
        # rows that collapsed to zero become uniform
        empty = self._norm.T @ (sums <= 0).astype(float) > 0
        if empty.any():
            rowsize = self._norm.T @ self._norm.sum(axis=1)
            theta[empty] = 1.0 / rowsize[empty]
        return theta

    def fit(self, theta0: np.ndarray, max_iterations: int = 500, ftol: float = 1e-12) -> FitResult:
        n_eq_t = self.target.size - 1
        cons = [
            {
                "type": "eq",
                "fun": lambda th: self._norm @ th - 1.0,
                "jac": lambda th: self._norm,
            },
            {
                "type": "eq",
                "fun": lambda th: self.marginal(th)[:n_eq_t] - self.target[:n_eq_t],
                "jac": lambda th: self.marginal_jacobian(th)[:n_eq_t],
            },
        ]
        res = minimize(
            self.objective,
            theta0,
            jac=self.gradient,
            bounds=[(0.0, 1.0)] * self.n_params,
            constraints=cons,
            method="SLSQP",
            options={"maxiter": max_iterations, "ftol": ftol},
        )
        theta = self.normalize(res.x)
        j = self.joint(theta)
        dev = 0.5 * float(np.abs(_marg(j, self.target_axes).reshape(-1) - self.target).sum())
        return FitResult(
            joint=j,
            objective=self.objective_of_joint(j),
            marginal_deviation=dev,
            success=bool(res.success),
            params=[a.copy() for a in self.factor_arrays(theta)],
        )


def _marg(j: np.ndarray, axes, keepdims: bool = False) -> np.ndarray:
    drop = tuple(a for a in range(j.ndim) if a not in axes)
    m = j.sum(axis=drop, keepdims=keepdims) if drop else j
    if keepdims:
        return m
    kept = [a for a in range(j.ndim) if a in axes]
    return np.transpose(m, [kept.index(a) for a in axes])
