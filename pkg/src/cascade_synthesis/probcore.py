"""Exact finite-alphabet probability.

Joint distributions are dense ``numpy`` arrays with one named axis per
variable. All information measures are in bits, with ``0 log 0 = 0``.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.special import entr

from .errors import ArgumentError, CapacityError, DimensionError, DistributionError, NumericalError

SUM_TOL = 1e-12
CLAMP_TOL = 1e-9
DENSE_LIMIT = 2**24
DEFAULT_GUARD = 10**8

_LN2 = math.log(2.0)

Names = str | Sequence[str]


def _as_names(names: Names) -> tuple[str, ...]:
    if isinstance(names, str):
        return (names,)
    return tuple(names)


def _check_mass(mass: np.ndarray, atol: float) -> None:
    if not np.all(np.isfinite(mass)):
        raise DistributionError("mass contains NaN or infinity")
    if mass.size and mass.min() < 0.0:
        raise DistributionError(f"negative mass {mass.min():.3e}")
    total = float(mass.sum())
    if abs(total - 1.0) > atol:
        raise DistributionError(f"mass sums to {total!r}, not 1 (tolerance {atol:g})")


@dataclass(frozen=True)
class FiniteDistribution:
    """A pmf over ``range(alphabet_size)``."""

    mass: np.ndarray

    def __post_init__(self) -> None:
        mass = np.array(self.mass, dtype=float).reshape(-1)
        if mass.size == 0:
            raise ArgumentError("empty alphabet")
        _check_mass(mass, SUM_TOL)
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)

    @property
    def alphabet_size(self) -> int:
        return self.mass.size

    def as_joint(self, name: str = "X") -> JointDistribution:
        return JointDistribution([name], self.mass)

    @classmethod
    def uniform(cls, k: int) -> FiniteDistribution:
        return cls(np.full(k, 1.0 / k))

    @classmethod
    def point(cls, k: int, symbol: int) -> FiniteDistribution:
        mass = np.zeros(k)
        mass[symbol] = 1.0
        return cls(mass)


class JointDistribution:
    """Multiway pmf over an ordered list of named finite variables.

    Parameters
    ----------
    names
        Variable names, one per axis of ``pmf``.
    pmf
        Array of probabilities with ``pmf.ndim == len(names)``.
    atol
        Tolerance on the total mass.
    """

    __slots__ = ("names", "pmf")

    def __init__(self, names: Iterable[str], pmf: np.ndarray, *, atol: float = SUM_TOL):
        names = tuple(names)
        pmf = np.array(pmf, dtype=float)
        if len(set(names)) != len(names):
            raise ArgumentError(f"duplicate variable names {names}")
        if pmf.ndim != len(names):
            raise DimensionError(f"{len(names)} names for a {pmf.ndim}-dimensional array")
        if pmf.size > DENSE_LIMIT:
            raise CapacityError(
                f"joint state space has {pmf.size} entries, above the dense limit {DENSE_LIMIT}",
                required=pmf.size,
                guard=DENSE_LIMIT,
            )
        _check_mass(pmf, atol)
        pmf.setflags(write=False)
        self.names = names
        self.pmf = pmf

    @classmethod
    def from_table(cls, variables: Sequence[tuple[str, int]], mass, *, atol: float = SUM_TOL):
        """Build from ``[(name, size), ...]`` and a row-major flat mass list."""
        names = [v[0] for v in variables]
        shape = tuple(int(v[1]) for v in variables)
        flat = np.asarray(mass, dtype=float).reshape(-1)
        if flat.size != math.prod(shape):
            raise DimensionError(f"{flat.size} masses for shape {shape}")
        return cls(names, flat.reshape(shape), atol=atol)

    @property
    def sizes(self) -> tuple[int, ...]:
        return self.pmf.shape

    @property
    def variables(self) -> list[tuple[str, int]]:
        return list(zip(self.names, self.sizes))

    def size_of(self, name: str) -> int:
        return self.pmf.shape[self._axis(name)]

    def _axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ArgumentError(f"unknown variable {name!r}; have {self.names}") from None

    def marginal_array(self, names: Names) -> np.ndarray:
        names = _as_names(names)
        axes = [self._axis(n) for n in names]
        if len(set(axes)) != len(axes):
            raise ArgumentError(f"repeated variable in {names}")
        drop = tuple(i for i in range(self.pmf.ndim) if i not in axes)
        m = self.pmf.sum(axis=drop) if drop else self.pmf
        kept = [i for i in range(self.pmf.ndim) if i in axes]
        return np.transpose(m, [kept.index(a) for a in axes])

    def marginal(self, names: Names) -> JointDistribution:
        names = _as_names(names)
        return JointDistribution(names, self.marginal_array(names), atol=max(SUM_TOL, 1e-9))

    def reorder(self, names: Names) -> JointDistribution:
        names = _as_names(names)
        if sorted(names) != sorted(self.names):
            raise DimensionError(f"cannot reorder {self.names} as {names}")
        return self.marginal(names)

    def conditional(self, target: Names, given: Names) -> np.ndarray:
        """Array of shape ``given_sizes + target_sizes`` holding P(target | given).

        Rows with zero conditioning mass are set to uniform; they carry no
        weight in any expectation.
        """
        target, given = _as_names(target), _as_names(given)
        joint = self.marginal_array(given + target)
        g_shape = joint.shape[: len(given)]
        t_size = math.prod(joint.shape[len(given):])
        flat = joint.reshape(math.prod(g_shape), t_size)
        tot = flat.sum(axis=1, keepdims=True)
        out = np.where(tot > 0, flat / np.where(tot > 0, tot, 1.0), 1.0 / t_size)
        return out.reshape(joint.shape)

    def group(self, new_name: str, names: Names) -> JointDistribution:
        """Merge ``names`` into one variable (row-major over the listed order)."""
        names = _as_names(names)
        rest = [n for n in self.names if n not in names]
        arr = self.marginal_array(rest + list(names))
        shape = arr.shape[: len(rest)] + (math.prod(arr.shape[len(rest):]),)
        return JointDistribution(rest + [new_name], arr.reshape(shape))

    def rename(self, mapping: dict[str, str]) -> JointDistribution:
        return JointDistribution([mapping.get(n, n) for n in self.names], self.pmf)

    def product(self, other: JointDistribution) -> JointDistribution:
        """Independent product; ``other``'s variables are appended."""
        arr = np.multiply.outer(self.pmf, other.pmf)
        return JointDistribution(self.names + other.names, arr, atol=max(SUM_TOL, 1e-9))

    def __repr__(self) -> str:
        vars_ = ", ".join(f"{n}:{s}" for n, s in self.variables)
        return f"JointDistribution({vars_})"


@dataclass(frozen=True)
class Channel:
    """A conditional pmf ``rows[i, ...]`` from one input symbol to named outputs."""

    rows: np.ndarray
    output_names: tuple[str, ...] = ("Y",)

    def __post_init__(self) -> None:
        rows = np.array(self.rows, dtype=float)
        names = _as_names(self.output_names)
        if rows.ndim != 1 + len(names):
            raise DimensionError(f"rows of dimension {rows.ndim} for outputs {names}")
        for i in range(rows.shape[0]):
            _check_mass(rows[i], SUM_TOL * 10)
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "output_names", names)

    @property
    def input_alphabet(self) -> int:
        return self.rows.shape[0]

    @property
    def output_variables(self) -> list[tuple[str, int]]:
        return list(zip(self.output_names, self.rows.shape[1:]))

    def row(self, symbol: int) -> FiniteDistribution:
        return FiniteDistribution(self.rows[symbol])

    def apply(self, p: FiniteDistribution, input_name: str = "X") -> JointDistribution:
        """Joint distribution of the input and the channel outputs."""
        if p.alphabet_size != self.input_alphabet:
            raise DimensionError(f"input of size {p.alphabet_size}, channel expects {self.input_alphabet}")
        arr = self.rows * p.mass.reshape((-1,) + (1,) * (self.rows.ndim - 1))
        return JointDistribution((input_name,) + self.output_names, arr)


def total_variation(p: JointDistribution, q: JointDistribution) -> float:
    """Half the L1 distance between two pmfs on the same variables."""
    if sorted(zip(p.names, p.sizes)) != sorted(zip(q.names, q.sizes)):
        raise DimensionError(f"variables differ: {p.variables} vs {q.variables}")
    qa = q.pmf if q.names == p.names else q.marginal_array(p.names)
    return float(min(1.0, 0.5 * np.abs(p.pmf - qa).sum()))


def _h(arr: np.ndarray) -> float:
    return float(entr(arr).sum() / _LN2)


def _clamp(value: float, what: str) -> float:
    if value < -CLAMP_TOL:
        raise NumericalError(f"{what} = {value:.3e} is negative beyond round-off")
    return max(value, 0.0)


def entropy(p: JointDistribution, subset: Names) -> float:
    """Shannon entropy of the marginal on ``subset``, in bits."""
    subset = _as_names(subset)
    if not subset:
        raise ArgumentError("entropy of an empty variable set")
    return _h(p.marginal_array(subset))


def _disjoint(*groups: tuple[str, ...]) -> None:
    seen: set[str] = set()
    for g in groups:
        if seen & set(g):
            raise ArgumentError(f"variable sets overlap: {groups}")
        seen |= set(g)


def mutual_information(p: JointDistribution, a: Names, b: Names) -> float:
    """I(A;B) = H(A) + H(B) - H(A,B), clamped at round-off."""
    a, b = _as_names(a), _as_names(b)
    if not a or not b:
        raise ArgumentError("mutual information needs two nonempty sets")
    _disjoint(a, b)
    value = entropy(p, a) + entropy(p, b) - entropy(p, a + b)
    return _clamp(value, f"I({a};{b})")


def conditional_mutual_information(p: JointDistribution, a: Names, b: Names, c: Names) -> float:
    """I(A;C|B), the deviation from the chain A - B - C.

    Note the argument order follows the chain: the conditioning set is the
    middle argument. An empty ``b`` gives I(A;C).
    """
    a, b, c = _as_names(a), _as_names(b), _as_names(c)
    if not a or not c:
        raise ArgumentError("conditional mutual information needs nonempty end sets")
    _disjoint(a, b, c)
    if not b:
        return mutual_information(p, a, c)
    value = entropy(p, a + b) + entropy(p, b + c) - entropy(p, b) - entropy(p, a + b + c)
    return _clamp(value, f"I({a};{c}|{b})")


def is_markov(p: JointDistribution, chain: tuple[Names, Names, Names], tol: float = CLAMP_TOL) -> tuple[bool, float]:
    a, b, c = chain
    dev = conditional_mutual_information(p, a, b, c)
    return dev <= tol, dev


def empirical_distribution(sequence: Sequence[int], alphabet_size: int | None = None) -> FiniteDistribution:
    seq = np.asarray(sequence, dtype=np.int64).reshape(-1)
    if seq.size == 0:
        raise ArgumentError("empirical distribution of an empty sequence")
    if seq.min() < 0:
        raise ArgumentError("negative symbol")
    k = int(seq.max()) + 1 if alphabet_size is None else alphabet_size
    if seq.max() >= k:
        raise ArgumentError(f"symbol {seq.max()} outside alphabet of size {k}")
    return FiniteDistribution(np.bincount(seq, minlength=k) / seq.size)


def product_extension(p: JointDistribution, n: int, size_guard: int = DEFAULT_GUARD) -> JointDistribution:
    """n-fold i.i.d. product with variables ``name_1, ..., name_n`` per block."""
    if n < 1:
        raise ArgumentError("n must be positive")
    required = p.pmf.size**n
    if required > size_guard:
        raise CapacityError(
            f"product extension needs {required} states, guard is {size_guard}",
            required=required,
            guard=size_guard,
        )
    if n == 1:
        return p
    arr = p.pmf
    for _ in range(n - 1):
        arr = np.multiply.outer(arr, p.pmf)
    names = [f"{name}_{t}" for t in range(1, n + 1) for name in p.names]
    return JointDistribution(names, arr, atol=1e-10)


def iid_block(p: JointDistribution, n: int, size_guard: int = DEFAULT_GUARD) -> JointDistribution:
    """n-fold product with each variable's block merged into ``name^n``.

    Block symbols are row-major over time: ``x^n -> sum_t x_t |X|^(n-t)``.
    """
    ext = product_extension(p, n, size_guard)
    if n == 1:
        return p.rename({name: f"{name}^1" for name in p.names})
    for name in p.names:
        ext = ext.group(f"{name}^{n}", [f"{name}_{t}" for t in range(1, n + 1)])
    return ext


def iid_vector(mass: np.ndarray, n: int) -> np.ndarray:
    """Flat pmf of ``n`` i.i.d. draws, row-major over time."""
    out = np.ones(1)
    for _ in range(n):
        out = np.multiply.outer(out, mass).reshape(-1)
    return out
