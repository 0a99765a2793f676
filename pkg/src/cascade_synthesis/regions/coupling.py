"""Auxiliary couplings and the rate bounds they certify."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from ..errors import ArgumentError, ConstraintError, DimensionError
from ..probcore import (
    JointDistribution,
    conditional_mutual_information,
    entropy,
    mutual_information,
    total_variation,
)

XYZ = ("X", "Y", "Z")
MARKOV_TOL = 1e-6


@dataclass(frozen=True)
class RatePoint:
    """Common-randomness rate ``r0`` and link rates ``r = (R1, ..., R_{m-1})``, in bits.

    ``sums`` holds extra sum-rate floors keyed like ``"R1+R0"``.
    """

    r0: float
    r: tuple[float, ...]
    sums: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        r = tuple(float(v) for v in self.r)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "r0", float(self.r0))
        if min((self.r0,) + r) < -1e-12:
            raise ArgumentError(f"negative rate in {self}")

    def as_vector(self) -> np.ndarray:
        return np.array((self.r0,) + self.r)

    def dominates(self, other: RatePoint, tol: float = 0.0) -> bool:
        return bool(np.all(self.as_vector() >= other.as_vector() - tol))

    def satisfies(self, floor: RatePoint, tol: float = 1e-12) -> bool:
        """True if these rates meet every bound of ``floor`` (sum bounds included)."""
        if not self.dominates(floor, tol):
            return False
        for key, bound in floor.sums.items():
            if self.component_sum(key) < bound - tol:
                return False
        return True

    def component_sum(self, key: str) -> float:
        total = 0.0
        for part in key.split("+"):
            part = part.strip()
            total += self.r0 if part == "R0" else self.r[int(part[1:]) - 1]
        return total


@dataclass(frozen=True)
class AuxiliaryCoupling:
    """A pmf over (X, Y, Z, U, V) together with the target Q_XYZ it must extend."""

    joint: JointDistribution
    target: JointDistribution
    marginal_tol: float = 1e-6

    def __post_init__(self) -> None:
        missing = {"X", "Y", "Z", "U", "V"} - set(self.joint.names)
        if missing:
            raise DimensionError(f"coupling lacks variables {sorted(missing)}")
        if set(self.target.names) != set(XYZ):
            raise DimensionError(f"target must be over X, Y, Z, got {self.target.names}")
        joint = self.joint.reorder(("X", "Y", "Z", "U", "V"))
        object.__setattr__(self, "joint", joint)
        object.__setattr__(self, "target", self.target.reorder(XYZ))
        dev = self.marginal_deviation
        if dev > self.marginal_tol:
            raise ConstraintError(f"(X,Y,Z) marginal is {dev:.3e} from the target", "marginal", dev)

    @property
    def marginal_deviation(self) -> float:
        return total_variation(self.joint.marginal(XYZ), self.target)

    @property
    def cards(self) -> tuple[int, int]:
        return self.joint.size_of("U"), self.joint.size_of("V")

    @classmethod
    def from_factors(cls, target, p_uv, x_given_uv, y_given_uv, z_given_v, marginal_tol=1e-6):
        """Assemble P_UV Q_X|UV Q_Y|UV Q_Z|V; arrays indexed ``[u, v]``, ``[u, v, x]``, ... ."""
        arr = np.einsum("uv,uvx,uvy,vz->xyzuv", p_uv, x_given_uv, y_given_uv, z_given_v)
        joint = JointDistribution(("X", "Y", "Z", "U", "V"), arr, atol=1e-9)
        return cls(joint, target, marginal_tol)

    @classmethod
    def outputs_as_auxiliaries(cls, target: JointDistribution) -> AuxiliaryCoupling:
        """The coupling (U, V) = (Y, Z)."""
        q = target.reorder(XYZ).pmf
        nx, ny, nz = q.shape
        arr = np.zeros((nx, ny, nz, ny, nz))
        for y, z in itertools.product(range(ny), range(nz)):
            arr[:, y, z, y, z] = q[:, y, z]
        return cls(JointDistribution(("X", "Y", "Z", "U", "V"), arr), target)


@dataclass(frozen=True)
class MembershipReport:
    marginal_ok: bool
    marginal_deviation: float
    chain1_dev: float  # I(X;Y|U,V)
    chain2_dev: float  # I(X,Y,U;Z|V)
    cardinality_ok: bool
    functional_VofU: bool
    v_given_u_entropy: float

    @property
    def in_D(self) -> bool:
        return self.marginal_ok and self.cardinality_ok and max(self.chain1_dev, self.chain2_dev) <= self._tol

    @property
    def in_D_prime(self) -> bool:
        return self.in_D and self.functional_VofU

    _tol: float = MARKOV_TOL


def cardinality_bounds(nx: int, ny: int, nz: int, card_v: int | None = None, u_slack: int = 3) -> tuple[int, int]:
    """(|U| bound, |V| bound) of the constraint set; ``u_slack`` is 3 by default (2 in the converse)."""
    v_bound = nx * ny * nz + 3
    v = v_bound if card_v is None else card_v
    return nx * ny * nz * v + u_slack, v_bound


def check_membership_D(aux: AuxiliaryCoupling, tol: float = MARKOV_TOL, u_slack: int = 3) -> MembershipReport:
    p = aux.joint
    nx, ny, nz = aux.target.sizes
    cu, cv = aux.cards
    u_bound, v_bound = cardinality_bounds(nx, ny, nz, cv, u_slack)
    hvu = max(0.0, entropy(p, ("U", "V")) - entropy(p, "U"))
    dev = aux.marginal_deviation
    return MembershipReport(
        marginal_ok=dev <= max(tol, aux.marginal_tol),
        marginal_deviation=dev,
        chain1_dev=conditional_mutual_information(p, "X", ("U", "V"), "Y"),
        chain2_dev=conditional_mutual_information(p, ("X", "Y", "U"), "V", "Z"),
        cardinality_ok=cu <= u_bound and cv <= v_bound,
        functional_VofU=hvu <= tol,
        v_given_u_entropy=hvu,
        _tol=tol,
    )


def rate_triple(aux: AuxiliaryCoupling) -> RatePoint:
    """Minimal (R0, R1, R2) certified by the coupling."""
    p = aux.joint
    return RatePoint(
        r0=mutual_information(p, XYZ, ("U", "V")),
        r=(mutual_information(p, "X", ("U", "V")), mutual_information(p, "X", "V")),
    )


def _require_D(aux: AuxiliaryCoupling, tol: float) -> None:
    rep = check_membership_D(aux, tol)
    if rep.chain1_dev > tol:
        raise ConstraintError(f"X-(U,V)-Y violated by {rep.chain1_dev:.3e}", "X-(U,V)-Y", rep.chain1_dev)
    if rep.chain2_dev > tol:
        raise ConstraintError(f"(X,Y,U)-V-Z violated by {rep.chain2_dev:.3e}", "(X,Y,U)-V-Z", rep.chain2_dev)


@dataclass(frozen=True)
class RelayCoupling:
    """A pmf over (X, Z, U) extending a target Q_XZ, for the relay cascade."""

    joint: JointDistribution
    target: JointDistribution

    def __post_init__(self) -> None:
        object.__setattr__(self, "joint", self.joint.reorder(("X", "Z", "U")))
        object.__setattr__(self, "target", self.target.reorder(("X", "Z")))
        dev = total_variation(self.joint.marginal(("X", "Z")), self.target)
        if dev > 1e-6:
            raise ConstraintError(f"(X,Z) marginal is {dev:.3e} from the target", "marginal", dev)

    @property
    def chain_deviation(self) -> float:
        return conditional_mutual_information(self.joint, "X", "U", "Z")


Variation = Literal["thm2_inner", "thm2_outer", "thm3", "thm4_relay"]


def variation_rates(aux: AuxiliaryCoupling | RelayCoupling, which: Variation, tol: float = MARKOV_TOL) -> RatePoint:
    """Rate floors of the relaxed-secrecy and relay regions at one coupling."""
    if which == "thm4_relay":
        if not isinstance(aux, RelayCoupling):
            raise ArgumentError("thm4_relay needs a RelayCoupling over (X, Z, U)")
        dev = aux.chain_deviation
        if dev > tol:
            raise ConstraintError(f"X-U-Z violated by {dev:.3e}", "X-U-Z", dev)
        nx, nz = aux.target.sizes
        if aux.joint.size_of("U") > nx + nz + 2:
            raise ConstraintError(f"|U| exceeds {nx + nz + 2}", "cardinality")
        p = aux.joint
        return RatePoint(0.0, (mutual_information(p, "X", "U"), mutual_information(p, "Z", "U")))

    if not isinstance(aux, AuxiliaryCoupling):
        raise ArgumentError(f"{which} needs an AuxiliaryCoupling")
    _require_D(aux, tol)
    p = aux.joint
    i_x_uv = mutual_information(p, "X", ("U", "V"))
    i_x_v = mutual_information(p, "X", "V")
    if which == "thm3":
        return RatePoint(mutual_information(p, XYZ, "U"), (mutual_information(p, "X", "U"), i_x_v))
    i_all_uv = mutual_information(p, XYZ, ("U", "V"))
    r0 = mutual_information(p, XYZ, "V")
    if which == "thm2_inner":
        return RatePoint(r0, (i_x_uv, i_x_v), {"R1+R0": i_all_uv + i_x_v})
    if which == "thm2_outer":
        return RatePoint(r0, (i_x_uv, i_x_v), {"R1+R0": i_all_uv})
    raise ArgumentError(f"unknown region {which!r}")


# -- arbitrary-length cascades ------------------------------------------------


@dataclass(frozen=True)
class CascadeCoupling:
    """A pmf over (X, Y1..Y_{m-1}, U1..U_{m-1}) for an m-node cascade."""

    joint: JointDistribution
    m: int

    def __post_init__(self) -> None:
        if self.m < 3:
            raise ArgumentError("a cascade has at least three nodes")
        names = self.names
        if set(names) != set(self.joint.names):
            raise DimensionError(f"expected variables {names}, got {self.joint.names}")
        object.__setattr__(self, "joint", self.joint.reorder(names))

    @property
    def names(self) -> tuple[str, ...]:
        k = self.m - 1
        return ("X",) + tuple(f"Y{i}" for i in range(1, k + 1)) + tuple(f"U{i}" for i in range(1, k + 1))

    def ys(self, lo: int = 1, hi: int | None = None) -> tuple[str, ...]:
        hi = self.m - 1 if hi is None else hi
        return tuple(f"Y{i}" for i in range(lo, hi + 1))

    def us(self, lo: int = 1, hi: int | None = None) -> tuple[str, ...]:
        hi = self.m - 1 if hi is None else hi
        return tuple(f"U{i}" for i in range(lo, hi + 1))

    def constraint_deviations(self) -> dict[str, float]:
        p, k = self.joint, self.m - 1
        devs = {f"X-U1^{k}-Y1": conditional_mutual_information(p, "X", self.us(), "Y1")}
        for j in range(1, k):
            lhs = ("X",) + self.ys(1, j) + self.us(1, j)
            devs[f"(X,Y1^{j},U1^{j})-U{j + 1}^{k}-Y{j + 1}"] = conditional_mutual_information(
                p, lhs, self.us(j + 1), f"Y{j + 1}"
            )
        for i in range(1, k + 1):
            devs[f"H(U{i}^{k}|U{i})"] = max(0.0, entropy(p, self.us(i)) - entropy(p, f"U{i}"))
        return devs

    @classmethod
    def from_three_node(cls, aux: AuxiliaryCoupling) -> CascadeCoupling:
        joint = aux.joint.rename({"Y": "Y1", "Z": "Y2", "U": "U1", "V": "U2"})
        return cls(joint, 3)


def general_cascade_rates(aux: CascadeCoupling, tol: float = MARKOV_TOL, check_functional: bool = True) -> RatePoint:
    """(R0, R1, ..., R_{m-1}) floors of the m-node region at one coupling."""
    for name, dev in aux.constraint_deviations().items():
        if name.startswith("H(") and not check_functional:
            continue
        if dev > tol:
            raise ConstraintError(f"{name} violated by {dev:.3e}", name, dev)
    p, k = aux.joint, aux.m - 1
    rates = tuple(mutual_information(p, "X", aux.us(i)) for i in range(1, k + 1))
    r0 = mutual_information(p, ("X",) + aux.ys(), aux.us())
    return RatePoint(r0, rates)


# -- worked examples ----------------------------------------------------------


def task_target(m: int) -> JointDistribution:
    """X uniform on [m]; (Y, Z) a uniformly random ordered pair of the other tasks."""
    if m < 3:
        raise ArgumentError("task assignment needs m >= 3")
    arr = np.zeros((m, m, m))
    for x, y, z in itertools.permutations(range(m), 3):
        arr[x, y, z] = 1.0
    return JointDistribution(XYZ, arr / arr.sum())


def task_coupling(m: int, a: int, b: int) -> AuxiliaryCoupling:
    """Uniform subset construction: V is a set of size ``a`` holding X and Y,
    U additionally fixes the size-``b`` subset holding Y."""
    if not (2 <= a <= m - 1 and 1 <= b <= a - 1):
        raise ArgumentError(f"need 2 <= a <= m-1 and 1 <= b <= a-1, got a={a}, b={b}")
    v_sets = list(itertools.combinations(range(m), a))
    pairs = [(vi, set(sy)) for vi, sv in enumerate(v_sets) for sy in itertools.combinations(sv, b)]
    arr = np.zeros((m, m, m, len(pairs), len(v_sets)))
    w = 1.0 / len(pairs)
    for ui, (vi, sy) in enumerate(pairs):
        sv = set(v_sets[vi])
        sx = sorted(sv - sy)
        sz = sorted(set(range(m)) - sv)
        cell = w / (len(sx) * len(sy) * len(sz))
        for x, y, z in itertools.product(sx, sorted(sy), sz):
            arr[x, y, z, ui, vi] = cell
    return AuxiliaryCoupling(JointDistribution(("X", "Y", "Z", "U", "V"), arr), task_target(m))


def task_rates(m: int, a: int, b: int) -> RatePoint:
    """Closed-form corner of the task-assignment region at (a, b)."""
    lg = math.log2
    return RatePoint(
        r0=lg(m * (m - 1) * (m - 2) / ((a - b) * b * (m - a))),
        r=(lg(m / (a - b)), lg(m / a)),
    )


def general_task_coupling(tasks: int, sizes: tuple[int, ...]) -> CascadeCoupling:
    """Nested-subset coupling for an m-node cascade, m = len(sizes) + 1.

    ``sizes = (a_1, ..., a_{m-1})`` with ``1 <= a_1 < ... < a_{m-1} < tasks``.
    U_j fixes the chain A_j subset ... subset A_{m-1}; X is uniform on A_1,
    Y_j uniform on A_{j+1} minus A_j (with A_m the full task set).
    """
    k = len(sizes)
    full = tuple(range(tasks))
    if k < 2 or sizes[0] < 1 or any(s >= t for s, t in zip(sizes, sizes[1:] + (tasks,))):
        raise ArgumentError(f"need 1 <= a_1 < ... < a_{k} < {tasks}, got {sizes}")

    # chains[j] lists (A_{j+1}, ..., A_k) tuples, j = 0 .. k-1 (0-based layer index)
    chains: list[list[tuple]] = [[] for _ in range(k)]
    chains[k - 1] = [(frozenset(s),) for s in itertools.combinations(full, sizes[k - 1])]
    for j in range(k - 2, -1, -1):
        chains[j] = [(frozenset(s),) + c for c in chains[j + 1] for s in itertools.combinations(sorted(c[0]), sizes[j])]
    index = [{c: i for i, c in enumerate(layer)} for layer in chains]

    shape = (tasks,) * (k + 1) + tuple(len(layer) for layer in chains)
    arr = np.zeros(shape)
    w = 1.0 / len(chains[0])
    for c in chains[0]:
        sets = list(c) + [frozenset(full)]
        x_sup = sorted(sets[0])
        y_sups = [sorted(sets[j + 1] - sets[j]) for j in range(k)]
        cell = w / (len(x_sup) * math.prod(len(s) for s in y_sups))
        u_idx = tuple(index[j][c[j:]] for j in range(k))
        for combo in itertools.product(x_sup, *y_sups):
            arr[combo + u_idx] = cell
    names = ("X",) + tuple(f"Y{i}" for i in range(1, k + 1)) + tuple(f"U{i}" for i in range(1, k + 1))
    return CascadeCoupling(JointDistribution(names, arr), k + 1)


def scatter_target(m: int) -> JointDistribution:
    """(X, Z) uniform over ordered pairs of distinct symbols in [m]."""
    if m < 2:
        raise ArgumentError("scatter channel needs m >= 2")
    arr = 1.0 - np.eye(m)
    return JointDistribution(("X", "Z"), arr / arr.sum())


def scatter_relay_coupling(m: int, a: int) -> RelayCoupling:
    """U is a size-``a`` set holding X, with Z outside it."""
    if not 1 <= a <= m - 1:
        raise ArgumentError(f"need 1 <= a <= m-1, got {a}")
    sets = list(itertools.combinations(range(m), a))
    arr = np.zeros((m, m, len(sets)))
    for ui, s in enumerate(sets):
        rest = [z for z in range(m) if z not in s]
        arr[np.ix_(list(s), rest, [ui])] = 1.0 / (len(sets) * a * (m - a))
    return RelayCoupling(JointDistribution(("X", "Z", "U"), arr), scatter_target(m))
