import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cascade_synthesis.errors import ArgumentError, ConstraintError
from cascade_synthesis.probcore import JointDistribution, entropy, mutual_information
from cascade_synthesis.regions import (
    AuxiliaryCoupling,
    CascadeCoupling,
    OptimizerConfig,
    RatePoint,
    cardinality_bounds,
    cascade_common_information,
    check_membership_D,
    general_cascade_rates,
    general_task_coupling,
    minimize_rates,
    point_in_region,
    rate_triple,
    scatter_relay_coupling,
    scatter_relay_region,
    scatter_summary,
    scatter_target,
    task_coupling,
    task_rates,
    task_region,
    task_target,
    triple_wyner,
    variation_rates,
    wyner_common_information,
)
from cascade_synthesis.regions.frontier import _in_upset

from oracles import grid_product_envelope

LOG3 = math.log2(3)


def h2(p):
    return 0.0 if p in (0, 1) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def random_target(seed, shape=(2, 2, 2)):
    rng = np.random.default_rng(seed)
    return JointDistribution(("X", "Y", "Z"), rng.dirichlet(np.ones(math.prod(shape))).reshape(shape))


def random_d_coupling(seed, cu=2, cv=2):
    """Product-of-conditionals coupling, in D by construction."""
    rng = np.random.default_rng(seed)
    p_uv = rng.dirichlet(np.ones(cu * cv)).reshape(cu, cv)
    wx = rng.dirichlet(np.ones(2), (cu, cv))
    wy = rng.dirichlet(np.ones(2), (cu, cv))
    wz = rng.dirichlet(np.ones(2), cv)
    arr = np.einsum("uv,uvx,uvy,vz->xyzuv", p_uv, wx, wy, wz)
    j = JointDistribution(("X", "Y", "Z", "U", "V"), arr)
    return AuxiliaryCoupling(j, j.marginal(("X", "Y", "Z")))


# -- rate points ----------------------------------------------------------------


def test_ratepoint_dominance_and_sums():
    a = RatePoint(1.0, (2.0, 1.0))
    b = RatePoint(1.0, (1.5, 1.0), sums={"R1+R0": 3.2})
    assert a.dominates(b) and not b.dominates(a)
    assert a.component_sum("R1+R0") == 3.0
    assert not a.satisfies(b)  # sum floor 3.2 violated
    assert RatePoint(1.2, (2.0, 1.0)).satisfies(b)


def test_ratepoint_rejects_negative():
    with pytest.raises(ArgumentError):
        RatePoint(-0.1, (0.0, 0.0))


# -- couplings ----------------------------------------------------------------------


def test_marginal_mismatch_is_constraint_error():
    c = random_d_coupling(0)
    with pytest.raises(ConstraintError):
        AuxiliaryCoupling(c.joint, random_target(1))


def test_cardinality_bounds():
    assert cardinality_bounds(2, 2, 2) == (2 * 2 * 2 * 11 + 3, 11)
    assert cardinality_bounds(2, 2, 2, card_v=4, u_slack=2) == (34, 11)


@pytest.mark.parametrize("seed", range(5))
def test_factorized_couplings_are_in_D(seed):
    rep = check_membership_D(random_d_coupling(seed))
    assert rep.in_D
    assert rep.chain1_dev < 1e-12 and rep.chain2_dev < 1e-12


def test_non_factorized_coupling_fails_D():
    # Z depends on U given V
    arr = np.zeros((2, 2, 2, 2, 1))
    for u in range(2):
        arr[0, 0, u, u, 0] = 0.5
    j = JointDistribution(("X", "Y", "Z", "U", "V"), arr)
    rep = check_membership_D(AuxiliaryCoupling(j, j.marginal(("X", "Y", "Z"))))
    assert not rep.in_D
    assert rep.chain2_dev == pytest.approx(1.0)


def test_outputs_coupling_rates_are_direct_information_terms():
    q = random_target(3)
    aux = AuxiliaryCoupling.outputs_as_auxiliaries(q)
    rt = rate_triple(aux)
    assert rt.r0 == pytest.approx(entropy(q, ("Y", "Z")), abs=1e-12)
    assert rt.r[0] == pytest.approx(mutual_information(q, "X", ("Y", "Z")), abs=1e-12)
    assert rt.r[1] == pytest.approx(mutual_information(q, "X", "Z"), abs=1e-12)
    assert check_membership_D(aux).in_D


def test_task_m3_rates():
    rt = rate_triple(task_coupling(3, 2, 1))
    assert rt.r0 == pytest.approx(LOG3 + 1, abs=1e-12)
    assert rt.r == pytest.approx((LOG3, LOG3 - 1), abs=1e-12)


@pytest.mark.parametrize("m,a,b", [(4, 2, 1), (4, 3, 1), (4, 3, 2), (5, 3, 1), (5, 4, 2), (6, 4, 2)])
def test_task_coupling_matches_closed_form(m, a, b):
    """Information terms of the subset coupling equal the region formula."""
    aux = task_coupling(m, a, b)
    assert check_membership_D(aux).in_D
    assert aux.marginal_deviation < 1e-12
    np.testing.assert_allclose(rate_triple(aux).as_vector(), task_rates(m, a, b).as_vector(), atol=1e-10)
    np.testing.assert_allclose(
        task_rates(m, a, b).as_vector(),
        [math.log2(m * (m - 1) * (m - 2) / ((a - b) * b * (m - a))), math.log2(m / (a - b)), math.log2(m / a)],
    )


def test_theorem2_variations_at_task_target():
    aux = task_coupling(3, 2, 1)
    inner = variation_rates(aux, "thm2_inner")
    outer = variation_rates(aux, "thm2_outer")
    assert inner.r0 == pytest.approx(LOG3, abs=1e-12)
    assert rate_triple(aux).r0 - inner.r0 == pytest.approx(1.0, abs=1e-12)
    assert inner.r == outer.r
    assert inner.sums["R1+R0"] == pytest.approx(outer.sums["R1+R0"] + inner.r[1])
    thm3 = variation_rates(aux, "thm3")
    assert thm3.r0 <= rate_triple(aux).r0 + 1e-12


def test_variation_type_errors():
    with pytest.raises(ArgumentError):
        variation_rates(task_coupling(3, 2, 1), "thm4_relay")
    with pytest.raises(ArgumentError):
        variation_rates(scatter_relay_coupling(2, 1), "thm3")


@pytest.mark.parametrize("m,a", [(2, 1), (4, 1), (4, 2), (5, 3)])
def test_scatter_relay_rates(m, a):
    c = scatter_relay_coupling(m, a)
    assert c.chain_deviation < 1e-12
    r = variation_rates(c, "thm4_relay")
    assert r.r == pytest.approx((math.log2(m / a), math.log2(m / (m - a))), abs=1e-12)


def test_relay_chain_violation():
    q = scatter_target(3)
    arr = np.zeros((3, 3, 1))
    arr[:, :, 0] = q.pmf
    c = scatter_relay_coupling(3, 1).__class__(JointDistribution(("X", "Z", "U"), arr), q)
    with pytest.raises(ConstraintError):
        variation_rates(c, "thm4_relay")


def test_general_task_coupling_rates():
    c = general_task_coupling(4, (1, 2, 3))
    r = general_cascade_rates(c)
    assert r.r0 == pytest.approx(math.log2(24), abs=1e-12)
    assert r.r == pytest.approx((2.0, 1.0, math.log2(4 / 3)), abs=1e-12)


def test_three_node_cascade_coupling_agrees():
    aux = task_coupling(4, 3, 1)
    r = general_cascade_rates(CascadeCoupling.from_three_node(aux))
    np.testing.assert_allclose(r.as_vector(), rate_triple(aux).as_vector(), atol=1e-12)


# -- frontiers --------------------------------------------------------------------


def test_task_region_m3_single_corner():
    f = task_region(3)
    assert len(f.corners) == 1
    np.testing.assert_allclose(f.corners[0].vector, [LOG3 + 1, LOG3, LOG3 - 1], atol=1e-12)


@pytest.mark.parametrize("m", [4, 5, 8, 12])
def test_task_region_corner_count_and_hull(m):
    f = task_region(m)
    assert len(f.corners) == (m - 1) * (m - 2) // 2
    nd = set(f.nondominated())
    assert set(f.vertices) <= nd
    for i in f.vertices:  # every vertex lies on the boundary: on some facet
        v = f.matrix[i]
        assert min(abs(float(n @ v + o)) for n, o in f.facets) < 1e-9


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_facets_agree_with_upset_lp(seed):
    f = task_region(7)
    rng = np.random.default_rng(seed)
    lo, hi = f.matrix.min(axis=0), f.matrix.max(axis=0)
    p = lo + rng.random(3) * (hi - lo)
    by_facets = all(float(n @ p + o) <= 1e-9 for n, o in f.facets)
    assert by_facets == _in_upset(p, f.matrix)


def test_point_in_region():
    f = task_region(5)
    c = f.corners[0].point
    assert point_in_region(c, f)
    assert point_in_region(RatePoint(c.r0 + 1, (c.r[0] + 1, c.r[1])), f)
    assert not point_in_region(RatePoint(0.0, (0.0, 0.0)), f)
    mid = 0.5 * (f.matrix[f.vertices[0]] + f.matrix[f.vertices[-1]])
    assert point_in_region(RatePoint(mid[0], tuple(mid[1:])), f)


@pytest.mark.parametrize("m", [2, 4, 6, 8])
def test_scatter_even_min_sum_is_two(m):
    s = scatter_summary(m)
    assert s["min_sum_rate"] == pytest.approx(2.0, abs=1e-12)
    assert s["gap_at_a_m_minus_1"] == pytest.approx(math.log2(m - 1), abs=1e-12)


def test_scatter_odd_min_sum_above_two():
    assert scatter_summary(5)["min_sum_rate"] > 2.0


def test_frontier_csv_format():
    text = task_region(3).to_csv()
    lines = text.split("\r\n")
    assert lines[0] == "generator,R0,R1,R2"
    assert lines[1].startswith("a=2;b=1,2.58496250072,")
    assert text.endswith("\r\n")


def test_argmin_first_in_enumeration_order():
    assert task_region(100).argmin(0).generator == "a=66;b=33"


def test_scatter_region_corners():
    f = scatter_relay_region(4)
    assert f.find("a=2").point.r == (1.0, 1.0)


# -- search -----------------------------------------------------------------------


FAST = OptimizerConfig(seed=0)


@pytest.mark.parametrize("p", [0.05, 0.1, 0.25])
def test_wyner_dsbs_closed_form(p):
    """Wyner's closed form for the doubly symmetric binary source."""
    q = JointDistribution(("X", "Y"), np.array([[1 - p, p], [p, 1 - p]]) / 2)
    a0 = (1 - math.sqrt(1 - 2 * p)) / 2
    expect = 1 + h2(p) - 2 * h2(a0)
    assert wyner_common_information(q, cfg=FAST) == pytest.approx(expect, abs=1e-6)


@pytest.mark.parametrize("seed", range(3))
def test_triple_wyner_against_grid_oracle(seed):
    q = random_target(100 + seed)
    tw = triple_wyner(q, cfg=FAST)
    ref = grid_product_envelope(q.pmf)
    assert tw <= ref + 1e-9  # the grid restricts atoms, so the oracle is an upper bound
    assert ref - tw < 2e-3


@pytest.mark.parametrize("seed", range(3))
def test_weighted_link_rates_closed_form(seed):
    """min R1 + R2 over D is I(X;YZ) + I(X;Z), attained by (U,V) = (Y,Z)."""
    q = random_target(200 + seed)
    aux, r = minimize_rates(q, (0.0, 1.0, 1.0), cfg=FAST)
    expect = mutual_information(q, "X", ("Y", "Z")) + mutual_information(q, "X", "Z")
    assert r.r[0] + r.r[1] == pytest.approx(expect, abs=1e-6)
    assert check_membership_D(aux).in_D


def test_independent_source_reduces_to_wyner():
    p = 0.1
    yz = np.array([[1 - p, p], [p, 1 - p]]) / 2
    q = JointDistribution(("X", "Y", "Z"), 0.5 * np.stack([yz, yz]))
    c = wyner_common_information(JointDistribution(("X", "Y"), yz), cfg=FAST)
    assert cascade_common_information(q, cfg=FAST) == pytest.approx(c, abs=1e-6)


def test_prime_search_returns_functional_v():
    q = random_target(7)
    aux, r = minimize_rates(q, (1.0, 0.5, 0.5), restrict_to_Dprime=True, cfg=FAST)
    rep = check_membership_D(aux)
    assert rep.in_D_prime
    assert rep.v_given_u_entropy < 1e-6
    _, r_d = minimize_rates(q, (1.0, 0.5, 0.5), cfg=FAST)
    w = np.array([1.0, 0.5, 0.5])
    assert float(w @ r.as_vector()) == pytest.approx(float(w @ r_d.as_vector()), abs=5e-3)


def test_search_is_deterministic():
    q = random_target(9)
    a = minimize_rates(q, (1.0, 0.0, 0.0), cfg=OptimizerConfig(seed=3))[1]
    b = minimize_rates(q, (1.0, 0.0, 0.0), cfg=OptimizerConfig(seed=3))[1]
    assert a == b


def test_task_m3_optimizer_meets_closed_form():
    """The optimizer cannot beat the best corner of the m=3 task region."""
    _, r = minimize_rates(task_target(3), (1.0, 0.0, 0.0), cfg=FAST)
    assert r.r0 == pytest.approx(LOG3 + 1, abs=1e-5)
