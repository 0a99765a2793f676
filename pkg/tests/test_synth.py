import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cascade_synthesis.errors import ArgumentError, CapacityError, ConstraintError, DegeneratePosteriorError
from cascade_synthesis.probcore import JointDistribution
from cascade_synthesis.regions import AuxiliaryCoupling, CascadeCoupling, rate_triple, scatter_relay_coupling
from cascade_synthesis.regions.coupling import RelayCoupling
from cascade_synthesis.rng import stream
from cascade_synthesis.synth import (
    CascadeSystem,
    ExperimentReport,
    NestedCascadeSystem,
    eavesdropper_independence_test,
    general_cascade_exact,
    index_count,
    induced_distribution_exact,
    likelihood_encoder_posterior,
    markov_checks,
    relay_scheme_experiment,
    sample_cascade,
    sample_codebook,
    sample_nested_codebook,
    sample_single_layer,
    secrecy_tv,
    softcover_experiment,
    superposition_softcover_experiment,
    synthesis_tv,
    x_marginal_deviation,
)
from cascade_synthesis.synth.codebook import SuperpositionCodebook

from oracles import brute_induced_n1, brute_nested_n1, direct_posterior

NAMES = ("X", "Y", "Z", "U", "V")


def coupling_from(arr):
    j = JointDistribution(NAMES, arr)
    return AuxiliaryCoupling(j, j.marginal(("X", "Y", "Z")))


def random_coupling(seed, cu=2, cv=2, nx=2):
    rng = np.random.default_rng(seed)
    p_uv = rng.dirichlet(np.ones(cu * cv)).reshape(cu, cv)
    wx = rng.dirichlet(np.ones(nx), (cu, cv))
    wy = rng.dirichlet(np.ones(2), (cu, cv))
    wz = rng.dirichlet(np.ones(2), cv)
    return coupling_from(np.einsum("uv,uvx,uvy,vz->xyzuv", p_uv, wx, wy, wz))


def deterministic_coupling(spec):
    """X, Y, Z each a copy of U, of V, or an independent uniform bit ('N')."""
    arr = np.zeros((2,) * 5)
    for x, y, z, u, v in np.ndindex(arr.shape):
        src = {"u": u, "v": v}
        if all(s == "N" or val == src[s] for s, val in zip(spec, (x, y, z))):
            arr[x, y, z, u, v] = 1.0
    return coupling_from(arr / arr.sum())


def system(aux, n, rates, seed):
    return CascadeSystem(aux, sample_codebook(aux, n, rates, seed))


# -- rng and codebooks -------------------------------------------------------------


def test_streams_reproducible_and_distinct():
    a = stream(5, "codebook", 2, "layer1").random(4)
    assert np.array_equal(a, stream(5, "codebook", 2, "layer1").random(4))
    assert not np.array_equal(a, stream(5, "codebook", 2, "layer2").random(4))
    assert not np.array_equal(a, stream(6, "codebook", 2, "layer1").random(4))


def test_index_count_ceiling():
    assert index_count(math.log2(3), 1) == 3
    assert index_count(0.5, 2) == 2
    assert index_count(0.0, 7) == 1
    assert index_count(0.25, 1) == 2
    with pytest.raises(ArgumentError):
        index_count(-1.0, 1)


def test_codebook_reproducible():
    aux = random_coupling(0)
    a = sample_codebook(aux, 3, (1, 1, 0.5), 11)
    b = sample_codebook(aux, 3, (1, 1, 0.5), 11)
    c = sample_codebook(aux, 3, (1, 1, 0.5), 12)
    assert np.array_equal(a.u_words, b.u_words) and np.array_equal(a.v_words, b.v_words)
    assert not (np.array_equal(a.u_words, c.u_words) and np.array_equal(a.v_words, c.v_words))
    assert not a.u_words.flags.writeable


def test_zero_rates_single_pair():
    cb = sample_codebook(random_coupling(1), 4, (0, 0, 0), 0)
    assert cb.sizes == (1, 1, 1)
    assert cb.u_words.shape == (1, 1, 1, 4) and cb.v_words.shape == (1, 1, 4)


def test_point_mass_v_gives_constant_words():
    arr = np.zeros((2, 2, 2, 2, 2))
    arr[:, :, :, :, 1] = 1.0 / 16
    cb = sample_codebook(coupling_from(arr), 3, (2, 1, 1), 0)
    assert np.all(cb.v_words == 1)


def test_codebook_guard_and_rate_order():
    aux = random_coupling(2)
    with pytest.raises(CapacityError):
        sample_codebook(aux, 8, (3, 3, 1), 0, guard=10_000)
    with pytest.raises(ArgumentError):
        sample_codebook(aux, 2, (1, 0.5, 1.0), 0)


def test_u_words_follow_parent_v():
    """U words are drawn through Q_U|V; with U = V they copy their parent."""
    arr = np.zeros((2, 2, 2, 2, 2))
    for u in range(2):
        arr[:, :, :, u, u] = 1.0 / 16
    cb = sample_codebook(coupling_from(arr), 5, (0, 2, 1), 3)
    assert np.array_equal(cb.u_words, np.broadcast_to(cb.v_words, cb.u_words.shape))


# -- likelihood encoder ---------------------------------------------------------------


def test_posterior_point_mass_for_identity_channel():
    aux = deterministic_coupling("uNv")
    u = np.array([0, 1, 1, 0]).reshape(4, 1, 1, 1)
    v = np.zeros((1, 1, 1), int)
    cb = SuperpositionCodebook(1, (0, 2, 0), (1, 4, 1), v, u, 0)
    sys_ = CascadeSystem(aux, cb)
    u2 = np.array([[0, 0], [0, 1], [1, 0], [1, 1]]).reshape(4, 1, 1, 2)
    cb2 = SuperpositionCodebook(2, (0, 1, 0), (1, 4, 1), np.zeros((1, 1, 2), int), u2, 0)
    post = likelihood_encoder_posterior([1, 0], 0, CascadeSystem(aux, cb2))
    np.testing.assert_array_equal(post.mass, [0, 0, 1, 0])
    assert likelihood_encoder_posterior([1], 0, sys_).mass.sum() == pytest.approx(1.0)


def test_posterior_uniform_when_x_independent():
    aux = deterministic_coupling("Nuv")
    post = likelihood_encoder_posterior([0, 1], 1, system(aux, 2, (1.5, 1.5, 0.5), 4))
    np.testing.assert_allclose(post.mass, np.full(post.mass.size, 1 / post.mass.size))


def test_posterior_degenerate_raises():
    aux = deterministic_coupling("uNv")
    cb = SuperpositionCodebook(1, (0, 0, 0), (1, 1, 1), np.zeros((1, 1, 1), int), np.zeros((1, 1, 1, 1), int), 0)
    with pytest.raises(DegeneratePosteriorError):
        likelihood_encoder_posterior([1], 0, CascadeSystem(aux, cb))
    ind = induced_distribution_exact(CascadeSystem(aux, cb))
    assert ind.degenerate == 1
    assert x_marginal_deviation(ind, [0.5, 0.5]) < 1e-15


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_posterior_matches_direct_normalization(seed):
    aux = random_coupling(seed % 1000, cu=2, cv=3)
    sys_ = system(aux, 2, (1.0, 1.5, 0.5), seed)
    cb = sys_.codebook
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 2, 2)
    k = int(rng.integers(cb.n_k))
    ref = direct_posterior(x, k, cb.u_words, cb.v_words, aux.joint.pmf)
    got = likelihood_encoder_posterior(x, k, sys_).mass
    np.testing.assert_allclose(got, ref.reshape(-1), atol=1e-12)


def test_posterior_log_space_long_block():
    """At n = 200 products of probabilities underflow; log-space normalization does not."""
    aux = random_coupling(3)
    sys_ = system(aux, 200, (0.0, 0.01, 0.005), 0)
    x = np.random.default_rng(0).integers(0, 2, 200)
    post = likelihood_encoder_posterior(x, 0, sys_).mass
    assert np.isfinite(post).all() and post.sum() == pytest.approx(1.0)


# -- exact induced distributions ------------------------------------------------------


@pytest.mark.parametrize("seed", range(4))
def test_induced_matches_brute_force_n1(seed):
    aux = random_coupling(seed, cu=2, cv=2)
    sys_ = system(aux, 1, (1.2, 1.3, 0.7), seed)
    cb = sys_.codebook
    ref = brute_induced_n1(aux.joint.pmf, cb.u_words[..., 0], cb.v_words[..., 0], *cb.sizes)
    got = induced_distribution_exact(sys_).joint.pmf
    assert 0.5 * np.abs(got - ref).sum() < 1e-12


@pytest.mark.parametrize("n", [1, 2])
def test_structural_properties(n):
    aux = random_coupling(10 + n, cu=3, cv=2)
    ind = induced_distribution_exact(system(aux, n, (1.0, 1.0, 0.5), 1))
    assert ind.joint.pmf.sum() == pytest.approx(1.0, abs=1e-12)
    assert x_marginal_deviation(ind, aux.joint.marginal_array("X")) < 1e-12
    assert max(markov_checks(ind).values()) < 1e-9


def test_zero_rate_point_mass_channels_are_deterministic():
    arr = np.zeros((2, 2, 2, 1, 1))
    arr[0, 1, 0, 0, 0] = 0.3
    arr[1, 1, 0, 0, 0] = 0.7
    aux = coupling_from(arr)
    ind = induced_distribution_exact(system(aux, 2, (0, 0, 0), 0))
    py = ind.joint.marginal_array("Y^2")
    pz = ind.joint.marginal_array("Z^2")
    assert py[3] == pytest.approx(1.0) and pz[0] == pytest.approx(1.0)


def test_secrecy_zero_for_independent_target():
    arr = np.full((2, 2, 2, 1, 1), 1 / 8)
    aux = coupling_from(arr)
    for n in (1, 2, 3):
        assert secrecy_tv(induced_distribution_exact(system(aux, n, (0, 0, 0), 0)), aux.target) < 1e-12


def test_secrecy_positive_when_y_copies_message():
    aux = deterministic_coupling("NuN")
    u = np.array([0, 1]).reshape(2, 1, 1, 1)
    cb = SuperpositionCodebook(1, (0, 1, 0), (1, 2, 1), np.zeros((1, 1, 1), int), u, 0)
    ind = induced_distribution_exact(CascadeSystem(aux, cb))
    assert secrecy_tv(ind, aux.target) == pytest.approx(0.5, abs=1e-12)
    assert synthesis_tv(ind, aux.target) < 1e-12


@given(st.integers(0, 10_000), st.integers(1, 2))
@settings(max_examples=20, deadline=None)
def test_secrecy_dominates_synthesis(seed, n):
    aux = random_coupling(seed % 50)
    ind = induced_distribution_exact(system(aux, n, (0.7, 1.1, 0.4), seed))
    assert synthesis_tv(ind, aux.target) <= secrecy_tv(ind, aux.target) + 1e-12


@given(st.integers(0, 10_000))
@settings(max_examples=15, deadline=None)
def test_codebook_relabelling_invariance(seed):
    aux = random_coupling(seed % 50)
    cb = sample_codebook(aux, 2, (1.0, 1.5, 1.0), seed)
    rng = np.random.default_rng(seed)
    pa, pb, pk = rng.permutation(cb.n_a), rng.permutation(cb.n_b), rng.permutation(cb.n_k)
    u = cb.u_words[pa][:, pb][:, :, pk]
    v = cb.v_words[pb][:, pk]
    cb2 = SuperpositionCodebook(cb.n, cb.rates, cb.sizes, v, u, cb.seed)
    a = secrecy_tv(induced_distribution_exact(CascadeSystem(aux, cb)), aux.target)
    b = secrecy_tv(induced_distribution_exact(CascadeSystem(aux, cb2)), aux.target)
    assert a == pytest.approx(b, abs=1e-12)


def test_system_rejects_coupling_outside_D():
    arr = np.zeros((2, 2, 2, 2, 1))
    for u in range(2):
        arr[0, 0, u, u, 0] = 0.5
    aux = coupling_from(arr)
    cb = SuperpositionCodebook(1, (0, 0, 0), (1, 1, 1), np.zeros((1, 1, 1), int), np.zeros((1, 1, 1, 1), int), 0)
    with pytest.raises(ConstraintError):
        CascadeSystem(aux, cb)


def test_induced_guard():
    aux = random_coupling(0)
    with pytest.raises(CapacityError):
        induced_distribution_exact(system(aux, 3, (2, 2, 1), 0), size_guard=1000)


# -- m-node cascade --------------------------------------------------------------------


def test_nested_m3_equals_three_node():
    # the nested scheme needs V = phi(U); take U in [4], V = U // 2
    rng = np.random.default_rng(21)
    pu, wx, wy, wz = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(2), 4), rng.dirichlet(np.ones(2), 4), rng.dirichlet(np.ones(2), 2)
    arr = np.zeros((2, 2, 2, 4, 2))
    for u in range(4):
        arr[:, :, :, u, u // 2] = pu[u] * np.einsum("x,y,z->xyz", wx[u], wy[u], wz[u // 2])
    aux = coupling_from(arr)
    rates = (1.0, 1.5, 0.5)
    a = induced_distribution_exact(system(aux, 2, rates, 7)).joint.pmf
    nested = CascadeCoupling.from_three_node(aux)
    b = general_cascade_exact(NestedCascadeSystem(nested, sample_nested_codebook(nested, 2, rates, 7))).joint.pmf
    np.testing.assert_allclose(a, b, atol=1e-15)


def chain4(seed):
    """Binary channels on a nested chain U1 (8) -> U2 = U1 // 2 (4) -> U3 = U2 // 2 (2)."""
    rng = np.random.default_rng(seed)
    pu1 = rng.dirichlet(np.ones(8))
    wx = rng.dirichlet(np.ones(2), 8)
    w1 = rng.dirichlet(np.ones(2), 8)
    w2 = rng.dirichlet(np.ones(2), 4)
    w3 = rng.dirichlet(np.ones(2), 2)
    arr = np.zeros((2, 2, 2, 2, 8, 4, 2))
    for u1 in range(8):
        u2, u3 = u1 // 2, u1 // 4
        arr[:, :, :, :, u1, u2, u3] = np.einsum("x,a,b,c->xabc", wx[u1], w1[u1], w2[u2], w3[u3]) * pu1[u1]
    names = ("X", "Y1", "Y2", "Y3", "U1", "U2", "U3")
    return CascadeCoupling(JointDistribution(names, arr), 4)


@pytest.mark.parametrize("seed", range(3))
def test_nested_m4_matches_brute_force(seed):
    c = chain4(seed)
    assert max(c.constraint_deviations().values()) < 1e-12
    rates = (1.6, 2.0, 1.2, 0.6)
    cb = sample_nested_codebook(c, 1, rates, seed)
    ind = general_cascade_exact(NestedCascadeSystem(c, cb))
    ref = brute_nested_n1(c.joint.pmf, cb.words, cb.sizes)
    assert 0.5 * np.abs(ind.joint.pmf - ref).sum() < 1e-12
    # secrecy TV computed by hand from the oracle
    target = c.joint.marginal(("X", "Y1", "Y2", "Y3")).pmf
    p = ref.sum(axis=0)
    pm = p.sum(axis=(0, 1, 2, 3))
    by_hand = 0.5 * np.abs(p - target[..., None, None, None] * pm).sum()
    assert secrecy_tv(ind, c.joint.marginal(("X", "Y1", "Y2", "Y3"))) == pytest.approx(by_hand, abs=1e-12)


def test_nested_deterministic_downstream():
    c = chain4(0)
    arr = c.joint.pmf.sum(axis=(1, 2, 3))  # (X, U1, U2, U3)
    det = np.zeros(c.joint.pmf.shape)
    for x, u1, u2, u3 in np.ndindex(arr.shape):
        det[x, u1 % 2, u2 % 2, u3 % 2, u1, u2, u3] = arr[x, u1, u2, u3]
    cc = CascadeCoupling(JointDistribution(c.joint.names, det), 4)
    ind = general_cascade_exact(NestedCascadeSystem(cc, sample_nested_codebook(cc, 2, (0, 0, 0, 0), 0)))
    for name in ("Y1^2", "Y2^2", "Y3^2"):
        assert ind.joint.marginal_array(name).max() == pytest.approx(1.0)


# -- soft covering ---------------------------------------------------------------------


IDENTITY = JointDistribution(("U", "X"), np.eye(2) / 2)


def test_softcover_independent_channel_is_exact():
    q = JointDistribution(("U", "X"), np.outer([0.3, 0.7], [0.4, 0.6]))
    rep = softcover_experiment(q, 0.5, [1, 3, 5], 4, 0)
    assert max(r["tv"] for r in rep.records) < 1e-12


def test_softcover_uses_inner_layer_stream():
    words = sample_single_layer(np.array([0.5, 0.5]), 3, 5, 9)
    u = stream(9, "codebook", 3, "layer1").random((5, 3))
    np.testing.assert_array_equal(words, (u >= 0.5).astype(int))


def test_softcover_separation():
    hi = softcover_experiment(IDENTITY, 2.0, [2, 4, 6], 10, 0).means()
    lo = softcover_experiment(IDENTITY, 0.5, [2, 4, 6], 10, 0).means()
    assert np.all(np.diff(hi) < 0) and np.all(lo > 0.2)


def pair_coupling():
    arr = np.zeros((4, 2, 2))
    for u in range(2):
        for v in range(2):
            arr[2 * u + v, u, v] = 0.25
    return JointDistribution(("X", "U", "V"), arr)


def test_superposition_trend_and_bottleneck():
    j = pair_coupling()  # I(X;V) = 1, I(X;UV) = 2
    good = superposition_softcover_experiment(j, (1.25, 1.5), [2, 3, 4, 5], 20, 0).means()
    assert np.all(np.diff(good) < 0)
    starved = superposition_softcover_experiment(j, (2.5, 0.5), [2, 3, 4, 5], 20, 0).means()
    assert np.all(starved > 0.5)


@pytest.mark.parametrize("rates,ns", [((1.5, 0.5), [2, 4]), ((1.0, 1.0), [1, 2, 3]), ((2.0, 0.0), [2, 3])])
def test_superposition_collapses_to_single_layer(rates, ns):
    j = JointDistribution(("X", "U", "V"), np.eye(2)[:, :, None] / 2)
    a = superposition_softcover_experiment(j, rates, ns, 6, 2)
    b = softcover_experiment(IDENTITY, sum(rates), ns, 6, 2)
    assert [r["tv"] for r in a.records] == [r["tv"] for r in b.records]


# -- relay -----------------------------------------------------------------------------


def test_relay_independent_zero_rates():
    arr = np.einsum("x,z->xz", [0.3, 0.7], [0.6, 0.4])[:, :, None]
    j = JointDistribution(("X", "Z", "U"), arr)
    c = RelayCoupling(j, j.marginal(("X", "Z")))
    rep = relay_scheme_experiment(None, c, (0, 0), [1, 2, 3], 3, 0, common_rates=(0, 0))
    assert max(r["tv"] for r in rep.records) < 1e-12


def test_relay_scatter_trend_and_floor():
    c = scatter_relay_coupling(2, 1)
    above = relay_scheme_experiment(None, c, (1.25, 1.25), [2, 3, 4, 5, 6], 20, 0).means()
    assert np.all(np.diff(above) < 0)
    below = relay_scheme_experiment(None, c, (0.5, 1.25), [2, 3, 4, 5, 6], 20, 0).means()
    assert np.all(below > 0.5)


def test_relay_rejects_chain_violation():
    q = JointDistribution(("X", "Z"), np.array([[0.4, 0.1], [0.1, 0.4]]))
    c = RelayCoupling(JointDistribution(("X", "Z", "U"), q.pmf[:, :, None]), q)
    with pytest.raises(ConstraintError):
        relay_scheme_experiment(None, c, (1, 1), [1], 1, 0)


# -- eavesdropper ----------------------------------------------------------------------


def test_sampler_matches_exact_law():
    aux = random_coupling(4)
    sys_ = system(aux, 1, (1.0, 1.0, 0.5), 2)
    ind = induced_distribution_exact(sys_).joint.pmf
    s = sample_cascade(sys_, 100_000, 0)
    emp = np.zeros(ind.shape)
    np.add.at(emp, (s.k, s.x[:, 0], s.y[:, 0], s.z[:, 0], s.m_a, s.m_b), 1.0)
    emp /= emp.sum()
    # plug-in TV over ~100 cells at 1e5 samples is a few 1e-3
    assert 0.5 * np.abs(emp - ind).sum() < 0.02


def test_hash_messages_rejected():
    x = np.random.default_rng(0).integers(0, 2, (600, 5))
    msgs = (x @ (1 << np.arange(5))) % 5
    res = eavesdropper_independence_test(x, msgs, 0.05)
    assert res.reject and not res.inconclusive


def test_independent_messages_calibrated():
    rejections = 0
    for s in range(100):
        g = np.random.default_rng(s)
        res = eavesdropper_independence_test(g.integers(0, 3, (500, 1)), g.integers(0, 3, (500, 1)), 0.05)
        rejections += res.reject
    assert 0.0 <= rejections / 100 <= 0.12


def test_repeated_sample_inconclusive():
    res = eavesdropper_independence_test(np.zeros((10, 3)), np.zeros((10, 2)), 0.05)
    assert res.inconclusive and not res.reject


def test_independence_test_argument_errors():
    with pytest.raises(ArgumentError):
        eavesdropper_independence_test(np.zeros((1, 2)), np.zeros((1, 1)))
    with pytest.raises(ArgumentError):
        eavesdropper_independence_test(np.zeros((3, 2)), np.zeros((2, 1)))


# -- reports ---------------------------------------------------------------------------


def test_report_summary_and_serialization():
    rep = ExperimentReport("demo", {"a": 1})
    for s, v in zip(range(4), [0.4, 0.1, 0.3, 0.2]):
        rep.add(s, 2, tv=v)
    rep.add(0, 3, tv=0.05)
    (s2, s3) = rep.summary()
    assert s2["mean"] == pytest.approx(0.25)
    assert s2["stderr"] == pytest.approx(np.std([0.4, 0.1, 0.3, 0.2], ddof=1) / 2)
    assert s2["best_seed"] == 1 and s2["median_seed"] == 3
    assert s3["stderr"] == 0.0
    lines = rep.to_csv().split("\r\n")
    assert lines[0] == "seed,n,tv,kind,version,config"
    assert len([ln for ln in lines if ln]) == 6
    import json

    d = json.loads(rep.to_json())
    assert d["config"] == {"a": 1} and len(d["records"]) == 5 and "version" in d
