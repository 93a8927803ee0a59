import itertools
import math
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relaynet.capacity import (CapError, achievable_rate, cut_conditional_entropy, cutset_bound, expected_rank,
                               linear_capacity, min_cut_entropy, simplex_grid)
from relaynet.catalog import diamond_erasure_general, diamond_general, diamond_linear, bridge
from relaynet.cuts import enumerate_cuts, make_cut
from relaynet.field import field_create, field_from_order
from relaynet.network import GENERAL, ChannelTable, Network, StateModel, linear_network

GF2 = field_create(2)


def brute_cut_entropy(net, members, pmfs):
    """H(Y_receivers | X outside U, S) by summing over every (x, s) with plain dictionaries."""
    tx = net.transmitters()
    receivers = [v for v in net.nodes if v not in members and any(u in members for u in net.input_neighbors(v))]
    state_sizes = net.state_model.alphabet_sizes()
    if net.state_model.kind == "iid":
        states = [(s, math.prod(net.state_model.pmfs[i][si] for i, si in enumerate(s)))
                  for s in itertools.product(*[range(k) for k in state_sizes])]
    else:
        states = list(net.state_model.joint)
    joint, cond = defaultdict(float), defaultdict(float)
    for xs in itertools.product(*[range(net.input_size(u)) for u in tx]):
        px = math.prod(pmfs[u][x] for u, x in zip(tx, xs))
        xd = dict(zip(tx, xs))
        for s, ps in states:
            w = px * ps
            if w == 0:
                continue
            y = tuple(int(net.observe(v, xd, np.array(s))) for v in receivers)
            c = (tuple(xd[u] for u in tx if u not in members), tuple(s))
            joint[(y, c)] += w
            cond[c] += w

    def h(d):
        return -sum(p * math.log2(p) for p in d.values() if p > 0)

    return h(joint) - h(cond)


def brute_expected_rank(net, cut):
    cross = [i for i, (u, v) in enumerate(net.edges) if u in cut.members and v not in cut.members]
    total = 0.0
    for vals in itertools.product(*[range(len(net.state_model.pmfs[i])) for i in cross]):
        p = math.prod(net.state_model.pmfs[i][v] for i, v in zip(cross, vals))
        rows = np.zeros((len(cut.receivers), len(cut.senders)), dtype=np.int64)
        for i, v in zip(cross, vals):
            u, w = net.edges[i]
            rows[cut.receivers.index(w), cut.senders.index(u)] = v
        # rank via row-space enumeration
        space = {tuple(net.field.sum(net.field.mul(np.array(c)[:, None], rows), axis=0).tolist())
                 for c in itertools.product(range(net.field.q), repeat=rows.shape[0])} if rows.size else {()}
        total += p * round(math.log(len(space), net.field.q))
    return total


def test_expected_rank_fig1():
    net = bridge()
    cut = make_cut(net, {1, 2}, 4)
    assert expected_rank(net, cut).value == 1.125
    assert brute_expected_rank(net, cut) == 1.125


def test_expected_rank_simple_links():
    link = linear_network(2, {(1, 2): (0.3, 0.7)}, [2], GF2)
    c = make_cut(link, {1}, 2)
    assert expected_rank(link, c).value == pytest.approx(0.7, abs=1e-15)
    ident = linear_network(2, {(1, 2): (0.0, 1.0)}, [2], GF2)
    assert expected_rank(ident, make_cut(ident, {1}, 2)).value == 1.0
    with pytest.raises(ValueError):
        expected_rank(link, c, "montecarlo", samples=0)


def test_capacity_examples():
    link = linear_network(2, {(1, 2): (0.25, 0.75)}, [2], GF2)
    assert linear_capacity(link).value == pytest.approx(0.75, abs=1e-12)
    gf3 = linear_network(2, {(1, 2): (0.0, 0.5, 0.5)}, [2], field_create(3))
    assert linear_capacity(gf3).value == pytest.approx(math.log2(3), abs=1e-12)
    dead = linear_network(4, {e: (1.0, 0.0) for e in bridge().edges}, [4], GF2)
    rep = linear_capacity(dead)
    assert rep.value == 0.0
    assert [c.label for c in rep.argmin[4]] == [c.label for c in enumerate_cuts(dead, 4)]


def test_capacity_fig1_certificate():
    rep = linear_capacity(bridge())
    assert rep.value == 0.75
    assert [c.label for c in rep.argmin[4]] == ["{1}", "{1,2,3}"]
    assert rep.mincut.label == "{1}"


def test_exact_support_cap():
    edges = {(1, v): np.full(256, 1 / 256) for v in range(2, 5)}
    edges.update({(v, 5): np.full(256, 1 / 256) for v in range(2, 5)})
    net = linear_network(5, edges, [5], field_create(2, 8))
    with pytest.raises(CapError):
        expected_rank(net, make_cut(net, {1, 2, 3}, 5))


def test_montecarlo_deterministic_across_workers():
    net = bridge()
    cut = make_cut(net, {1, 2}, 4)
    a = expected_rank(net, cut, "montecarlo", samples=10_000, seed=5, workers=1)
    b = expected_rank(net, cut, "montecarlo", samples=10_000, seed=5, workers=4)
    assert a == b
    assert abs(a.value - 1.125) < 0.05


def test_cut_entropy_examples():
    ident = linear_network(2, {(1, 2): (0.0, 1.0)}, [2], GF2)
    assert cut_conditional_entropy(ident, make_cut(ident, {1}, 2)) == pytest.approx(1.0)
    link = linear_network(2, {(1, 2): (0.25, 0.75)}, [2], GF2)
    assert cut_conditional_entropy(link, make_cut(link, {1}, 2)) == pytest.approx(0.75, abs=1e-12)
    assert cut_conditional_entropy(bridge(), make_cut(bridge(), {1, 2}, 4)) == pytest.approx(1.125, abs=1e-12)


def random_linear(rng, q, n_nodes):
    pairs = [(u, v) for u in range(1, n_nodes + 1) for v in range(2, n_nodes + 1) if u != v]
    keep = {e for e in pairs if rng.random() < 0.45} | {(1, n_nodes)}
    return linear_network(n_nodes, {e: rng.dirichlet(np.ones(q)) for e in keep}, [n_nodes], field_from_order(q))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([(2, 3), (2, 4), (3, 3)]), st.integers(0, 2**31))
def test_cut_entropy_matches_brute_force_oracle(shape, seed):
    q, n_nodes = shape
    rng = np.random.default_rng(seed)
    net = random_linear(rng, q, n_nodes)
    pmfs = {u: rng.dirichlet(np.ones(q)) for u in net.transmitters()}
    for cut in enumerate_cuts(net, n_nodes):
        got = cut_conditional_entropy(net, cut, pmfs)
        assert got == pytest.approx(brute_cut_entropy(net, cut.members, pmfs), abs=1e-9)


def test_cut_entropy_general_mode_matches_oracle():
    for net in (diamond_general(), diamond_erasure_general(0.3)):
        pmfs = {u: np.linspace(1, 2, net.input_size(u)) / np.linspace(1, 2, net.input_size(u)).sum()
                for u in net.transmitters()}
        for cut in enumerate_cuts(net, 4):
            assert cut_conditional_entropy(net, cut, pmfs) == pytest.approx(
                brute_cut_entropy(net, cut.members, pmfs), abs=1e-12)


def test_joint_state_model_entropy():
    edges = [(1, 2), (1, 3), (2, 4), (3, 4)]
    base = diamond_erasure_general()
    sm = StateModel.from_joint(edges, [((1, 1, 1, 1), 0.5), ((0, 1, 0, 1), 0.3), ((1, 0, 1, 0), 0.2)])
    net = Network(4, tuple(edges), (4,), GENERAL, sm, alphabets=base.alphabets, tables=base.tables).check()
    pmfs = {u: np.full(2, 0.5) for u in net.transmitters()}
    for cut in enumerate_cuts(net, 4):
        assert cut_conditional_entropy(net, cut, pmfs) == pytest.approx(
            brute_cut_entropy(net, cut.members, pmfs), abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(0, 2**31))
def test_rank_entropy_identity(q, seed):
    net = random_linear(np.random.default_rng(seed), q, 4)
    for cut in enumerate_cuts(net, 4):
        bits = expected_rank(net, cut).value * math.log2(q)
        assert cut_conditional_entropy(net, cut) == pytest.approx(bits, abs=1e-9)


def test_rates_on_identity_and_constant_channels():
    ident = linear_network(2, {(1, 2): (0.0, 1.0)}, [2], GF2)
    r = achievable_rate(ident, 4)
    assert r.value == pytest.approx(1.0)
    assert np.allclose(r.distribution[1], [0.5, 0.5])
    assert cutset_bound(ident, 4).value == pytest.approx(1.0)
    sm = StateModel.iid({(1, 2): (1.0,)})
    const = Network(2, sm.edges, (2,), GENERAL, sm, alphabets={1: (2, 1), 2: (1, 2)},
                    tables={2: ChannelTable.from_function(2, (2,), (1,), 2, lambda x, s: 0)}).check()
    assert achievable_rate(const, 4).value == 0.0


def test_linear_rate_equals_capacity():
    for net in (bridge(), diamond_linear()):
        cap = linear_capacity(net).value
        assert min_cut_entropy(net)[0] == pytest.approx(cap, abs=1e-12)
        assert achievable_rate(net, 4).value == pytest.approx(cap, abs=1e-9)
        assert cutset_bound(net, 4).value == pytest.approx(cap, abs=1e-9)


def test_refinement_and_finer_grids_never_decrease():
    net = diamond_erasure_general(0.3)
    base = achievable_rate(net, 2).value
    assert achievable_rate(net, 4).value >= base - 1e-12
    assert achievable_rate(net, 2, refine_rounds=2).value >= base - 1e-12


def test_cutset_dominates_rate_on_general_network():
    net = diamond_erasure_general(0.3)
    assert cutset_bound(net, 4).value >= achievable_rate(net, 4).value - 1e-12


def test_fewer_destinations_never_lowers_capacity():
    rng = np.random.default_rng(3)
    pairs = [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4), (3, 5), (4, 5)]
    net = linear_network(5, {e: rng.dirichlet(np.ones(2)) for e in pairs}, [4, 5], GF2)
    both = linear_capacity(net).value
    for d in (4, 5):
        assert linear_capacity(net.with_destinations([d])).value >= both - 1e-12


def test_zero_coefficients_into_destination():
    pmfs = {e: (0.5, 0.5) for e in bridge().edges}
    pmfs[(2, 4)] = pmfs[(3, 4)] = (1.0, 0.0)
    assert linear_capacity(linear_network(4, pmfs, [4], GF2)).value == 0.0


def test_simplex_grid():
    g = simplex_grid(4, 3)
    assert g.shape == (15, 3)
    assert np.allclose(g.sum(axis=1), 1)
    with pytest.raises(ValueError):
        simplex_grid(0, 2)
