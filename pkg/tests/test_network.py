import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relaynet.catalog import cyclic4, diamond_general, diamond_linear, bridge
from relaynet.field import field_create, field_from_order
from relaynet.network import (LINEAR, ChannelTable, Network, NetworkError, NotLayered, StateModel, compute_layers,
                              erasure_to_linear, input_neighbors, linear_network, validate)

GF2 = field_create(2)


def test_validate_diamond_ok():
    assert validate(diamond_linear()) == []
    assert validate(diamond_general()) == []


def test_validate_self_loop_and_reachability():
    sm = StateModel.iid({(1, 2): (0, 1), (3, 3): (0, 1)})
    net = Network(3, sm.edges, (3,), LINEAR, sm, field=GF2)
    diags = validate(net)
    assert any("self-loop on node 3" in d for d in diags)
    assert any("destination 3 is unreachable" in d for d in diags)
    with pytest.raises(NetworkError):
        net.check()


def test_validate_reports_every_problem():
    sm = StateModel.iid({(1, 2): (0.5, 0.6)})
    net = Network(2, sm.edges, (1,), LINEAR, sm, field=GF2)
    diags = validate(net)
    assert any("source cannot be a destination" in d for d in diags)
    assert any("state pmf" in d for d in diags)


def test_linear_state_outside_field():
    sm = StateModel.iid({(1, 2): (0.0, 0.5, 0.5)})
    assert any("outside GF(2)" in d for d in validate(Network(2, sm.edges, (2,), LINEAR, sm, field=GF2)))


def test_layers_examples():
    lay = compute_layers(diamond_linear())
    assert lay.L == 2
    assert lay.layers == ((1,), (2, 3), (4,))
    single = linear_network(2, {(1, 2): (0, 1)}, [2], GF2)
    assert compute_layers(single).L == 1
    tri = linear_network(3, {(1, 2): (0, 1), (1, 3): (0, 1), (2, 3): (0, 1)}, [3], GF2)
    with pytest.raises(NotLayered) as exc:
        compute_layers(tri)
    assert exc.value.node == 3
    assert exc.value.lengths == (1, 2)


def test_cycles_are_not_layered():
    with pytest.raises(NotLayered):
        compute_layers(cyclic4())


def test_input_neighbors():
    assert input_neighbors(diamond_linear(), 4) == (2, 3)
    assert input_neighbors(diamond_linear(), 1) == ()
    assert input_neighbors(bridge(), 3) == (1, 2)
    with pytest.raises(KeyError):
        input_neighbors(bridge(), 9)


def test_erasure_to_linear():
    net = erasure_to_linear(2, {(1, 2): 0.25}, [2], GF2)
    assert net.state_model.pmfs == ((0.25, 0.75),)
    dead = erasure_to_linear(2, {(1, 2): 1.0}, [2], GF2)
    rng = np.random.default_rng(0)
    assert np.all(dead.state_model.sample(rng, 100) == 0)
    with pytest.raises(NetworkError):
        erasure_to_linear(2, {(1, 2): 1.5}, [2], GF2)
    f1 = erasure_to_linear(4, {e: 0.5 for e in bridge().edges}, [4], GF2)
    assert f1 == bridge()


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5, 8]), st.integers(0, 10_000))
def test_linear_observation_is_sum_of_scaled_inputs(q, seed):
    f = field_from_order(q)
    rng = np.random.default_rng(seed)
    net = linear_network(4, {e: np.full(q, 1.0 / q) for e in cyclic4().edges}, [4], f)
    s = net.state_model.sample(rng, 7)
    x = {u: rng.integers(0, q, size=7) for u in net.nodes}
    for v in net.nodes:
        want = np.zeros(7, dtype=np.int64)
        for u in net.input_neighbors(v):
            e = net.edge_index[(u, v)]
            for t in range(7):
                want[t] = f.add(want[t], f.mul(int(s[t, e]), int(x[u][t])))
        assert np.array_equal(net.observe(v, x, s), want)


def test_state_model_joint_marginal_and_sampling():
    edges = [(1, 2), (2, 3)]
    sm = StateModel.from_joint(edges, [((0, 0), 0.5), ((1, 1), 0.25), ((1, 0), 0.25)])
    assert sm.diagnostics() == []
    vals, probs = sm.marginal([0])
    assert vals.ravel().tolist() == [0, 1]
    assert probs.tolist() == [0.5, 0.5]
    draws = sm.sample(np.random.default_rng(1), 20_000)
    assert draws.shape == (20_000, 2)
    freq = np.mean((draws[:, 0] == 1) & (draws[:, 1] == 1))
    assert abs(freq - 0.25) < 0.02
    bad = StateModel.from_joint(edges, [((0, 0), 0.5), ((0, 0), 0.5)])
    assert any("twice" in d for d in bad.diagnostics())


def test_channel_table_holes_reported():
    lookup = np.array([[0], [-1]])
    t = ChannelTable(2, (2,), (1,), 2, lookup)
    assert any("no output for entry (1, 0)" in d for d in t.diagnostics())


def test_general_mode_table_dimensions_checked():
    net = diamond_general()
    tables = dict(net.tables)
    tables[4] = ChannelTable.from_function(4, (2, 2), (1, 1), 2, lambda x, s: x[0])
    broken = Network(4, net.edges, net.destinations, net.mode, net.state_model, alphabets=net.alphabets,
                     tables=tables)
    assert any("do not match" in d for d in validate(broken))
