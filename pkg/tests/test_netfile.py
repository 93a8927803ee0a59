from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relaynet.catalog import CATALOG, bridge
from relaynet.field import field_from_order
from relaynet.netfile import NetworkFileError, load_network, parse_network, render_network
from relaynet.network import linear_network

BRIDGE_TEXT = """\
# sample network
field 2
nodes 4
source 1
destinations 4
mode linear
edge 1 2 state iid 0:0.5,1:0.5
edge 1 3 state iid 0:0.5,1:0.5
edge 2 3 state iid 0:0.5,1:0.5   # trailing comment
edge 2 4 state iid 0:0.5,1:0.5
edge 3 4 state iid 0:0.5,1:0.5
"""


def test_sample_file_parses_to_catalog_network():
    net = parse_network(BRIDGE_TEXT)
    assert len(net.edges) == 5
    assert net == bridge()


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_catalog_round_trip(name):
    net = CATALOG[name]()
    assert parse_network(render_network(net)) == net


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_shipped_files_match_catalog(name):
    path = Path(__file__).resolve().parents[1] / "networks" / f"{name}.net"
    assert load_network(path) == CATALOG[name]()


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 4, 5, 8]), st.integers(2, 6), st.integers(0, 2**31))
def test_random_linear_round_trip(q, n_nodes, seed):
    rng = np.random.default_rng(seed)
    pairs = [(u, v) for u in range(1, n_nodes + 1) for v in range(2, n_nodes + 1) if u != v]
    keep = {e for e in pairs if rng.random() < 0.4} | {(1, n_nodes)}
    net = linear_network(n_nodes, {e: rng.dirichlet(np.ones(q)) for e in keep}, [n_nodes],
                         field_from_order(q))
    assert parse_network(render_network(net)) == net


def diagnostics(text):
    with pytest.raises(NetworkFileError) as exc:
        parse_network(text)
    return exc.value.diagnostics


def test_bad_field_order_reports_line():
    diags = diagnostics(BRIDGE_TEXT.replace("field 2", "field 6"))
    assert "line 2: order not a prime power of supported form" in diags


def test_duplicate_edge_reports_both_lines():
    text = BRIDGE_TEXT + "edge 2 3 state iid 0:0.5,1:0.5\n"
    assert "line 12: duplicate edge 2 3 (first declared on line 9)" in diagnostics(text)


def test_several_problems_reported_together():
    text = BRIDGE_TEXT.replace("nodes 4", "nodes four").replace("mode linear", "mode linear\nbogus 1")
    diags = diagnostics(text)
    assert any(d.startswith("line 3:") for d in diags)
    assert any("unknown directive" in d for d in diags)


def test_missing_directives():
    assert any("source" in d for d in diagnostics("field 2\nnodes 2\ndestinations 2\nmode linear\n"))


def test_invalid_probabilities_rejected():
    diags = diagnostics(BRIDGE_TEXT.replace("0:0.5,1:0.5   #", "0:0.5,1:0.7   #"))
    assert diags
