"""Line-oriented network description files.

Example (``#`` starts a comment)::

    field 2
    nodes 4
    source 1
    destinations 4
    mode linear
    edge 1 2 state iid 0:0.5,1:0.5
    edge 1 3 state iid 0:0.5,1:0.5

General-mode files declare ``alphabet <v> in <k> out <k>`` for every node
and give each node with in-neighbours a ``table <v> begin`` ... ``table end``
block whose rows read ``<x tuple> <s tuple> -> <y>``.  The x tuple lists
the in-neighbours' inputs and the s tuple the states of the incoming edges,
both in ascending neighbour order, comma separated.  A ``statejoint begin``
... ``statejoint end`` block replaces the per-edge ``state iid`` clauses;
its rows are ``<assignment> <prob>`` with one entry per edge in ascending
edge order.
"""

from __future__ import annotations

import re

import numpy as np

from .field import Field, FieldError, field_create, is_prime
from .network import GENERAL, LINEAR, ChannelTable, Network, StateModel, validate


class NetworkFileError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(self.diagnostics))


def _int(tok: str, what: str) -> int:
    if not re.fullmatch(r"[+-]?\d+", tok):
        raise ValueError(f"{what} must be an integer, got {tok!r}")
    return int(tok)


def _tuple(tok: str, what: str) -> tuple[int, ...]:
    return tuple(_int(t, what) for t in tok.split(","))


def _prob(tok: str) -> float:
    try:
        p = float(tok)
    except ValueError:
        raise ValueError(f"probability {tok!r} is not a decimal number") from None
    if not np.isfinite(p):
        raise ValueError(f"probability {tok!r} is not finite")
    return p


def _parse_field(args: list[str]) -> Field:
    if not args:
        raise ValueError("field needs an order")
    m = re.fullmatch(r"2\^(\d+)", args[0])
    poly = None
    if len(args) == 3 and args[1] == "poly":
        poly = int(args[2], 16)
    elif len(args) != 1:
        raise ValueError("expected 'field <p>' or 'field 2^<m> [poly <hex>]'")
    if m:
        return field_create(2, int(m.group(1)), poly)
    q = _int(args[0], "field order")
    if poly is not None:
        raise ValueError("a reduction polynomial needs the form 'field 2^<m>'")
    if not is_prime(q):
        raise FieldError("order not a prime power of supported form")
    return field_create(q)


def parse_network(text: str) -> Network:
    """Parse a network file; raises :class:`NetworkFileError` with line-numbered diagnostics."""
    diags: list[str] = []
    fld = None
    n_nodes = None
    dests = None
    mode = None
    edges: dict[tuple[int, int], tuple[int, dict | None]] = {}
    joint_rows: list[tuple[tuple[int, ...], float]] = []
    joint_line = None
    alphabets: dict[int, tuple[int, int]] = {}
    table_rows: dict[int, list[tuple[int, tuple, tuple, int]]] = {}
    table_line: dict[int, int] = {}
    seen_single: dict[str, int] = {}
    block = None  # ("joint", None) or ("table", v)

    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        try:
            if block is not None:
                kind, v = block
                if toks == [("statejoint" if kind == "joint" else "table"), "end"]:
                    block = None
                    continue
                if kind == "joint":
                    if len(toks) != 2:
                        raise ValueError("joint row must read '<assignment> <prob>'")
                    joint_rows.append((_tuple(toks[0], "state"), _prob(toks[1])))
                else:
                    if len(toks) != 4 or toks[2] != "->":
                        raise ValueError("table row must read '<x tuple> <s tuple> -> <y>'")
                    table_rows[v].append((no, _tuple(toks[0], "input"), _tuple(toks[1], "state"),
                                          _int(toks[3], "output")))
                continue
            key, args = toks[0], toks[1:]
            if key in ("field", "nodes", "source", "destinations", "mode"):
                if key in seen_single:
                    raise ValueError(f"'{key}' repeated (first on line {seen_single[key]})")
                seen_single[key] = no
            if key == "field":
                fld = _parse_field(args)
            elif key == "nodes":
                if len(args) != 1:
                    raise ValueError("expected 'nodes <count>'")
                n_nodes = _int(args[0], "node count")
                if n_nodes < 2:
                    raise ValueError("a network needs at least two nodes")
            elif key == "source":
                if args != ["1"]:
                    raise ValueError("the source must be node 1")
            elif key == "destinations":
                if len(args) != 1:
                    raise ValueError("expected 'destinations <id>[,<id>...]'")
                dests = _tuple(args[0], "destination")
                if len(set(dests)) != len(dests):
                    raise ValueError("destination listed twice")
            elif key == "mode":
                if args not in (["linear"], ["general"]):
                    raise ValueError("mode must be 'linear' or 'general'")
                mode = args[0]
            elif key == "edge":
                if len(args) not in (2, 5) or (len(args) == 5 and args[2:4] != ["state", "iid"]):
                    raise ValueError("expected 'edge <u> <v> state iid <elem>:<prob>,...' or 'edge <u> <v>'")
                e = (_int(args[0], "node"), _int(args[1], "node"))
                if e in edges:
                    raise ValueError(f"duplicate edge {e[0]} {e[1]} (first declared on line {edges[e][0]})")
                pmf = None
                if len(args) == 5:
                    pmf = {}
                    for item in args[4].split(","):
                        if item.count(":") != 1:
                            raise ValueError(f"state entry {item!r} must read <elem>:<prob>")
                        a, p = item.split(":")
                        a = _int(a, "state element")
                        if a < 0:
                            raise ValueError("state elements must be nonnegative")
                        if a in pmf:
                            raise ValueError(f"state element {a} listed twice")
                        pmf[a] = _prob(p)
                edges[e] = (no, pmf)
            elif key == "statejoint":
                if args != ["begin"]:
                    raise ValueError("expected 'statejoint begin'")
                if joint_line is not None:
                    raise ValueError(f"second statejoint block (first on line {joint_line})")
                joint_line = no
                block = ("joint", None)
            elif key == "alphabet":
                if len(args) != 5 or args[1] != "in" or args[3] != "out":
                    raise ValueError("expected 'alphabet <v> in <size> out <size>'")
                v = _int(args[0], "node")
                if v in alphabets:
                    raise ValueError(f"alphabet of node {v} declared twice")
                alphabets[v] = (_int(args[2], "size"), _int(args[4], "size"))
            elif key == "table":
                if len(args) != 2 or args[1] != "begin":
                    raise ValueError("expected 'table <v> begin'")
                v = _int(args[0], "node")
                if v in table_line:
                    raise ValueError(f"second table for node {v} (first on line {table_line[v]})")
                table_line[v] = no
                table_rows[v] = []
                block = ("table", v)
            else:
                raise ValueError(f"unknown directive {key!r}")
        except (ValueError, FieldError) as exc:
            diags.append(f"line {no}: {exc}")
    if block is not None:
        diags.append(f"line {joint_line if block[0] == 'joint' else table_line[block[1]]}: block never closed")
    for key in ("nodes", "destinations", "mode"):
        if key not in seen_single:
            diags.append(f"missing '{key}' directive")
    if diags:
        raise NetworkFileError(diags)

    if mode == LINEAR and fld is None:
        diags.append("linear mode requires a 'field' directive")
    if mode == GENERAL and (alphabets.keys() - set(range(1, n_nodes + 1))):
        diags.append(f"alphabet declared for unknown node(s) {sorted(alphabets.keys() - set(range(1, n_nodes + 1)))}")
    edge_list = sorted(edges)
    with_pmf = [e for e in edge_list if edges[e][1] is not None]
    if joint_line is not None:
        if with_pmf:
            diags.append(f"line {edges[with_pmf[0]][0]}: per-edge states cannot be combined with a statejoint block")
        state_model = StateModel.from_joint(edge_list, joint_rows)
    else:
        missing = [e for e in edge_list if edges[e][1] is None]
        if missing:
            diags.append(f"line {edges[missing[0]][0]}: edge {missing[0]} has no state law")
        pmfs = {}
        for e in with_pmf:
            d = edges[e][1]
            pmfs[e] = tuple(d.get(a, 0.0) for a in range(max(d) + 1))
        state_model = StateModel.iid(pmfs) if not missing else StateModel.iid({})
    if diags:
        raise NetworkFileError(diags)

    tables = None
    if mode == GENERAL:
        tables = {}
        for v, rows in table_rows.items():
            if v not in alphabets or not 1 <= v <= n_nodes:
                diags.append(f"line {table_line[v]}: table for node {v} without an alphabet")
                continue
            try:
                tmp = Network(n_nodes, tuple(edge_list), dests, mode, state_model, fld, alphabets, None)
                nbrs = tmp.input_neighbors(v)
            except KeyError as exc:
                diags.append(f"line {table_line[v]}: {exc}")
                continue
            in_sizes = tuple(alphabets.get(u, (0, 0))[0] for u in nbrs)
            ssz = state_model.alphabet_sizes()
            st_sizes = tuple(ssz[i] for i in tmp.in_edge_indices(v))
            lookup = np.full(in_sizes + st_sizes, -1, dtype=np.int64)
            first: dict[tuple, int] = {}
            for no, x, s, y in rows:
                if len(x) != len(in_sizes) or len(s) != len(st_sizes):
                    diags.append(f"line {no}: table row for node {v} needs {len(in_sizes)} inputs and "
                                 f"{len(st_sizes)} states")
                    continue
                idx = x + s
                if any(not 0 <= i < k for i, k in zip(idx, in_sizes + st_sizes)):
                    diags.append(f"line {no}: table entry {idx} outside the declared alphabets")
                    continue
                if idx in first:
                    diags.append(f"line {no}: table entry {idx} repeated (first on line {first[idx]})")
                    continue
                first[idx] = no
                lookup[idx] = y
            tables[v] = ChannelTable(v, in_sizes, st_sizes, alphabets[v][1], lookup)
    elif table_rows or alphabets:
        diags.append("alphabet and table directives are only allowed in general mode")
    if diags:
        raise NetworkFileError(diags)

    net = Network(n_nodes, tuple(edge_list), dests, mode, state_model, fld,
                  alphabets if mode == GENERAL else None, tables)
    problems = validate(net)
    if problems:
        raise NetworkFileError(problems)
    return net


def _field_line(f: Field) -> str:
    if f.is_prime_field:
        return f"field {f.p}"
    return f"field 2^{f.m} poly {f.poly:x}"


def _tuple_str(t) -> str:
    return ",".join(str(int(v)) for v in t)


def render_network(net: Network) -> str:
    """Inverse of :func:`parse_network`; floats are written with ``repr`` so they round-trip."""
    out = []
    if net.field is not None:
        out.append(_field_line(net.field))
    out += [f"nodes {net.n_nodes}", "source 1", f"destinations {_tuple_str(net.destinations)}", f"mode {net.mode}"]
    sm = net.state_model
    if sm.kind == "iid":
        for e, p in zip(sm.edges, sm.pmfs):
            out.append(f"edge {e[0]} {e[1]} state iid " + ",".join(f"{a}:{float(x)!r}" for a, x in enumerate(p)))
    else:
        out += [f"edge {u} {v}" for u, v in net.edges]
        out.append("statejoint begin")
        out += [f"{_tuple_str(a)} {float(p)!r}" for a, p in sm.joint]
        out.append("statejoint end")
    if net.mode == GENERAL:
        for v in net.nodes:
            k_in, k_out = net.alphabets[v]
            out.append(f"alphabet {v} in {k_in} out {k_out}")
        for v in sorted(net.tables or {}):
            t = net.tables[v]
            out.append(f"table {v} begin")
            k = len(t.in_sizes)
            for idx in np.ndindex(*t.lookup.shape):
                if t.lookup[idx] >= 0:
                    out.append(f"{_tuple_str(idx[:k])} {_tuple_str(idx[k:])} -> {int(t.lookup[idx])}")
            out.append("table end")
    return "\n".join(out) + "\n"


def load_network(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())
