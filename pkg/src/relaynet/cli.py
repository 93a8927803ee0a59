"""Command-line front end: ``relaynet <command> --net FILE [options]``.

Exit status is 0 on success, 2 for bad input (unreadable or invalid files,
bad flags, non-layered networks where layering is required) and 1 when a
computation would exceed one of the enumeration caps.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .capacity import (CapError, achievable_rate, cutset_bound, cut_conditional_entropy, expected_rank,
                       linear_capacity)
from .cuts import TooManyNodes, enumerate_cuts, format_nodes
from .info import JointTooLarge
from .netfile import load_network
from .network import LINEAR, NotLayered, compute_layers
from .simulate import SimConfig, run_blocks
from .unfold import unfold, verify_normalized_rate, verify_sandwich

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2


class Out:
    """Formats numbers for the chosen output style and collects lines."""

    def __init__(self, fmt: str):
        self.machine = fmt == "machine"
        self.lines: list[str] = []

    def num(self, x) -> str:
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".9g") if self.machine else format(x, ".6g")

    def pmf(self, p) -> str:
        return ",".join(self.num(v) for v in np.ravel(p))

    def kv(self, *pairs, prefix: str | None = None):
        body = " ".join(f"{k}={v}" for k, v in pairs)
        self.lines.append(f"{prefix} {body}" if prefix else body)

    def note(self, text: str):
        # human-only commentary; machine output stays key=value
        if not self.machine:
            self.lines.append(text)


def _nodes(vs) -> str:
    return ",".join(str(v) for v in vs)


def _copy_name(c) -> str:
    return f"{c[0]}[{c[1]}]"


def cmd_capacity(net, args, out: Out):
    method = "montecarlo" if args.samples else "exact"
    rep = linear_capacity(net, method, args.samples or 0, args.seed, args.threads)
    out.kv(("capacity_bits", out.num(rep.value)), ("mincut", rep.mincut.label))
    if method == "montecarlo":
        out.kv(("method", "montecarlo"), ("samples", rep.samples), ("seed", rep.seed),
               ("half_width_bits", out.num(rep.half_width)))
    for d in net.destinations:
        out.kv(("destination", d), ("bits", out.num(rep.per_destination[d])),
               ("argmin", ";".join(c.label for c in rep.argmin[d])))
    out.note("minimum over cuts of E[rank of the cut transfer matrix] * log2 q")


def cmd_cutset(net, args, out: Out):
    res = cutset_bound(net, args.grid)
    out.kv(("cutset_bits", out.num(res.value)), ("grid", res.k), ("evaluations", res.evaluations))
    out.kv(("joint_pmf", out.pmf(res.distribution)))
    out.note(res.caveat)


def cmd_rate(net, args, out: Out):
    res = achievable_rate(net, args.grid, args.refine)
    out.kv(("rate_bits", out.num(res.value)), ("grid", res.k), ("evaluations", res.evaluations))
    for u in sorted(res.distribution):
        out.kv(("node", u), ("pmf", out.pmf(res.distribution[u])))
    out.note(res.caveat)


def cmd_cuts(net, args, out: Out):
    for d in net.destinations:
        for cut in enumerate_cuts(net, d):
            pairs = [("d", d), ("U", cut.label), ("senders", format_nodes(cut.senders)),
                     ("receivers", format_nodes(cut.receivers)),
                     ("entropy_bits", out.num(cut_conditional_entropy(net, cut)))]
            if net.mode == LINEAR:
                est = expected_rank(net, cut, "montecarlo" if args.samples else "exact",
                                    args.samples or 0, args.seed, args.threads)
                pairs.append(("expected_rank", out.num(est.value)))
            out.kv(*pairs, prefix="cut")


def cmd_layers(net, args, out: Out):
    lay = compute_layers(net)
    out.kv(("L", lay.L), *[(f"layer{i}", _nodes(layer)) for i, layer in enumerate(lay.layers)])


def cmd_unfold(net, args, out: Out):
    unf = unfold(net, args.T, args.memory)
    lay = unf.layering()
    out.kv(("T", unf.T), ("w", unf.w), ("copies", len(unf.copies)), ("trimmed", len(unf.trimmed)), ("L", lay.L))
    for i, layer in enumerate(lay.layers):
        out.kv(("layer", i), ("copies", ",".join(_copy_name(c) for c in layer)))
    out.note("memory links are a reconstruction: w symbols per stage for relays, unbounded on the "
             "source and destination chains")


def cmd_verify_unfold(net, args, out: Out):
    budget = args.samples or 4096
    Ts = range(1, args.T + 1)
    all_ok = True
    for T in Ts:
        sw = verify_sandwich(net, T, None, budget, args.seed, args.memory)
        nr = verify_normalized_rate(net, T, None, budget, args.seed, args.memory)
        all_ok &= sw.passed
        out.kv(("T", T), ("N", sw.N), ("coefficient", sw.lower_coefficient),
               ("lower_ok", int(sw.lower_ok)), ("upper_ok", int(sw.upper_ok)),
               ("lower_margin", out.num(sw.lower_margin)), ("upper_margin", out.num(sw.upper_margin)),
               ("steady_normalized", out.num(nr.normalized_steady)), ("normalized", out.num(nr.normalized)),
               ("cuts", sw.cuts_evaluated), prefix="verify")
        for v in sw.violations[:5]:
            out.kv(("T", T), ("cut", v.cut.label), ("margin", out.num(v.margin)), prefix="violation")
    out.kv(("pass", int(all_ok)))


def cmd_simulate(net, args, out: Out):
    cfg = SimConfig(n=args.n, R=args.R, trials=args.trials, seed=args.seed, K=args.K,
                    decoder=args.decoder or ("exact" if net.mode == LINEAR else "typicality"),
                    eps=args.eps, chained=args.chained, workers=args.threads)
    rep = run_blocks(net, cfg)
    out.lines.append(rep.row())
    out.kv(("K", rep.K), ("L", rep.L), ("effective_rate", out.num(rep.effective_rate)),
           ("decoder", rep.decoder), ("codebook", rep.codebook), ("ambiguous", rep.ambiguous),
           ("empty", rep.empty), ("mean_candidates", out.num(rep.mean_candidates)),
           ("block_errors", rep.block_errors))
    for n in rep.notes:
        out.note(n)


COMMANDS = {
    "capacity": cmd_capacity,
    "cutset": cmd_cutset,
    "rate": cmd_rate,
    "cuts": cmd_cuts,
    "layers": cmd_layers,
    "unfold": cmd_unfold,
    "verify-unfold": cmd_verify_unfold,
    "simulate": cmd_simulate,
}


def _nonneg_int(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--net", required=True, help="network description file")
    shared.add_argument("--seed", type=_nonneg_int, default=0)
    shared.add_argument("--format", choices=("human", "machine"), default="human")
    shared.add_argument("--samples", type=_nonneg_int, default=0,
                        help="Monte Carlo samples (0 = exact) or unfolded-cut budget")
    shared.add_argument("--grid", type=int, default=4, help="simplex grid resolution k")
    shared.add_argument("--T", type=int, default=3, help="unfolding stages")
    shared.add_argument("--threads", type=int, default=1)

    p = argparse.ArgumentParser(prog="relaynet", description="Capacity tools for relay networks with state.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[shared])
        if name == "rate":
            sp.add_argument("--refine", type=_nonneg_int, default=0, help="coordinate-ascent rounds")
        if name in ("unfold", "verify-unfold"):
            sp.add_argument("--memory", type=_nonneg_int, default=None, help="relay memory width w")
        if name == "simulate":
            sp.add_argument("--n", type=int, required=True, help="block length")
            sp.add_argument("--R", type=float, required=True, help="rate in bits per symbol")
            sp.add_argument("--trials", type=int, default=100)
            sp.add_argument("--K", type=int, default=1, help="message blocks")
            sp.add_argument("--decoder", choices=("exact", "typicality"), default=None)
            sp.add_argument("--eps", type=float, default=0.2)
            sp.add_argument("--chained", action="store_true", help="let a block error fail later blocks")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    out = Out(args.format)
    try:
        if args.threads < 1:
            raise ValueError("--threads must be at least 1")
        net = load_network(args.net)
        COMMANDS[args.command](net, args, out)
    except (CapError, JointTooLarge, TooManyNodes) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except NotLayered as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write("\n".join(out.lines) + "\n")
    return EXIT_OK
