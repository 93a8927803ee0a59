import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from relaynet.capacity import linear_capacity
from relaynet.catalog import bridge
from relaynet.cli import main
from relaynet.field import field_create
from relaynet.netfile import render_network
from relaynet.network import linear_network

NETS = Path(__file__).resolve().parents[1] / "networks"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_capacity_output_matches_library(capsys):
    code, out, _ = run(capsys, "capacity", "--net", NETS / "bridge.net", "--format", "machine")
    assert code == 0
    want = linear_capacity(bridge())
    assert out.splitlines()[0] == f"capacity_bits={want.value:.9g} mincut={want.mincut.label}"
    assert out.splitlines()[1] == "destination=4 bits=0.75 argmin={1};{1,2,3}"


def test_human_format_adds_notes(capsys):
    _, human, _ = run(capsys, "capacity", "--net", NETS / "bridge.net")
    _, machine, _ = run(capsys, "capacity", "--net", NETS / "bridge.net", "--format", "machine")
    assert len(human.splitlines()) > len(machine.splitlines())
    assert all("=" in ln for ln in machine.splitlines())


def test_layers_output(capsys):
    code, out, _ = run(capsys, "layers", "--net", NETS / "diamond.net", "--format", "machine")
    assert code == 0
    assert out == "L=2 layer0=1 layer1=2,3 layer2=4\n"


def test_non_layered_network_is_input_error(capsys):
    code, out, err = run(capsys, "layers", "--net", NETS / "cyclic4.net")
    assert code == 2 and out == ""
    assert err.startswith("error: network is not layered")
    code, _, err = run(capsys, "simulate", "--net", NETS / "cyclic4.net", "--n", 4, "--R", 0.5)
    assert code == 2 and "unfold" in err


def test_unfold_makes_cyclic_network_layered(capsys):
    code, out, _ = run(capsys, "unfold", "--net", NETS / "cyclic4.net", "--T", 3, "--format", "machine")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("T=3 w=1 ")
    assert lines[0].endswith(" L=3")
    assert lines[1] == "layer=0 copies=1[0]"


def test_verify_unfold_passes_on_cyclic_network(capsys):
    code, out, _ = run(capsys, "verify-unfold", "--net", NETS / "cyclic4.net", "--T", 3, "--format", "machine")
    assert code == 0
    assert out.splitlines()[-1] == "pass=1"
    assert sum(ln.startswith("verify T=") for ln in out.splitlines()) == 3


def test_bad_inputs_exit_two(capsys, tmp_path):
    bad = tmp_path / "bad.net"
    bad.write_text("field 6\n")
    code, _, err = run(capsys, "capacity", "--net", bad)
    assert code == 2 and "line 1" in err
    assert run(capsys, "capacity", "--net", tmp_path / "missing.net")[0] == 2
    assert run(capsys, "capacity", "--net", NETS / "bridge.net", "--threads", 0)[0] == 2
    assert run(capsys, "capacity")[0] == 2
    assert run(capsys, "frobnicate", "--net", NETS / "bridge.net")[0] == 2
    code, _, err = run(capsys, "capacity", "--net", NETS / "diamond-general.net")
    assert code == 2 and "linear" in err


def test_cap_exceeded_exits_one(capsys, tmp_path):
    edges = {(1, v): np.full(256, 1 / 256) for v in range(2, 5)}
    edges.update({(v, 5): np.full(256, 1 / 256) for v in range(2, 5)})
    big = tmp_path / "big.net"
    big.write_text(render_network(linear_network(5, edges, [5], field_create(2, 8))))
    code, out, err = run(capsys, "capacity", "--net", big)
    assert code == 1 and out == "" and err.startswith("error:")
    # Monte Carlo sidesteps the exact-enumeration cap
    assert run(capsys, "capacity", "--net", big, "--samples", 200)[0] == 0


SIM = ("simulate", "--net", NETS / "diamond.net", "--n", 8, "--R", 0.6, "--trials", 30, "--seed", 4,
       "--format", "machine")


def test_simulate_is_reproducible_and_thread_independent(capsys):
    first = run(capsys, *SIM)
    assert first[0] == 0
    assert first[1].startswith("sim n=8 R=0.6 M=28 err=")
    assert run(capsys, *SIM)[1] == first[1]
    assert run(capsys, *SIM, "--threads", 4)[1] == first[1]


def test_simulate_typicality_defaults_for_general_networks(capsys):
    code, out, _ = run(capsys, "simulate", "--net", NETS / "diamond-general.net", "--n", 100, "--R", 0.05,
                       "--trials", 5, "--format", "machine")
    assert code == 0
    assert "decoder=typicality" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "relaynet", "layers", "--net", str(NETS / "diamond.net"),
                           "--format", "machine"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout == "L=2 layer0=1 layer1=2,3 layer2=4\n"


@pytest.mark.parametrize("command", ["cutset", "rate", "cuts"])
def test_other_commands_run(capsys, command):
    code, out, _ = run(capsys, command, "--net", NETS / "diamond-erasure-general.net", "--grid", 2,
                       "--format", "machine")
    assert code == 0 and out
