import os
import subprocess

import pytest

import slicesim


def line3():
    return slicesim.NetworkGraph(3, [slicesim.Link(0, 1, 100, 1, 3), slicesim.Link(1, 2, 100, 1, 5)])


def test_graph_round_trip():
    g = slicesim.generate_random_graph(8, 12, seed=3)
    assert g.node_count == 8 and g.link_count == 12
    again = slicesim.NetworkGraph.parse(g.serialize())
    assert again.serialize() == g.serialize()


def test_paths_and_fairness():
    assert slicesim.simple_paths(line3(), 0, 2) == [[0, 1, 2]]
    assert slicesim.jain_index([1.0, 1.0, 1.0]) == 1.0
    assert slicesim.jain_index([1.0, 0.0]) == pytest.approx(0.5)


def test_bad_graph_raises():
    with pytest.raises(slicesim.SliceSimError):
        slicesim.NetworkGraph(4, [slicesim.Link(0, 1, 1, 1, 1)])


def test_simulate_conserves_requests():
    spec = slicesim.ExperimentSpec.from_text("[experiment]\nhorizon = 80\n")
    g = slicesim.generate_random_graph(seed=2)
    for solver in ("greedy", "ip"):
        out = slicesim.simulate(g, spec, solver, record_events=True)
        assert out["generated"] == out["served"] + out["evicted"] + out["pending_at_horizon"]
        assert len(out["per_slot"]) == 80
        assert out["events"]


def test_unknown_key_is_reported():
    with pytest.raises(slicesim.SliceSimError, match="lamda"):
        slicesim.ExperimentSpec.from_text("[demand]\nlamda = 2\n")


def test_experiment_is_deterministic():
    spec = slicesim.ExperimentSpec.from_text(
        "[experiment]\nlambdas = 1,2\nreplications = 2\nhorizon = 40\nsolvers = greedy,ip\n"
    )
    a = slicesim.run_experiment(spec)
    b = slicesim.run_experiment(spec)
    assert a.startswith("schema=1\n")
    assert slicesim.strip_wall_time(a) == slicesim.strip_wall_time(b)
    assert len(a.strip().splitlines()) == 2 + 8 + 4


def test_train_and_simulate_ppo(tmp_path):
    spec = slicesim.ExperimentSpec.from_text("[experiment]\nhorizon = 32\n[ppo]\nrollout = 32\nhidden = 8\n")
    ckpt = str(tmp_path / "p.ckpt")
    curve = slicesim.train(spec, 2.0, 2, ckpt)
    assert len(curve) == 2
    out = slicesim.simulate(slicesim.generate_random_graph(seed=5), spec, "ppo", checkpoint=ckpt)
    assert out["slots"] == 32


@pytest.mark.skipif("SLICESIM_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_help():
    res = subprocess.run([os.environ["SLICESIM_CLI"], "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "experiment" in res.stdout
