import json

import pytest
from click.testing import CliRunner

from ordlite import chain, scenario
from ordlite.cli import cli

SCRIPT = [
    {"action": "deploy", "tick": "ordi", "max": "2100000", "lim": "1000",
     "deployer": "alice"},
    {"action": "mint", "tick": "ordi", "amt": "1000", "minter": "alice"},
    {"action": "transfer_inscribe", "tick": "ordi", "amt": "100",
     "owner": "alice", "id": "t1"},
    {"action": "transfer_send", "inscription": "t1", "to": "bob"},
]


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def workdir(tmp_path):
    script_file = tmp_path / "script.json"
    script_file.write_text(json.dumps(SCRIPT))
    return tmp_path


def run(runner, workdir, *args):
    result = runner.invoke(cli, ["--data-dir", str(workdir / "data"), *args],
                           catch_exceptions=False)
    return result


def indexed(runner, workdir):
    run(runner, workdir, "scenario", str(workdir / "script.json"),
        "-o", str(workdir / "blocks.jsonl"))
    return run(runner, workdir, "index", str(workdir / "blocks.jsonl"))


def test_scenario_and_index(runner, workdir):
    result = indexed(runner, workdir)
    assert result.exit_code == 0
    out = json.loads(result.output)
    assert out["tip_height"] >= 3
    assert out["diagnostics"] == []


def test_sat_query_all_notations(runner, workdir):
    result = run(runner, workdir, "sat", "2099994106992659")
    out = json.loads(result.output)
    assert out["decimal"] == "3891094.16797"
    assert out["degree"] == "3°111094′214″16797‴"
    assert out["percentile"] == "99.99971949060254%"
    # any notation resolves the same sat
    for query in (out["decimal"], out["degree"], out["name"]):
        assert json.loads(run(runner, workdir, "sat", query).output)["n"] == \
            2099994106992659


def test_brc20_queries(runner, workdir):
    indexed(runner, workdir)
    bal = json.loads(run(runner, workdir, "brc20", "balance", "ordi",
                         "alice").output)
    assert bal == {"available": "900", "pending": "0"}
    unknown = json.loads(run(runner, workdir, "brc20", "balance", "ordi",
                             "nobody").output)
    assert unknown == {"available": "0", "pending": "0"}
    tick = json.loads(run(runner, workdir, "brc20", "tick", "ordi").output)
    assert tick["minted"] == "1000"


def test_inscriptions_listing(runner, workdir):
    indexed(runner, workdir)
    out = json.loads(run(runner, workdir, "inscriptions").output)
    kinds = [i["kind"] for i in out]
    assert kinds == ["brc20_deploy", "brc20_mint", "brc20_transfer"]
    by_height = json.loads(run(runner, workdir, "inscriptions", "--height",
                               str(out[0]["height"])).output)
    assert [i["id"] for i in by_height] == [out[0]["id"]]


def test_snapshot_hash_deterministic(runner, workdir):
    indexed(runner, workdir)
    one = run(runner, workdir, "snapshot", "hash").output
    two = run(runner, workdir, "snapshot", "hash").output
    assert one == two


def test_snapshot_save_load(runner, workdir, tmp_path):
    indexed(runner, workdir)
    dest = tmp_path / "snap.json"
    saved = json.loads(run(runner, workdir, "snapshot", "save",
                           str(dest)).output)
    loaded = json.loads(run(runner, workdir, "snapshot", "load",
                            str(dest)).output)
    assert saved["hash"] == loaded["hash"]


def test_cli_byte_identical_output(runner, workdir):
    indexed(runner, workdir)
    a = run(runner, workdir, "inscriptions").output
    b = run(runner, workdir, "inscriptions").output
    assert a == b


def test_trade_cli_cycle(runner, tmp_path):
    script = [
        {"action": "deploy", "tick": "ordi", "max": "2100000", "lim": "1000",
         "deployer": "seller"},
        {"action": "mint", "tick": "ordi", "amt": "1000", "minter": "seller"},
        {"action": "transfer_inscribe", "tick": "ordi", "amt": "1000",
         "owner": "seller", "id": "t1"},
        {"action": "mine", "miner": "buyer"},
    ]
    (tmp_path / "script.json").write_text(json.dumps(script))
    runner_ = runner
    run(runner_, tmp_path, "scenario", str(tmp_path / "script.json"),
        "-o", str(tmp_path / "blocks.jsonl"))
    run(runner_, tmp_path, "index", str(tmp_path / "blocks.jsonl"))

    listing = json.loads(run(runner_, tmp_path, "inscriptions").output)
    transfer_id = [i["id"] for i in listing if i["kind"] == "brc20_transfer"][0]
    offer = json.loads(run(runner_, tmp_path, "trade", "offer", "seller",
                           transfer_id, "20000000").output)
    assert offer["status"] == "open"
    accepted = json.loads(run(runner_, tmp_path, "trade", "accept",
                              offer["offer_id"], "buyer").output)
    assert accepted["status"] == "accepted"
    settled = json.loads(run(runner_, tmp_path, "trade", "settle",
                             offer["offer_id"]).output)
    assert settled["status"] == "settled"
    assert settled["btc_deltas"]["seller"] == 20_000_000
    bal = json.loads(run(runner_, tmp_path, "brc20", "balance", "ordi",
                         "buyer").output)
    assert bal["available"] == "1000"


def test_metrics_cli(runner, tmp_path):
    a = tmp_path / "aaa.csv"
    a.write_text("date,price\n2023-05-01,100\n2023-05-02,110\n2023-05-03,99\n"
                 "2023-05-04,105\n")
    b = tmp_path / "bbb.csv"
    b.write_text("date,price\n2023-05-01,50\n2023-05-02,54\n2023-05-03,51\n"
                 "2023-05-04,55\n")
    result = runner.invoke(cli, ["metrics", "--risk-free", "0.0",
                                 str(a), str(b)], catch_exceptions=False)
    out = json.loads(result.output)
    assert set(out["per_symbol"]) == {"aaa", "bbb"}
    assert "aaa/bbb" in out["correlation"]
