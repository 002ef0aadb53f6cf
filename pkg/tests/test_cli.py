import json

import pytest

from prvote.cli import main
from prvote.core import dump_instance, instance_from_dict
from prvote.pb import pb_to_dict, PBInstance
from prvote.exactmath import rat
from prvote.core import WeakProfile

import instances


@pytest.fixture
def fig_left_path(tmp_path):
    path = tmp_path / "fig1-left.json"
    dump_instance(instances.fig_left(), path)
    return str(path)


@pytest.fixture
def ranked_path(tmp_path):
    path = tmp_path / "ranked.json"
    dump_instance(instances.ranked_robustness_example(), path)
    return str(path)


def test_verify_ejr_plus_violation(fig_left_path, capsys):
    code = main(
        [
            "verify",
            "--axiom",
            "ejr+",
            "--committee",
            "c1,c3,c5,c7",
            "--input",
            fig_left_path,
            "--k",
            "4",
        ]
    )
    assert code == 2
    payload = json.loads(capsys.readouterr().out)
    assert payload["satisfied"] is False
    assert payload["witness"]["candidate"] == "c4"
    assert payload["witness"]["ell"] == 3


def test_elect_gjcr(fig_left_path, capsys):
    code = main(["elect", "--rule", "gjcr", "--input", fig_left_path, "--k", "4"])
    assert code == 0
    assert capsys.readouterr().out.strip() == "c3,c4"


def test_elect_trace_json(fig_left_path, capsys):
    code = main(
        ["elect", "--rule", "mes", "--input", fig_left_path, "--trace"]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["rule"] == "mes"
    assert all(event["type"] == "select" for event in payload["trace"])


def test_missing_input_is_usage_error(capsys):
    assert main(["verify", "--axiom", "ejr+"]) == 1
    assert "error" in capsys.readouterr().err


def test_unknown_file_is_io_error(capsys):
    assert main(["elect", "--rule", "gjcr", "--input", "/nonexistent.json"]) == 1


def test_elect_verify_round_trip(fig_left_path, ranked_path, capsys):
    for rule, axiom, path in [
        ("gjcr", "ejr+", fig_left_path),
        ("mes", "ejr+", fig_left_path),
        ("pav", "ejr+", fig_left_path),
        ("phragmen", "pjr+", fig_left_path),
        ("ear", "rank-pjr+", ranked_path),
        ("stv", "psc", ranked_path),
    ]:
        code = main(["elect", "--rule", rule, "--input", path])
        assert code == 0
        committee = capsys.readouterr().out.strip()
        code = main(
            ["verify", "--axiom", axiom, "--committee", committee, "--input", path]
        )
        out = capsys.readouterr()
        assert code == 0, (rule, axiom, committee, out.out)


def test_verify_priceable_outputs_system(fig_left_path, capsys):
    # a partial committee is priceable, but only a full proportional one
    # (here: the Phragmen output) clears the strict budget bar
    code = main(
        [
            "verify",
            "--axiom",
            "priceable",
            "--committee",
            "c3,c4",
            "--input",
            fig_left_path,
        ]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["satisfied"] is True
    assert main(["elect", "--rule", "phragmen", "--input", fig_left_path]) == 0
    committee = capsys.readouterr().out.strip()
    code = main(
        [
            "verify",
            "--axiom",
            "priceable",
            "--committee",
            committee,
            "--input",
            fig_left_path,
            "--strict-b",
        ]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["satisfied"] is True
    assert "price_system" in payload


def test_verify_rank_priceable_separation(tmp_path, capsys):
    path = tmp_path / "sep.json"
    dump_instance(instances.rank_price_separation_example(), path)
    code = main(
        [
            "verify",
            "--axiom",
            "rank-priceable",
            "--committee",
            "c1,c4,c5",
            "--input",
            str(path),
            "--strict-b",
        ]
    )
    assert code == 2
    code = main(
        [
            "verify",
            "--axiom",
            "rank-pjr+",
            "--committee",
            "c1,c4,c5",
            "--input",
            str(path),
        ]
    )
    assert code == 0
    capsys.readouterr()


def test_verify_representative_needs_table(fig_left_path, tmp_path, capsys):
    assert (
        main(
            [
                "verify",
                "--axiom",
                "representative",
                "--committee",
                "c3,c4",
                "--input",
                fig_left_path,
            ]
        )
        == 1
    )
    table = tmp_path / "f.json"
    table.write_text(json.dumps({"1": "0", "2": "1/2", "3": "1", "4": "3/2"}))
    code = main(
        [
            "verify",
            "--axiom",
            "representative",
            "--committee",
            "c3,c4",
            "--input",
            fig_left_path,
            "--f-table",
            str(table),
        ]
    )
    assert code in (0, 2)
    capsys.readouterr()


def test_sample_and_reload(tmp_path, capsys):
    out = tmp_path / "sampled.json"
    code = main(
        [
            "sample",
            "--model",
            "resampling",
            "--n",
            "12",
            "--m",
            "8",
            "--k",
            "3",
            "--seed",
            "5",
            "--p",
            "0.4",
            "--phi",
            "0.3",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    capsys.readouterr()
    data = json.loads(out.read_text())
    instance, _ = instance_from_dict(data)
    assert instance.n == 12 and instance.m == 8 and instance.k == 3


def test_sample_rejects_bad_params(capsys):
    code = main(
        [
            "sample",
            "--model",
            "resampling",
            "--n",
            "5",
            "--m",
            "4",
            "--k",
            "2",
            "--seed",
            "1",
            "--p",
            "2.0",
            "--phi",
            "0.5",
            "--out",
            "-",
        ]
    )
    assert code == 1
    capsys.readouterr()


def test_experiment_verb(tmp_path, capsys):
    config = tmp_path / "tiny.toml"
    config.write_text(
        """
[experiment]
family = "approval"
n = 10
m = 6
k = 2
instances = 4
seed = 11
axioms = ["pjr+", "ejr+"]

[[grid]]
model = "resampling"
p = [0.4]
phi = [0.3, 0.9]
"""
    )
    out_dir = tmp_path / "results"
    code = main(["experiment", "--config", str(config), "--out", str(out_dir)])
    assert code == 0
    out = capsys.readouterr().out.strip()
    lines = (out_dir / "results.csv").read_text().splitlines()
    assert out.endswith("results.csv")
    assert len(lines) == 1 + 2 * 2


def test_query_sim_verbs(fig_left_path, capsys):
    code = main(
        ["query-sim", "--mode", "exact", "--input", fig_left_path, "--trials", "2"]
    )
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "trial,committee,ejr_plus,queries"
    assert len(lines) == 3
    assert lines[1].endswith(",1," + lines[1].split(",")[-1])
    code = main(
        [
            "query-sim",
            "--mode",
            "noisy",
            "--input",
            fig_left_path,
            "--trials",
            "2",
            "--delta",
            "0.2",
            "--k",
            "2",
        ]
    )
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3


def test_pb_verbs(tmp_path, capsys):
    profile = WeakProfile.from_approval(3, [[0, 1], [0, 2], [1]])
    budget_instance = PBInstance(
        profile, (rat(1), rat(2), rat(1)), rat(3)
    )
    path = tmp_path / "pb.json"
    path.write_text(json.dumps(pb_to_dict(budget_instance)))
    code = main(["elect", "--rule", "mes-pb", "--input", str(path)])
    assert code == 0
    committee = capsys.readouterr().out.strip()
    code = main(
        [
            "verify",
            "--axiom",
            "pb-ejr+",
            "--committee",
            committee,
            "--input",
            str(path),
        ]
    )
    assert code == 0
    capsys.readouterr()
    code = main(
        ["verify", "--axiom", "pb-pjr+", "--committee", "", "--input", str(path)]
    )
    capsys.readouterr()
    assert code == 2


def test_tiebreak_file(tmp_path, fig_left_path, capsys):
    order = tmp_path / "priority.json"
    order.write_text(json.dumps([3, 2, 0, 1, 4, 5, 6]))
    code = main(
        [
            "elect",
            "--rule",
            "gjcr",
            "--input",
            fig_left_path,
            "--tiebreak",
            f"file:{order}",
        ]
    )
    assert code == 0
    assert capsys.readouterr().out.strip() == "c3,c4"
