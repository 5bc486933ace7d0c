import json
import math

import numpy as np
import pytest

from kraken_multiplier import classic_series, kraken_eval
from kraken_multiplier.cli import main
from kraken_multiplier.fixtures import PAPER_TABLES
from kraken_multiplier.ledger import events_from_csv, replay_ledger
from kraken_multiplier.output import OutputTable, fixed, human


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_table(text):
    return OutputTable.from_csv(text)


# --- classic ----------------------------------------------------------------


def test_classic_curve_and_limit(capsys):
    code, out, _ = run(capsys, "classic", "-R", "0.05", "-n", "100")
    assert code == 0
    table = csv_table(out)
    assert table.columns == ("iteration", "m")
    assert len(table.rows) == 101
    assert table.rows[99][1][0] == pytest.approx(18.8875, abs=1e-4)
    assert table.rows[-1] == ("limit", (20.0,))


def test_classic_single_row(capsys):
    code, out, _ = run(capsys, "classic", "-R", "0.05", "-n", "1")
    assert code == 0
    assert csv_table(out).rows[0] == ("1", (0.95,))


def test_classic_initial_deposit(capsys):
    _, out, _ = run(capsys, "classic", "-R", "0.05", "-n", "1", "--include-initial-deposit")
    assert csv_table(out).rows[0][1][0] == pytest.approx(1.95)


def test_classic_unparsable_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["classic", "-R", "abc"])
    assert exc.value.code == 2


@pytest.mark.parametrize("argv", [["classic", "-R", "1.0"], ["classic"], ["classic", "-R", "0.05", "-n", "0"]])
def test_classic_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


# --- kraken / tables --------------------------------------------------------


def test_kraken_table1(capsys):
    code, out, _ = run(
        capsys, "kraken", "-R", "0.05", "-I", "0.05", "-O", "1.0", "-T", "0.3", "-n", "100", "-k", "10"
    )
    assert code == 0
    values = csv_table(out).column("m")
    for v, e in zip(values, PAPER_TABLES[0].expected):
        assert abs(v - e) <= 1 if e <= 1000 else abs(v - e) / e <= 1e-3


def test_kraken_table4_long_flags(capsys):
    code, out, _ = run(
        capsys, "kraken", "--reserve", "0.025", "--insurance", "0.05", "--origination", "1.05",
        "--tranche", "0.3", "--iterations", "100", "--depth", "10",
    )
    assert code == 0
    assert csv_table(out).column("m")[-1] == pytest.approx(98_118_875_480, rel=1e-3)


def test_kraken_zero_tranche_constant(capsys):
    _, out, _ = run(capsys, "kraken", "--preset", "table1", "-T", "0")
    values = csv_table(out).column("m")
    assert values == pytest.approx([classic_series(0.05, 100)] * 10, rel=1e-12)


def test_kraken_missing_flags(capsys):
    code, _, err = run(capsys, "kraken", "-R", "0.05")
    assert code == 2
    assert "missing parameters" in err


def test_kraken_log_space(capsys):
    code, out, _ = run(capsys, "kraken", "--preset", "table4", "-k", "400", "--log-space", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert rows[-1]["ln_m"] > 709


def test_kraken_overflow_without_log_space(capsys):
    code, _, err = run(capsys, "kraken", "--preset", "table4", "-k", "400")
    assert code == 2
    assert "log" in err


def test_tables_match_kraken_presets(capsys):
    code, out, _ = run(capsys, "tables", "--format", "json")
    assert code == 0
    tables = json.loads(out)
    assert len(tables) == 4
    for i, t in enumerate(tables, start=1):
        _, kout, _ = run(capsys, "kraken", "--preset", f"table{i}", "--format", "json")
        assert t["rows"] == json.loads(kout)


def test_tables_rows(capsys):
    _, out, _ = run(capsys, "tables", "--format", "json")
    tables = json.loads(out)
    assert tables[0]["rows"][4]["m"] == pytest.approx(23_992, rel=1e-3)
    assert tables[2]["rows"][6]["m"] == pytest.approx(946_589, rel=1e-3)
    assert round(tables[1]["rows"][0]["m"]) == 46


def test_tables_csv_blocks(capsys):
    _, out, _ = run(capsys, "tables")
    blocks = [b for b in out.split("# ") if b.strip()]
    assert len(blocks) == 4
    caption, body = blocks[0].split("\n", 1)
    assert caption.startswith("Table 1")
    assert len(csv_table(body).rows) == 10


def test_tables_human_rounding(capsys):
    _, out, _ = run(capsys, "tables", "--table", "1", "--format", "human")
    assert "108,451,327" in out
    assert "24.27" in out
    assert "150" in out


# --- curve / sweep ----------------------------------------------------------


def test_curve_figure3_preset(capsys):
    code, out, _ = run(capsys, "curve")
    assert code == 0
    table = csv_table(out)
    assert table.columns == ("series", "k", "m", "log10_m")
    red = [r for r in table.rows if r[0] == "R=0.05"]
    blue = [r for r in table.rows if r[0] == "R=0.025"]
    assert len(red) == len(blue) == 10
    assert red[6][1][1] == pytest.approx(946_589, rel=1e-3)
    assert blue[9][1][1] == pytest.approx(98_118_875_480, rel=1e-3)
    for _, (k, m, lg) in red:
        assert lg == pytest.approx(math.log10(m), rel=1e-12)


def test_curve_table4_log_affine(capsys):
    _, out, _ = run(capsys, "curve", "--values", "0.025")
    rows = csv_table(out).rows
    k = np.array([r[1][0] for r in rows if r[1][0] >= 3], dtype=float)
    y = np.array([r[1][2] for r in rows if r[1][0] >= 3])
    slope, intercept = np.polyfit(k, y, 1)
    assert np.max(np.abs(y - (slope * k + intercept))) <= 0.01


def test_curve_single_k(capsys):
    _, out, _ = run(capsys, "curve", "-k", "1", "--values", "0.05")
    assert len(csv_table(out).rows) == 1


def test_curve_bad_axis(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["curve", "--axis", "Z"])
    assert exc.value.code == 2


def test_sweep_origination(capsys):
    code, out, _ = run(capsys, "sweep", "--axis", "O", "--values", "1.0,1.05", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert len(rows) == 20
    assert rows[9]["m"] == pytest.approx(108_451_327, rel=1e-3)
    assert rows[19]["m"] == pytest.approx(172_207_323, rel=1e-3)


def test_sweep_integer_axis(capsys):
    _, out, _ = run(capsys, "sweep", "--axis", "k", "--values", "1,2")
    assert len(csv_table(out).rows) == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["sweep", "--values", "1"],
        ["sweep", "--axis", "R"],
        ["sweep", "--axis", "n", "--values", "1.5"],
        ["sweep", "--axis", "R", "--values", "0.05,2"],
    ],
)
def test_sweep_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


# --- simulate ---------------------------------------------------------------


def summary(out):
    return {r["quantity"]: r["value"] for r in json.loads(out)}


def test_simulate_frictionless_delta(capsys):
    code, out, _ = run(capsys, "simulate", "--preset", "table1", "-k", "3", "--format", "json")
    assert code == 0
    s = summary(out)
    assert abs(s["relative_delta"]) <= 1e-9
    assert s["analytic_multiplier"] == pytest.approx(kraken_eval(PAPER_TABLES[0].params.with_(k=3)).final)
    assert s["halt_reason"] == "depth"


def test_simulate_leak_usage_error(capsys):
    code, _, err = run(capsys, "simulate", "--preset", "table1", "--leak", "1.0")
    assert code == 2
    assert "leak" in err


def test_simulate_eq7_preset(capsys):
    _, out, _ = run(capsys, "simulate", "--preset", "eq7", "--skip-every", "2", "-k", "1", "--format", "json")
    s = summary(out)
    assert s["din_ratio_skipped"] == pytest.approx(0.54, abs=0.01)
    assert s["din_ratio"] == pytest.approx(1.052, abs=1e-3)


def test_simulate_writes_event_log(tmp_path, capsys):
    path = tmp_path / "events.csv"
    code, out, _ = run(capsys, "simulate", "--preset", "table3", "-n", "20", "-k", "3", "--events", str(path))
    assert code == 0
    events = events_from_csv(path.read_text())
    state = replay_ledger(events)
    s = {label: vals[0] for label, vals in csv_table(out).rows}
    assert state.loans_outstanding == s["loans_outstanding"]
    assert len(events) == s["event_count"]


def test_simulate_unwritable_path(tmp_path, capsys):
    code, _, err = run(
        capsys, "simulate", "--preset", "table1", "-k", "1", "--events", str(tmp_path / "nope" / "e.csv")
    )
    assert code == 3
    assert "I/O" in err


# --- config file ------------------------------------------------------------


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"reserve": 0.05, "I": 0.05, "O": 1.0, "T": 0.3, "n": 100, "k": 10, "format": "json"}))
    code, out, _ = run(capsys, "kraken", "--config", str(cfg), "-k", "2")
    assert code == 0
    rows = json.loads(out)
    assert len(rows) == 2
    assert rows[1]["m"] == pytest.approx(149.53, abs=0.01)


def test_config_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "kraken", "--config", str(bad))[0] == 2
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"colour": "red"}))
    assert run(capsys, "kraken", "--config", str(unknown))[0] == 2
    assert run(capsys, "kraken", "--config", str(tmp_path / "missing.json"))[0] == 3


# --- verify -----------------------------------------------------------------


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert sum(r["check"].startswith("table") for r in rows) == 40
    assert all(r["verdict"] == "pass" for r in rows)
    eq6 = next(r for r in rows if r["check"] == "din_ratio.eq6")
    assert eq6["computed"] == pytest.approx(1.0526, abs=1e-4)
    assert eq6["tolerance"] == 1e-3


@pytest.mark.parametrize("spec", ["1:5", "2:1", "4:10"])
def test_verify_corrupted_fixture_fails(capsys, spec):
    code, out, err = run(capsys, "verify", "--corrupt", spec)
    assert code == 1
    assert "FAIL" in out
    assert "verification failed" in err


def test_verify_bad_corrupt_spec(capsys):
    assert run(capsys, "verify", "--corrupt", "9:9")[0] == 2
    assert run(capsys, "verify", "--corrupt", "x")[0] == 2


# --- output table -----------------------------------------------------------


def test_output_round_trip_csv_json():
    t = OutputTable("t", ("k", "m", "x"))
    values = [1e-20, 1 / 3, 98_118_875_419.56, 2.5e22, 0.1 + 0.2, 123456789012345.67]
    for i, v in enumerate(values, start=1):
        t.add(i, v, -v)
    csv_text = t.to_csv()
    assert "e" not in csv_text.lower().replace("k,m,x", "")
    back_csv = OutputTable.from_csv(csv_text)
    back_json = OutputTable.from_json(t.to_json())
    for (_, a), (_, b), (_, c) in zip(t.rows, back_csv.rows, back_json.rows):
        assert a == b == c


def test_output_table_rectangular():
    t = OutputTable("t", ("k", "m"))
    with pytest.raises(ValueError):
        t.add(1, 2.0, 3.0)
    with pytest.raises(ValueError):
        OutputTable("t", ("k", "m"), rows=[("1", (1.0, 2.0))])
    with pytest.raises(ValueError):
        t.render("xml")


def test_number_formatting():
    assert fixed(1e-7) == "0.0000001"
    assert fixed(5) == "5"
    assert human(149.53) == "150"
    assert human(24.2704) == "24.27"
    assert human(4453.46) == "4,453"
