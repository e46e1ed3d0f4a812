import csv
import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from regret_forge import bench
from regret_forge.cli import main
from regret_forge.metrics import ConvergenceRecord, EXPLOITABILITY_FLOOR

SVG = "{http://www.w3.org/2000/svg}"
VARIANTS = ("cfr", "cfrplus", "linear", "dcfr", "dcfrplus", "pcfrplus", "pdcfrplus")


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def polylines(path):
    return ET.parse(path).getroot().findall(f"{SVG}polyline")


def test_solve_writes_trace(tmp_path):
    out = tmp_path / "k.csv"
    assert main(["solve", "--game", "kuhn", "--variant", "cfrplus", "--iterations", "200", "--eval-interval", "20", "--out", str(out)]) == 0
    table = rows(out)
    assert table[0] == list(bench.CSV_HEADER)
    body = table[1:]
    assert [int(r[0]) for r in body] == list(range(20, 201, 20))
    assert float(body[0][1]) > float(body[-1][1])
    assert all(float(r[4]) == 0.0 for r in body)


def test_solve_dump_regrets(tmp_path):
    out, dump = tmp_path / "n.csv", tmp_path / "r.json"
    code = main(["solve", "--game", "nfg:3", "--variant", "pcfrplus", "--iterations", "1", "--out", str(out), "--dump-regrets", str(dump)])
    assert code == 0
    data = json.loads(dump.read_text())
    assert data["iterations"] == 1
    p1 = data["players"]["1"]["'row'"]
    p2 = data["players"]["2"]["'col'"]
    assert p1 == pytest.approx({"r0": 0.0, "r1": 0.0, "r2": 64 / 3})
    assert p2 == pytest.approx({"c0": 100 / 3, "c1": 100 / 3, "c2": 0.0})


def test_unknown_game_exits_2(tmp_path, capsys):
    assert main(["solve", "--game", "chess", "--variant", "cfr", "--iterations", "5", "--out", str(tmp_path / "x.csv")]) == 2
    err = capsys.readouterr().err
    assert "kuhn" in err and "leduc" in err
    assert not (tmp_path / "x.csv").exists()


def test_bad_variant_and_params(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--game", "kuhn", "--variant", "nope", "--iterations", "5", "--out", "x.csv"])
    assert exc.value.code == 2
    assert main(["solve", "--game", "kuhn", "--variant", "cfrplus", "--beta", "1", "--iterations", "5", "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["solve", "--game", "kuhn", "--variant", "cfr", "--iterations", "0", "--out", str(tmp_path / "x.csv")]) == 2


def test_grid_matches_single_runs(tmp_path):
    specs = tmp_path / "g.specs"
    specs.write_text(
        "# two small runs\n"
        "game=kuhn\nvariant=pcfrplus\niterations=60\neval_interval=10\n\n"
        "game=nfg:3\nvariant=dcfr\niterations=40\neval_interval=10\nout=custom.csv\n"
    )
    out_dir = tmp_path / "grid"
    assert main(["grid", "--specs", str(specs), "--out-dir", str(out_dir), "--jobs", "2"]) == 0
    single = tmp_path / "single.csv"
    main(["solve", "--game", "kuhn", "--variant", "pcfrplus", "--iterations", "60", "--eval-interval", "10", "--out", str(single)])
    assert (out_dir / "kuhn__pcfrplus.csv").read_bytes() == single.read_bytes()
    main(["solve", "--game", "nfg:3", "--variant", "dcfr", "--iterations", "40", "--eval-interval", "10", "--out", str(single)])
    assert (out_dir / "custom.csv").read_bytes() == single.read_bytes()


def test_grid_empty_file_warns(tmp_path, capsys):
    specs = tmp_path / "empty.specs"
    specs.write_text("# nothing here\n\n")
    assert main(["grid", "--specs", str(specs), "--out-dir", str(tmp_path / "o")]) == 0
    assert "no experiments" in capsys.readouterr().err


def test_grid_rejects_duplicate_outputs(tmp_path, capsys):
    specs = tmp_path / "dup.specs"
    specs.write_text("game=kuhn\nvariant=cfr\niterations=5\n\ngame=kuhn\nvariant=cfr\niterations=9\n")
    assert main(["grid", "--specs", str(specs), "--out-dir", str(tmp_path)]) == 2
    assert "both write" in capsys.readouterr().err


def test_grid_reports_bad_line(tmp_path, capsys):
    specs = tmp_path / "bad.specs"
    specs.write_text("game=kuhn\nvariant=cfr\niterations=ten\n")
    assert main(["grid", "--specs", str(specs), "--out-dir", str(tmp_path)]) == 2
    assert "bad.specs:3" in capsys.readouterr().err


def test_grid_failed_stanza_does_not_stop_others(tmp_path, capsys):
    specs = tmp_path / "mixed.specs"
    specs.write_text("game=chess\nvariant=cfr\niterations=5\n\ngame=kuhn\nvariant=cfr\niterations=5\n")
    assert main(["grid", "--specs", str(specs), "--out-dir", str(tmp_path)]) == 1
    assert (tmp_path / "kuhn__cfr.csv").exists()
    assert "chess" in capsys.readouterr().err


def test_plot_single_series(tmp_path):
    out = tmp_path / "k__cfr.csv"
    main(["solve", "--game", "kuhn", "--variant", "cfr", "--iterations", "100", "--eval-interval", "10", "--out", str(out)])
    svg = tmp_path / "p.svg"
    assert main(["plot", "--out", str(svg), str(out)]) == 0
    [line] = polylines(svg)
    assert len(line.get("points").split()) == 10
    assert line.get("data-label") == "cfr"


def test_plot_seven_series_with_legend(tmp_path):
    paths = []
    for v in VARIANTS:
        p = tmp_path / f"nfg_3__{v}.csv"
        bench.write_csv([ConvergenceRecord(i, 1.0 / i, 0.5 / i, 1.5 / i) for i in (1, 2, 3)], p)
        paths.append(str(p))
    svg = tmp_path / "all.svg"
    assert main(["plot", "--out", str(svg)] + paths) == 0
    assert [pl.get("data-label") for pl in polylines(svg)] == list(VARIANTS)
    labels = [t.text for t in ET.parse(svg).getroot().findall(f"{SVG}text") if t.get("class") == "legend"]
    assert labels == list(VARIANTS)


def test_plot_floor_rows(tmp_path):
    p = tmp_path / "z__cfr.csv"
    bench.write_csv([ConvergenceRecord(1, 1.0, 1.0, 1.0), ConvergenceRecord(2, EXPLOITABILITY_FLOOR, 0.0, 0.0)], p)
    svg = tmp_path / "z.svg"
    assert main(["plot", "--out", str(svg), str(p)]) == 0
    pts = [tuple(map(float, s.split(","))) for s in polylines(svg)[0].get("points").split()]
    # the floor is the lowest gridline, at the bottom of the plot area
    assert pts[1][1] == pytest.approx(600 - bench.MARGIN["bottom"])


def test_plot_bad_csv(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("iteration,exploitability,delta1,delta2,elapsed_ms\n1,abc,0,0,0\n")
    assert main(["plot", "--out", str(tmp_path / "x.svg"), str(p)]) == 1
    assert "bad.csv:2" in capsys.readouterr().err


def test_csv_roundtrip(tmp_path):
    recs = [ConvergenceRecord(3, 0.1 + 0.2, 1 / 3, 2 / 7, 0.0), ConvergenceRecord(9, 1e-12, 0.0, 0.0, 0.0)]
    p = tmp_path / "r.csv"
    bench.write_csv(recs, p)
    assert bench.read_csv(p) == recs


def test_stats(capsys):
    assert main(["stats", "--game", "kuhn", "--game", "nfg:2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split("\t")[0] == "game"
    assert lines[1].split("\t") == ["kuhn", "58", "12", "30", "6", "2"]
    assert lines[2].split("\t")[0] == "nfg:2"


def test_console_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    cmd = [sys.executable, "-m", "regret_forge", "solve", "--game", "nfg:2", "--variant", "cfr", "--iterations", "10", "--out", str(out)]
    subprocess.run(cmd, check=True)
    assert len(rows(out)) == 2
