import json

import pytest

from stepwell import cli
from stepwell.config import (
    REF_V0,
    RunConfig,
    all_preset_configs,
    fixed_counterpart,
    parse_config,
    preset,
    serialize_config,
)
from stepwell.curves import ParamCurve
from stepwell.errors import ConfigError
from stepwell.output import CSV_HEADER, CurveRow, curve_csv_text, read_curve_csv, svg_line_chart, write_curve_csv


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCurves:
    @pytest.mark.parametrize("text", ["const:0.05", "affine:0.05,0.01", "expdecay:0.04,0.01"])
    def test_round_trip(self, text):
        assert ParamCurve.parse(ParamCurve.parse(text).to_text()) == ParamCurve.parse(text)

    @pytest.mark.parametrize("text", ["const", "affine:0.05", "cubic:1,2", "const:abc"])
    def test_bad(self, text):
        with pytest.raises(ConfigError):
            ParamCurve.parse(text)

    def test_integral(self):
        c = ParamCurve.exp_decay(0.04, 0.01)
        assert c.integral(0.0, 1.0) == pytest.approx(0.04 + 0.01 * (1 - 2.718281828459045**-1), rel=1e-14)
        assert ParamCurve.affine(0.05, 0.01).integral(0.0, 2.0) == pytest.approx(0.12)


class TestConfig:
    def test_presets_round_trip(self):
        for cfg in all_preset_configs() + [RunConfig()]:
            assert parse_config(serialize_config(cfg)) == cfg

    def test_preset_parameters(self):
        cfg = preset("fig1", REF_V0[0])
        assert (cfg.a, cfg.b, cfg.strike, cfg.tau, cfg.v0) == (4.5, 4.867, 100.0, 1.0, 12.8233)
        assert len(cfg.s0) == 21 and cfg.s0[0] == 100.0 and cfg.s0[-1] == 130.0
        fixed = fixed_counterpart(cfg)
        assert fixed.r.is_constant and fixed.sigma.is_constant and fixed.engine == "const"

    def test_comments_and_ranges(self):
        cfg = parse_config("# header\nwell.v0 = 26.3401  # inline\nquery.s0 = 100:110:3\n")
        assert cfg.v0 == 26.3401
        assert cfg.s0 == (100.0, 105.0, 110.0)

    @pytest.mark.parametrize(
        "text,fragment",
        [
            ("well.v0 = 1\nbogus.key = 3\n", "line 2: unknown key"),
            ("well.v0 = abc\n", "line 1: bad value for well.v0"),
            ("\n\nwell.v0\n", "line 3: expected"),
            ("well.b = 4.0\n", "b"),
            ("query.s0 = 120,110\n", "increasing"),
            ("engine.mode = fast\n", "engine.mode"),
        ],
    )
    def test_errors(self, text, fragment):
        with pytest.raises(ConfigError, match=fragment):
            parse_config(text)


class TestCsvSvg:
    ROWS = [CurveRow(100.0, 0.5, None, None, 5, 0), CurveRow(101.5, 1 / 3, 0.3333, 0.001, 4, 1)]

    def test_header_and_format(self):
        text = curve_csv_text(self.ROWS)
        lines = text.split("\r\n")
        assert lines[0] == ",".join(CSV_HEADER)
        assert lines[1] == "100,0.5,,,5,0"
        assert lines[2] == "101.5,0.3333333333,0.3333,0.001,4,1"

    def test_round_trip(self, tmp_path):
        rows = [CurveRow(100.0 + i, 0.1 * i + 0.123456789, 0.2, 0.003, 5, 0) for i in range(5)]
        path = tmp_path / "c.csv"
        write_curve_csv(rows, path)
        back = read_curve_csv(path)
        write_curve_csv(back, tmp_path / "d.csv")
        assert (tmp_path / "d.csv").read_bytes() == path.read_bytes()
        assert [r.s0 for r in back] == [r.s0 for r in rows]

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            curve_csv_text(self.ROWS[::-1])

    def test_unwritable(self, tmp_path):
        with pytest.raises(ConfigError):
            write_curve_csv(self.ROWS, tmp_path / "missing" / "x.csv")

    def test_svg(self):
        svg = svg_line_chart([1, 2, 3], [0.1, 0.3, 0.2], title="a<b", dashed=True)
        assert svg.startswith("<svg") and "polyline" in svg and "stroke-dasharray" in svg and "a&lt;b" in svg


class TestCli:
    def test_spectrum_reference_rows(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--v0", "12.8233")
        assert code == 0
        rows = [ln for ln in out.splitlines() if ln.strip() and ln.split()[0].isdigit()]
        assert len(rows) == 2
        assert float(rows[0].split()[1]) == pytest.approx(6.41782, rel=5e-3)
        assert float(rows[1].split()[1]) == pytest.approx(12.527, rel=5e-3)

    def test_spectrum_flags_unbound_reference_row(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--v0", "55.7859")
        assert code == 0
        assert "n=6" in out and "exceeds beta" in out
        assert len([ln for ln in out.splitlines() if ln.split()[0].isdigit()]) == 5

    def test_spectrum_empty_well(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--v0", "0")
        assert code == 0 and "no bound states" in out

    def test_price_ordering(self, capsys):
        _, deep, _ = run(capsys, "price", "--preset", "fig1", "--s0", "115", "--v0", "55.7859")
        _, mid, _ = run(capsys, "price", "--preset", "fig1", "--s0", "115", "--v0", "26.3401")
        p_deep = float(deep.splitlines()[1].split(",")[1])
        p_mid = float(mid.splitlines()[1].split(",")[1])
        assert 0 < p_deep < p_mid

    def test_const_and_td_engines_agree(self, capsys):
        _, a, _ = run(capsys, "price", "--engine", "const", "--s0", "115")
        _, b, _ = run(capsys, "price", "--engine", "td", "--r", "const:0.05", "--sigma", "const:0.3", "--s0", "115")
        pa, pb = float(a.splitlines()[1].split(",")[1]), float(b.splitlines()[1].split(",")[1])
        assert pa == pytest.approx(pb, rel=1e-10)

    def test_mc_deterministic(self, capsys):
        args = ("price", "--s0", "115", "--mc", "--paths", "8192", "--steps-per-year", "250", "--seed", "42")
        _, a, _ = run(capsys, *args)
        _, b, _ = run(capsys, *args)
        assert a == b
        assert a.splitlines()[1].split(",")[2] != ""

    def test_bad_strike_exit_2(self, capsys):
        code, _, err = run(capsys, "price", "--strike", "200")
        assert code == 2 and "corridor" in err

    def test_bad_config_exit_2(self, capsys, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("well.v0 = 1\nnope = 2\n")
        code, _, err = run(capsys, "price", "--config", str(p))
        assert code == 2 and "line 2" in err

    def test_save_and_reload_config(self, capsys, tmp_path):
        p = tmp_path / "run.cfg"
        run(capsys, "price", "--preset", "fig2", "--v0", "26.3401", "--save-config", str(p))
        code, out, _ = run(capsys, "price", "--config", str(p), "--s0", "110")
        assert code == 0
        cfg = parse_config(p.read_text())
        assert cfg.v0 == 26.3401 and cfg.r == ParamCurve.exp_decay(0.04, 0.01)

    @pytest.mark.parametrize("name,cmp", [("fig1", lambda td, fx: td >= fx), ("fig2", lambda td, fx: td <= fx)])
    def test_sweep_orderings(self, capsys, tmp_path, name, cmp):
        code, _, _ = run(capsys, "sweep", "--preset", name, "--out", str(tmp_path), "--svg")
        assert code == 0
        for v0 in REF_V0:
            td = read_curve_csv(tmp_path / f"{name}_v{v0:g}_td.csv")
            fx = read_curve_csv(tmp_path / f"{name}_v{v0:g}_fixed.csv")
            assert len(td) == len(fx) == 21
            assert all(cmp(a.price_spectral, b.price_spectral) for a, b in zip(td, fx))
            assert (tmp_path / f"{name}_v{v0:g}_td.svg").exists()

    def test_sweep_custom(self, capsys, tmp_path):
        out = tmp_path / "c.csv"
        code, _, _ = run(capsys, "sweep", "--preset", "custom", "--s0", "105:125:5", "--out", str(out))
        assert code == 0 and len(read_curve_csv(out)) == 5

    def test_sweep_unwritable(self, capsys):
        code, _, _ = run(capsys, "sweep", "--preset", "fig1", "--out", "/proc/no/such/dir")
        assert code == 2

    def test_validate_failure_path(self, capsys, tmp_path):
        report = tmp_path / "r.json"
        code, out, _ = run(
            capsys, "validate", "--only", "bound_counts,orthonormality_ck",
            "--override-tol", "orthonormality_ck=1e-30", "--json", str(report),
        )
        assert code == 1
        assert "FAILED: orthonormality_ck" in out
        data = json.loads(report.read_text())
        assert [c["name"] for c in data["checks"] if not c["passed"]] == ["orthonormality_ck"]

    def test_validate_pass_path(self, capsys):
        code, out, _ = run(capsys, "validate", "--only", "bound_counts,closed_form_exp_rate")
        assert code == 0 and "validation passed" in out

    def test_validate_reports_dropped_terms(self, capsys, tmp_path):
        report = tmp_path / "r.json"
        code, out, _ = run(
            capsys, "validate", "--only", "bound_counts", "--v0", "52.8", "--s0", "115", "--json", str(report)
        )
        assert code == 0
        dropped = json.loads(report.read_text())["dropped_terms"]
        assert len(dropped) == 1 and dropped[0]["n"] == 5 and 0 < dropped[0]["k2"] < 1
        assert "k2n=" in out

    def test_validate_unknown_check(self, capsys):
        code, _, err = run(capsys, "validate", "--only", "nope")
        assert code == 2 and "unknown check" in err
