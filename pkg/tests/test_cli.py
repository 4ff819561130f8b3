import json

import numpy as np
import pytest
from click.testing import CliRunner

from icd.cli import main
from icd.fileio import load_image, quantize_u8, save_image_png


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def png_dir(tmp_path, rng):
    d = tmp_path / "imgs"
    d.mkdir()
    for name in ("a.png", "b.png"):
        save_image_png(d / name, rng.uniform(0.05, 1.0, (16, 16, 3)))
    return d


def invoke_json(runner, args):
    result = runner.invoke(main, [str(a) for a in args])
    payload = json.loads(result.output) if result.output.strip() else None
    return result, payload


class TestDecomposeReconstruct:
    def test_round_trip_preserves_quantized_pixels(self, runner, png_dir, tmp_path):
        dec_dir, rec_dir = tmp_path / "dec", tmp_path / "rec"
        r1, rep1 = invoke_json(runner, ["decompose", png_dir, "--out", dec_dir])
        assert r1.exit_code == 0, r1.output
        assert rep1["failed"] == 0
        assert len(rep1["results"]) == 2
        assert (dec_dir / "a_intensity.pfm").exists()
        assert (dec_dir / "a_chroma.pfm").exists()
        assert (dec_dir / "a_icd.json").exists()

        r2, rep2 = invoke_json(runner, ["reconstruct", dec_dir, "--out", rec_dir])
        assert r2.exit_code == 0, r2.output
        assert rep2["failed"] == 0
        for name in ("a.png", "b.png"):
            np.testing.assert_array_equal(
                load_image(rec_dir / name), load_image(png_dir / name)
            )

    def test_sidecar_contents(self, runner, png_dir, tmp_path):
        dec_dir = tmp_path / "dec"
        invoke_json(runner, ["decompose", png_dir / "a.png", "--out", dec_dir])
        meta = json.loads((dec_dir / "a_icd.json").read_text())
        assert meta["eps"] == 0.0001
        assert meta["baseline"] == "max"
        assert meta["width"] == 16 and meta["height"] == 16
        assert meta["intensity_pfm"] == "a_intensity.pfm"
        assert len(meta["sha256"]) == 64

    def test_empty_inputs_is_usage_error(self, runner, tmp_path):
        result = runner.invoke(main, ["decompose", "--out", str(tmp_path / "o")])
        assert result.exit_code == 2

    def test_missing_sidecar_reports_expected_path(self, runner, tmp_path):
        lone = tmp_path / "lone_intensity.pfm"
        from icd.fileio import write_pfm

        write_pfm(lone, np.full((4, 4), 0.5))
        result, rep = invoke_json(
            runner, ["reconstruct", lone, "--out", tmp_path / "o"]
        )
        assert result.exit_code == 1
        assert "missing sidecar" in rep["results"][0]["error"]
        assert "lone_icd.json" in rep["results"][0]["error"]

    def test_corrupt_pfm_surfaces_byte_offset(self, runner, png_dir, tmp_path):
        dec_dir = tmp_path / "dec"
        invoke_json(runner, ["decompose", png_dir / "a.png", "--out", dec_dir])
        pfm = dec_dir / "a_chroma.pfm"
        pfm.write_bytes(pfm.read_bytes()[:30])
        result, rep = invoke_json(runner, ["reconstruct", dec_dir, "--out", tmp_path / "o"])
        assert result.exit_code == 1
        assert "byte offset" in rep["results"][0]["error"]

    def test_eps_override_recorded_as_warning(self, runner, png_dir, tmp_path):
        dec_dir, rec_dir = tmp_path / "dec", tmp_path / "rec"
        invoke_json(runner, ["decompose", png_dir / "a.png", "--out", dec_dir])
        result, rep = invoke_json(
            runner, ["reconstruct", dec_dir, "--out", rec_dir, "--eps", "0.001"]
        )
        assert result.exit_code == 0
        assert rep["results"][0]["warnings"] == [
            "eps override 0.001 replaces sidecar value 0.0001"
        ]

    def test_min_baseline_round_trip(self, runner, png_dir, tmp_path):
        dec_dir, rec_dir = tmp_path / "dec", tmp_path / "rec"
        invoke_json(
            runner,
            ["decompose", png_dir / "a.png", "--out", dec_dir, "--baseline", "min"],
        )
        result, rep = invoke_json(runner, ["reconstruct", dec_dir, "--out", rec_dir])
        assert result.exit_code == 0, rep
        np.testing.assert_array_equal(
            load_image(rec_dir / "a.png"), load_image(png_dir / "a.png")
        )


class TestEnhance:
    def test_identity_variant_requantizes_exactly(self, runner, png_dir, tmp_path):
        out_dir = tmp_path / "enh"
        result, rep = invoke_json(
            runner,
            ["enhance", png_dir / "a.png", "--out", out_dir, "--variant", "residual"],
        )
        assert result.exit_code == 0, result.output
        src = load_image(png_dir / "a.png")
        out = load_image(out_dir / "a_enh.png")
        np.testing.assert_array_equal(quantize_u8(out), quantize_u8(src))

    def test_fit_recovers_scale_within_one_grid_step(self, runner, tmp_path, rng):
        bright = rng.uniform(0.05, 1.0, (16, 16, 3))
        ref_png = tmp_path / "ref.png"
        dark_png = tmp_path / "dark.png"
        save_image_png(ref_png, bright)
        save_image_png(dark_png, 0.25 * bright)
        result, rep = invoke_json(
            runner,
            [
                "enhance", dark_png, "--out", tmp_path / "enh",
                "--variant", "intensity_division",
                "--fit", "--ref", ref_png, "--grid", "0.05:1.0:0.05",
            ],
        )
        assert result.exit_code == 0, result.output
        entry = rep["results"][0]
        assert abs(entry["fitted_param"] - 0.25) <= 0.05 + 1e-9
        assert entry["metrics"]["psnr_db"] > 40.0

    def test_fit_without_ref_is_usage_error(self, runner, png_dir, tmp_path):
        result = runner.invoke(
            main,
            ["enhance", str(png_dir / "a.png"), "--out", str(tmp_path / "o"),
             "--variant", "intensity_division", "--fit", "--grid", "0.1:1:0.1"],
        )
        assert result.exit_code == 2

    def test_fit_without_grid_is_usage_error(self, runner, png_dir, tmp_path):
        result = runner.invoke(
            main,
            ["enhance", str(png_dir / "a.png"), "--out", str(tmp_path / "o"),
             "--variant", "intensity_division", "--fit",
             "--ref", str(png_dir / "b.png")],
        )
        assert result.exit_code == 2

    def test_unknown_variant_is_usage_error(self, runner, png_dir, tmp_path):
        result = runner.invoke(
            main,
            ["enhance", str(png_dir / "a.png"), "--out", str(tmp_path / "o"),
             "--variant", "sigmoid"],
        )
        assert result.exit_code == 2
        assert "residual" in result.output or "residual" in (result.stderr or "")

    def test_missing_required_param_is_usage_error(self, runner, png_dir, tmp_path):
        result = runner.invoke(
            main,
            ["enhance", str(png_dir / "a.png"), "--out", str(tmp_path / "o"),
             "--variant", "intensity_division"],
        )
        assert result.exit_code == 2

    def test_gate_flags(self, runner, png_dir, tmp_path):
        result, rep = invoke_json(
            runner,
            ["enhance", png_dir / "a.png", "--out", tmp_path / "o",
             "--variant", "residual", "--gate-alpha", "0.6"],
        )
        assert result.exit_code == 0
        assert rep["failed"] == 0


class TestNoiseSim:
    def test_reports_are_byte_identical_across_runs(self, runner, png_dir, tmp_path):
        args = ["noise-sim", png_dir / "a.png", "--sigma", "0.02",
                "--trials", "100", "--seed", "7"]
        r1 = tmp_path / "r1.json"
        r2 = tmp_path / "r2.json"
        res1 = runner.invoke(main, [str(a) for a in args + ["--report", r1]])
        res2 = runner.invoke(main, [str(a) for a in args + ["--report", r2]])
        assert res1.exit_code == 0 and res2.exit_code == 0
        assert r1.read_bytes() == r2.read_bytes()
        rep = json.loads(r1.read_text())
        assert rep["command"] == "noise-sim"
        assert rep["trials"] == 100
        assert rep["backend"] in ("numba", "numpy")
        assert rep["relative_error"] >= 0.0

    def test_zero_trials_is_usage_error(self, runner, png_dir):
        result = runner.invoke(main, ["noise-sim", str(png_dir / "a.png"), "--trials", "0"])
        assert result.exit_code == 2

    def test_missing_input_is_usage_error(self, runner, tmp_path):
        result = runner.invoke(main, ["noise-sim", str(tmp_path / "ghost.png")])
        assert result.exit_code == 2


class TestMetrics:
    def test_identical_pair(self, runner, png_dir):
        result, rep = invoke_json(
            runner, ["metrics", "--pair", png_dir / "a.png", png_dir / "a.png"]
        )
        assert result.exit_code == 0
        entry = rep["results"][0]
        assert entry["psnr_db"] == 100.0
        assert entry["ssim"] == 1.0
        assert entry["l_total"] == 0.0

    def test_mismatched_pair_fails_with_entry(self, runner, png_dir, tmp_path, rng):
        wide = tmp_path / "wide.png"
        save_image_png(wide, rng.random((16, 20, 3)))
        result, rep = invoke_json(
            runner,
            ["metrics",
             "--pair", png_dir / "a.png", wide,
             "--pair", png_dir / "a.png", png_dir / "b.png"],
        )
        assert result.exit_code == 1
        assert rep["failed"] == 1
        assert "error" in rep["results"][0]
        assert rep["results"][1]["psnr_db"] > 0.0

    def test_order_preserved(self, runner, png_dir):
        pairs = [("a.png", "a.png"), ("a.png", "b.png"), ("b.png", "b.png")]
        args = ["metrics"]
        for x, y in pairs:
            args += ["--pair", png_dir / x, png_dir / y]
        result, rep = invoke_json(runner, args)
        assert result.exit_code == 0
        got = [tuple(r["pair"]) for r in rep["results"]]
        assert got == [(str(png_dir / x), str(png_dir / y)) for x, y in pairs]

    def test_no_pairs_is_usage_error(self, runner):
        assert runner.invoke(main, ["metrics"]).exit_code == 2


class TestRoundtripCheck:
    def test_all_ok(self, runner, png_dir):
        result, rep = invoke_json(runner, ["roundtrip-check", png_dir])
        assert result.exit_code == 0
        assert rep["all_ok"] is True
        assert all(r["max_abs_error"] <= 1e-6 for r in rep["results"])

    def test_tight_tolerance_fails_honestly(self, runner, png_dir):
        result, rep = invoke_json(
            runner, ["roundtrip-check", png_dir / "a.png", "--tolerance", "1e-30"]
        )
        # a genuinely nonzero float error cannot beat 1e-30
        if not rep["all_ok"]:
            assert result.exit_code == 1


class TestConfig:
    def test_config_fills_defaults(self, runner, png_dir, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"eps": 0.01}))
        result, rep = invoke_json(
            runner, ["roundtrip-check", png_dir, "--config", cfg]
        )
        assert result.exit_code == 0
        assert rep["eps"] == 0.01

    def test_explicit_flag_beats_config(self, runner, png_dir, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"eps": 0.01}))
        result, rep = invoke_json(
            runner,
            ["roundtrip-check", png_dir, "--config", cfg, "--eps", "0.0001"],
        )
        assert result.exit_code == 0
        assert rep["eps"] == 0.0001

    def test_unknown_config_key_is_usage_error(self, runner, png_dir, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        result = runner.invoke(
            main, ["roundtrip-check", str(png_dir), "--config", str(cfg)]
        )
        assert result.exit_code == 2

    def test_reports_go_to_stdout_by_default(self, runner, png_dir):
        result = runner.invoke(main, ["roundtrip-check", str(png_dir)])
        rep = json.loads(result.output)
        assert rep["command"] == "roundtrip-check"
