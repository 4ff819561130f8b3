"""Batch command-line front end.

Subcommands: decompose, reconstruct, enhance, noise-sim, metrics,
roundtrip-check. Reports are JSON with floats rendered at 6 significant
digits and no timestamps, so a rerun with the same inputs and seed produces
byte-identical bytes. Exit codes: 0 success, 1 any per-file runtime
failure, 2 usage or configuration error.

A JSON config file may supply any long-option value (keys named like the
option, dashes or underscores); explicit flags win over the file.
"""

import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

import click
import numpy as np

from . import core, fileio, mappings, metrics, noise
from .backend import configure_threads, resolve_backend
from .errors import ConfigurationError, IcdError

SIDECAR_SUFFIX = "_icd.json"


# ---------------------------------------------------------------- helpers

def _round_floats(obj):
    """Render every float at 6 significant digits (round-half-even)."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.6g}")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    return obj


def _emit_report(report, path):
    text = json.dumps(_round_floats(report), indent=2) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        click.echo(text, nl=False)


def _with_config(ctx, params):
    """Merge a JSON config file under the explicit flags."""
    cfg_path = params.get("config")
    if not cfg_path:
        return params
    try:
        cfg = json.loads(Path(cfg_path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise click.UsageError(f"cannot read config file {cfg_path}: {e}")
    if not isinstance(cfg, dict):
        raise click.UsageError(f"config file {cfg_path} must hold a JSON object")
    merged = dict(params)
    for key, val in cfg.items():
        name = key.replace("-", "_")
        if name == "config" or name not in params:
            raise click.UsageError(f"unknown config key {key!r} for this command")
        if ctx.get_parameter_source(name) == click.core.ParameterSource.DEFAULT:
            merged[name] = tuple(val) if isinstance(params[name], tuple) else val
    return merged


def _positive(ctx, param, value):
    if value is not None and value <= 0:
        raise click.BadParameter("must be > 0")
    return value


def _collect_images(inputs):
    files = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            found = sorted(
                q for q in p.iterdir() if q.suffix.lower() in fileio.IMAGE_SUFFIXES
            )
            if not found:
                raise click.UsageError(f"directory {p} contains no supported images")
            files.extend(found)
        elif p.exists():
            files.append(p)
        else:
            raise click.UsageError(f"input path does not exist: {p}")
    if not files:
        raise click.UsageError("no input images given")
    return files


def _parallel(fn, items):
    items = list(items)
    try:
        workers = min(configure_threads(), max(len(items), 1))
    except ConfigurationError as e:
        raise click.UsageError(str(e))
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _finish(report, report_path, failed):
    _emit_report(report, report_path)
    if failed:
        sys.exit(1)


def _parse_grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise click.UsageError(f"grid must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise click.UsageError(f"grid values must be numbers, got {text!r}")
    if step <= 0 or stop < start:
        raise click.UsageError("grid needs step > 0 and stop >= start")
    return np.arange(start, stop + 0.5 * step, step)


def _parse_vec(text, name):
    try:
        vals = [float(p) for p in str(text).split(",")]
    except ValueError:
        raise click.UsageError(f"{name} must be a number or three comma-separated numbers")
    if len(vals) == 1:
        return vals[0]
    if len(vals) == 3:
        return np.asarray(vals)
    raise click.UsageError(f"{name} takes one or three values, got {len(vals)}")


def _build_gate(alpha, gamma):
    if alpha is None and gamma is None:
        return None
    try:
        return core.GateParams(
            alpha=0.5 if alpha is None else alpha, gamma=2.0 if gamma is None else gamma
        )
    except IcdError as e:
        raise click.UsageError(str(e))


# ---------------------------------------------------------------- group

@click.group()
def main():
    """Intensity-chromaticity decoupling toolkit."""


_common = [
    click.option("--eps", type=float, default=core.EPS_DEFAULT, show_default=True,
                 callback=_positive, help="Log-domain stabilizer."),
    click.option("--report", "report_path", type=click.Path(path_type=Path),
                 help="Write the JSON report here instead of stdout."),
    click.option("--config", type=click.Path(exists=True, path_type=Path),
                 help="JSON file with default option values."),
]


def _add(options):
    def deco(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn

    return deco


# ---------------------------------------------------------------- decompose

@main.command("decompose")
@click.argument("inputs", nargs=-1, type=click.Path(path_type=Path))
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path),
              help="Output directory for PFM maps and sidecars.")
@click.option("--baseline", type=click.Choice([b.value for b in core.Baseline]),
              default="max", show_default=True)
@_add(_common)
@click.pass_context
def cmd_decompose(ctx, **params):
    """Split images into intensity/chromaticity PFM pairs plus a sidecar."""
    p = _with_config(ctx, params)
    files = _collect_images(p["inputs"])
    out_dir = Path(p["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    eps, baseline = p["eps"], p["baseline"]

    def work(path):
        try:
            img = fileio.load_image(path)
            dec = core.decompose(img, eps, core.Baseline(baseline))
            stem = path.stem
            ipfm, cpfm = f"{stem}_intensity.pfm", f"{stem}_chroma.pfm"
            fileio.write_pfm(out_dir / ipfm, dec.intensity)
            fileio.write_pfm(out_dir / cpfm, dec.chroma)
            sidecar = {
                "source": str(path),
                "sha256": fileio.sha256_file(path),
                "eps": eps,
                "baseline": baseline,
                "width": dec.width,
                "height": dec.height,
                "intensity_pfm": ipfm,
                "chroma_pfm": cpfm,
            }
            sidecar_name = f"{stem}{SIDECAR_SUFFIX}"
            (out_dir / sidecar_name).write_text(
                json.dumps(_round_floats(sidecar), indent=2) + "\n"
            )
            return {"input": str(path), "sidecar": str(out_dir / sidecar_name)}
        except Exception as e:  # per-file failure, recorded and reported
            return {"input": str(path), "error": str(e)}

    results = _parallel(work, files)
    failed = sum("error" in r for r in results)
    report = {"command": "decompose", "eps": eps, "baseline": baseline,
              "results": results, "failed": failed}
    _finish(report, p["report_path"], failed)


# ---------------------------------------------------------------- reconstruct

def _sidecar_for(path):
    if path.name.endswith(SIDECAR_SUFFIX):
        return path
    stem = path.stem
    for tail in ("_intensity", "_chroma"):
        if stem.endswith(tail):
            stem = stem[: -len(tail)]
            break
    return path.with_name(f"{stem}{SIDECAR_SUFFIX}")


@main.command("reconstruct")
@click.argument("inputs", nargs=-1, type=click.Path(path_type=Path))
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path),
              help="Output directory for reconstructed PNGs.")
@click.option("--eps", type=float, default=None, callback=_positive,
              help="Override the sidecar eps (mismatch is recorded as a warning).")
@click.option("--report", "report_path", type=click.Path(path_type=Path),
              help="Write the JSON report here instead of stdout.")
@click.option("--config", type=click.Path(exists=True, path_type=Path),
              help="JSON file with default option values.")
@click.pass_context
def cmd_reconstruct(ctx, **params):
    """Rebuild PNGs from decompose output (sidecar JSONs or PFM paths)."""
    p = _with_config(ctx, params)
    items = []
    for item in p["inputs"]:
        path = Path(item)
        if path.is_dir():
            items.extend(sorted(path.glob(f"*{SIDECAR_SUFFIX}")))
        else:
            items.append(path)
    if not items:
        raise click.UsageError("no inputs given")
    out_dir = Path(p["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    eps_flag = p["eps"]

    def work(path):
        sidecar_path = _sidecar_for(path)
        try:
            if not sidecar_path.exists():
                raise IcdError(f"missing sidecar: expected {sidecar_path}")
            meta = json.loads(sidecar_path.read_text())
            warnings = []
            eps = float(meta["eps"])
            if eps_flag is not None and eps_flag != eps:
                warnings.append(
                    f"eps override {eps_flag:g} replaces sidecar value {eps:g}"
                )
                eps = eps_flag
            baseline = core.Baseline(meta.get("baseline", "max"))
            base = sidecar_path.parent
            inten = fileio.read_pfm(base / meta["intensity_pfm"])
            chroma = fileio.read_pfm(base / meta["chroma_pfm"])
            # feasibility clamps are a max-baseline notion; min/ave chroma
            # legitimately has the other sign, so it passes through untouched
            if baseline == core.Baseline.MAX:
                inten = core.constrain_intensity(inten, eps)
                chroma = core.constrain_chromaticity(chroma)
            dec = core.DecoupledImage(intensity=inten, chroma=chroma)
            img = core.reconstruct(dec, eps, baseline)
            out_name = sidecar_path.name[: -len(SIDECAR_SUFFIX)] + ".png"
            fileio.save_image_png(out_dir / out_name, img)
            entry = {"input": str(path), "output": str(out_dir / out_name)}
            if warnings:
                entry["warnings"] = warnings
            return entry
        except Exception as e:
            return {"input": str(path), "error": str(e)}

    results = _parallel(work, items)
    failed = sum("error" in r for r in results)
    report = {"command": "reconstruct", "results": results, "failed": failed}
    _finish(report, p["report_path"], failed)


# ---------------------------------------------------------------- enhance

@main.command("enhance")
@click.argument("inputs", nargs=-1, type=click.Path(path_type=Path))
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--variant", type=click.Choice([v.value for v in mappings.Variant]),
              default="residual", show_default=True)
@click.option("--delta-i-map", type=click.Path(exists=True, path_type=Path),
              help="PFM with the per-pixel intensity update.")
@click.option("--delta-c-map", type=click.Path(exists=True, path_type=Path),
              help="PFM with the per-pixel chromaticity update.")
@click.option("--L", "L", type=float, help="Division denominator.")
@click.option("--u", type=float, help="Fractional strength.")
@click.option("--a", type=float, help="Quadratic coefficient.")
@click.option("--gamma-c", type=str, help="Chroma exponent (scalar or r,g,b).")
@click.option("--w-map", type=click.Path(exists=True, path_type=Path),
              help="PFM with gate weights in [0, 1].")
@click.option("--alpha-c", type=str, help="Chroma affine scale (scalar or r,g,b).")
@click.option("--beta-c", type=str, help="Chroma affine offset (scalar or r,g,b).")
@click.option("--gate-alpha", type=float, help="Gate floor; enables the input gate.")
@click.option("--gate-gamma", type=float, help="Gate exponent; enables the input gate.")
@click.option("--fit", is_flag=True, help="Grid-search the variant's scalar parameter.")
@click.option("--grid", type=str, help="start:stop:step for --fit.")
@click.option("--ref", "refs", multiple=True, type=click.Path(path_type=Path),
              help="Reference image(s), paired with inputs in order.")
@_add(_common)
@click.pass_context
def cmd_enhance(ctx, **params):
    """Apply a mapping variant (optionally fitted against references)."""
    p = _with_config(ctx, params)
    files = _collect_images(p["inputs"])
    refs = _collect_images(p["refs"]) if p["refs"] else []
    if refs and len(refs) != len(files):
        raise click.UsageError(f"{len(files)} inputs but {len(refs)} references")
    if p["fit"]:
        if not refs:
            raise click.UsageError("--fit requires --ref images to fit against")
        if not p["grid"]:
            raise click.UsageError("--fit requires --grid start:stop:step")
        variant = mappings.Variant(p["variant"])
        if variant not in mappings.FIT_VARIANTS:
            raise click.UsageError(
                "--fit supports " + ", ".join(v.value for v in mappings.FIT_VARIANTS)
            )
        grid = _parse_grid(p["grid"])
    out_dir = Path(p["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    eps = p["eps"]
    gate = _build_gate(p["gate_alpha"], p["gate_gamma"])

    spec = None
    if not p["fit"]:
        kw = {}
        try:
            if p["delta_i_map"]:
                kw["delta_i"] = fileio.read_pfm(p["delta_i_map"])
            if p["delta_c_map"]:
                kw["delta_c"] = fileio.read_pfm(p["delta_c_map"])
            if p["w_map"]:
                kw["w"] = fileio.read_pfm(p["w_map"])
        except IcdError as e:
            raise click.ClickException(f"cannot read parameter map: {e}")
        for name in ("L", "u", "a"):
            if p[name] is not None:
                kw[name] = p[name]
        for name in ("gamma_c", "alpha_c", "beta_c"):
            if p[name] is not None:
                kw[name] = _parse_vec(p[name], name)
        try:
            spec = mappings.MappingSpec(variant=mappings.Variant(p["variant"]), **kw)
        except IcdError as e:
            raise click.UsageError(str(e))

    def work(pair):
        path, ref_path = pair
        try:
            img = fileio.load_image(path)
            ref = fileio.load_image(ref_path) if ref_path is not None else None
            entry = {"input": str(path)}
            if p["fit"]:
                best, loss = mappings.fit_scalar_param(img, ref, variant, grid, eps)
                local = mappings.MappingSpec(
                    variant=variant, **{mappings.FIT_PARAM[variant]: best}
                )
                entry["fitted_param"] = best
                entry["fit_loss"] = loss
            else:
                local = spec
            out = mappings.enhance(img, local, gate=gate, eps=eps)
            out_path = out_dir / f"{path.stem}_enh.png"
            fileio.save_image_png(out_path, out)
            entry["output"] = str(out_path)
            if ref is not None:
                entry["metrics"] = asdict(metrics.metrics_report(out, ref, eps))
            return entry
        except Exception as e:
            return {"input": str(path), "error": str(e)}

    pairs = list(zip(files, refs)) if refs else [(f, None) for f in files]
    results = _parallel(work, pairs)
    failed = sum("error" in r for r in results)
    report = {"command": "enhance", "variant": p["variant"], "eps": eps,
              "results": results, "failed": failed}
    _finish(report, p["report_path"], failed)


# ---------------------------------------------------------------- noise-sim

@main.command("noise-sim")
@click.argument("clean", type=click.Path(exists=True, path_type=Path))
@click.option("--sigma", type=float, default=0.01, show_default=True,
              help="Noise standard deviation.")
@click.option("--trials", type=click.IntRange(min=1), default=10000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_add(_common)
@click.pass_context
def cmd_noise_sim(ctx, **params):
    """Monte-Carlo check of the first-order chromaticity noise model."""
    p = _with_config(ctx, params)
    if p["sigma"] < 0:
        raise click.UsageError("sigma must be >= 0")
    img = fileio.load_image(p["clean"])
    rep = noise.monte_carlo_chroma_agreement(
        img, noise.NoiseModel(p["sigma"]), p["trials"], p["eps"], p["seed"]
    )
    report = {"command": "noise-sim", "input": str(p["clean"]),
              "backend": resolve_backend(), **rep.to_dict()}
    _emit_report(report, p["report_path"])


# ---------------------------------------------------------------- metrics

@main.command("metrics")
@click.option("--pair", "pairs", type=(click.Path(path_type=Path),) * 2, multiple=True,
              help="Output/reference image pair; repeatable.")
@_add(_common)
@click.pass_context
def cmd_metrics(ctx, **params):
    """Quality metrics and loss values for image pairs."""
    p = _with_config(ctx, params)
    pairs = [(Path(a), Path(b)) for a, b in p["pairs"]]
    if not pairs:
        raise click.UsageError("give at least one --pair OUT REF")
    eps = p["eps"]

    def work(pair):
        a, b = pair
        try:
            rep = metrics.metrics_report(fileio.load_image(a), fileio.load_image(b), eps)
            return {"pair": [str(a), str(b)], **asdict(rep)}
        except Exception as e:
            return {"pair": [str(a), str(b)], "error": str(e)}

    results = _parallel(work, pairs)
    failed = sum("error" in r for r in results)
    report = {"command": "metrics", "eps": eps, "results": results, "failed": failed}
    _finish(report, p["report_path"], failed)


# ---------------------------------------------------------------- roundtrip

@main.command("roundtrip-check")
@click.argument("inputs", nargs=-1, type=click.Path(path_type=Path))
@click.option("--baseline", type=click.Choice([b.value for b in core.Baseline]),
              default="max", show_default=True)
@click.option("--tolerance", type=float, default=1e-6, show_default=True,
              callback=_positive)
@_add(_common)
@click.pass_context
def cmd_roundtrip_check(ctx, **params):
    """Verify decompose -> reconstruct identity on images, in memory."""
    p = _with_config(ctx, params)
    files = _collect_images(p["inputs"])
    eps, baseline, tol = p["eps"], core.Baseline(p["baseline"]), p["tolerance"]

    def work(path):
        try:
            img = fileio.load_image(path)
            rec = core.reconstruct(core.decompose(img, eps, baseline), eps, baseline)
            err = float(np.abs(rec - img).max())
            return {"input": str(path), "max_abs_error": err, "ok": err <= tol}
        except Exception as e:
            return {"input": str(path), "error": str(e), "ok": False}

    results = _parallel(work, files)
    all_ok = all(r["ok"] for r in results)
    report = {"command": "roundtrip-check", "eps": eps, "baseline": baseline.value,
              "tolerance": tol, "results": results, "all_ok": all_ok}
    _finish(report, p["report_path"], not all_ok)


if __name__ == "__main__":
    main()
