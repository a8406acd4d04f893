"""Command-line front end: simulate, fit, infer, l1study, report.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import glm, iglm, l1study, synth
from .config import RunConfig, dump_json, load_config, merge_into
from .errors import ConfigError, InvGlmError
from .inference import (RftSpec, estimate_smoothness, np_threshold, permutation_test,
                        resel_counts, rft_voxel_threshold)
from .methods import MethodOptions, fit_method
from .model import ColumnRole, DesignMatrix, Method, NoiseModel, load_design_csv
from .svgplot import Figure
from .volume import Volume, load_mask, map_fit, read_volume, write_volume

log = logging.getLogger("invglm")

ENV_OUT = "INVGLM_OUTPUT_DIR"
ENV_WORKERS = "INVGLM_WORKERS"


class UsageError(Exception):
    pass


def slug(method) -> str:
    return Method.parse(method).value.lower()


# ---------------------------------------------------------------- inputs

def _need(path, what) -> Path:
    if not path:
        raise ConfigError(what, "is required")
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"{what}: file not found: {p}")
    return p


def _read_columns(path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = [h.strip() for h in rows[0]]
    data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=np.float64)
    return {h: data[:, i] for i, h in enumerate(header)}


def _read_obs(path) -> np.ndarray:
    vals = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                vals.append(float(row[-1]))
            except ValueError:
                continue  # header
    return np.asarray(vals)


def load_timeseries(cfg: RunConfig):
    """Design and observation vector from either a simulated dataset or design/obs files."""
    f = cfg.fit
    if f.dataset_csv:
        cols = _read_columns(_need(f.dataset_csv, "fit.dataset_csv"))
        x = np.column_stack([cols["task"], cols["rest"], cols["covariate"]])
        design = DesignMatrix(x, (ColumnRole.COVARIATE,) * 3, ("task", "rest", "covariate"), (0, 1))
        return design, cols["obs"]
    design = load_design_csv(_need(f.design_csv, "fit.design_csv"), _need(f.roles_json, "fit.roles_json"),
                             standardize=f.standardize)
    return design, _read_obs(_need(f.obs_csv, "fit.obs_csv"))


def _synthetic_spec(cfg: RunConfig) -> synth.SyntheticSpec:
    f = cfg.fit
    block = f.synthetic
    seed = cfg.seed
    if block is None and f.dataset_csv:
        side = Path(f.dataset_csv).with_name("simulate.resolved.json")
        if side.exists():
            prev = json.loads(side.read_text())
            block, seed = prev["simulate"], prev["seed"]
    if block is None:
        raise ConfigError("fit.synthetic", "ml_noise='synthetic' needs the generator settings")
    keys = {fl.name for fl in dataclasses.fields(synth.SyntheticSpec)}
    kw = {k: v for k, v in block.items() if k in keys}
    kw["seed"] = block.get("seed", seed)
    return synth.SyntheticSpec(**kw)


def method_options(cfg: RunConfig, n: int) -> MethodOptions:
    f = cfg.fit
    ml_noise = None
    if f.ml_noise == "synthetic":
        ml_noise = NoiseModel.known(synth.estimate_noise_cov(_synthetic_spec(cfg)))
    reml_noise = NoiseModel.from_components(glm.ar1_components(n)) if f.reml_components == "ar1" else None
    s = f.svr
    return MethodOptions(ml_noise=ml_noise, reml_noise=reml_noise,
                         svr=iglm.SvrHyper(float(s.C), float(s.epsilon), bool(s.standardize), bool(s.mean_loss)),
                         lambda_mix=tuple(f.lambda_mix) if f.lambda_mix is not None else None,
                         rescale=bool(f.rescale))


def default_contrast(design: DesignMatrix, given=None) -> np.ndarray:
    if given is not None:
        c = np.asarray(given, dtype=np.float64)
        if c.shape != (design.m,):
            raise ConfigError("fit.contrast", f"needs {design.m} entries, got {c.size}")
        return c
    c = np.zeros(design.m)
    conds = design.conditions
    if len(conds) >= 2:
        c[conds[0]], c[conds[1]] = 1.0, -1.0
    else:
        c[conds[0] if conds else 0] = 1.0
    return c


# ---------------------------------------------------------------- simulate

def cmd_simulate(cfg: RunConfig, out: Path) -> None:
    s = cfg.simulate
    if s.kind == "timeseries":
        spec = synth.SyntheticSpec(n=int(s.n), block_len=int(s.block_len), cnr=float(s.cnr), cv=float(s.cv),
                                   seed=cfg.seed, dt=float(s.dt), rest=s.rest)
        ds = synth.simulate(spec)
        synth.write_csv(ds, out / "dataset.csv")
        log.info("wrote %d-row dataset (sigma2=%.6g)", spec.n, ds.noise_sigma2)
        return
    spec = synth.GroupVolumeSpec(tuple(int(v) for v in s.shape), int(s.n_per_group), float(s.radius),
                                 float(s.effect), 0.0, float(s.fwhm), cfg.seed)
    data, groups, blob = synth.group_volume(spec)
    write_volume(Volume(data.astype(np.float32)), out / "subjects.nii")
    write_volume(Volume(np.ones(spec.shape, np.float32)), out / "mask.nii")
    write_volume(Volume(blob.astype(np.float32)), out / "blob.nii")
    write_volume(Volume((~blob).astype(np.float32)), out / "null_mask.nii")
    with open(out / "design.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["g0", "g1"])
        for g in groups:
            w.writerow([int(g == 0), int(g == 1)])
    dump_json({"roles": {"g0": "indicator", "g1": "indicator"}}, out / "roles.json")
    log.info("wrote group volume %s with %d subjects", spec.shape, data.shape[3])


# ---------------------------------------------------------------- fit

def _fit_timeseries(cfg, out):
    design, y = load_timeseries(cfg)
    c = default_contrast(design, cfg.fit.contrast)
    opt = method_options(cfg, design.n)
    records = {}
    for name in cfg.fit.methods:
        m = Method.parse(name)
        est = fit_method(design, y, m, opt)
        rec = est.to_dict()
        rec["contrast_value"] = float(c @ est.theta)
        try:
            rec["t"] = glm.t_statistic(est, c)
        except InvGlmError as exc:
            rec["t"] = None
            log.warning("%s: T undefined (%s)", m.value, exc)
        records[m.value] = rec
        log.info("%s theta=%s", m.value, np.array2string(est.theta, precision=6))
    dump_json({"mode": "timeseries", "n": design.n, "columns": list(design.names),
               "contrast": c.tolist(), "methods": records}, out / "estimates.json")


def _load_volume_inputs(cfg):
    f = cfg.fit
    vol = read_volume(_need(f.images, "fit.images"))
    if vol.data.ndim != 4:
        raise ConfigError("fit.images", "must be a 4-D volume with subjects on the last axis")
    design = load_design_csv(_need(f.design_csv, "fit.design_csv"), _need(f.roles_json, "fit.roles_json"),
                             standardize=f.standardize)
    mask = load_mask(_need(f.mask, "fit.mask"), vol.dims) if f.mask else np.ones(vol.dims, bool)
    return vol, design, mask


def _fit_volume(cfg, out):
    vol, design, mask = _load_volume_inputs(cfg)
    c = default_contrast(design, cfg.fit.contrast)
    opt = method_options(cfg, design.n)
    ref = map_fit(vol, design, mask, Method.OLS, c, opt, cfg.workers, keep_residuals=True)
    sm = estimate_smoothness(ref.residuals, mask)
    maps = {}
    for name in cfg.fit.methods:
        m = Method.parse(name)
        sm_map = ref if m is Method.OLS else map_fit(vol, design, mask, m, c, opt, cfg.workers)
        tag = slug(m)
        write_volume(Volume(sm_map.volume.data.astype(np.float32), vol.voxel_size), out / f"tmap_{tag}.nii")
        write_volume(Volume(sm_map.contrast_map.astype(np.float32), vol.voxel_size), out / f"con_{tag}.nii")
        for k in range(design.m):
            write_volume(Volume(sm_map.theta_maps[..., k].astype(np.float32), vol.voxel_size),
                         out / f"theta_{tag}_{k + 1}.nii")
        maps[m.value] = {"tmap": f"tmap_{tag}.nii", "failures": sm_map.failures, "df": sm_map.df}
        log.info("%s map: %d failed voxels", m.value, sm_map.failures)
    dump_json({"mode": "volume", "contrast": c.tolist(), "fwhm": list(sm.fwhm),
               "resel_volume": sm.resel_volume, "n_voxels": int(mask.sum()), "df": ref.df,
               "methods": maps}, out / "maps.json")


def cmd_fit(cfg: RunConfig, out: Path) -> None:
    if cfg.fit.images:
        _fit_volume(cfg, out)
    else:
        _fit_timeseries(cfg, out)


# ---------------------------------------------------------------- infer

def _fit_run(cfg: RunConfig) -> tuple:
    if not cfg.infer.fit_dir:
        raise ConfigError("infer.fit_dir", "is required")
    fit_dir = Path(cfg.infer.fit_dir)
    prev = _need(fit_dir / "fit.resolved.json", "infer.fit_dir")
    data = json.loads(prev.read_text())
    data.pop("command", None)
    fit_cfg = RunConfig()
    merge_into(fit_cfg, data)
    return fit_dir, fit_cfg


def _null_plot(res, path):
    d = res.to_dict()["null_histogram"]
    fig = Figure(f"Permutation null, {res.method}", "contrast value", "count")
    fig.hist(d["counts"], d["edges"], "#bbbbbb")
    fig.vline(res.observed, f"observed (p={res.p_value:.4g})")
    fig.save(path)


def _infer_timeseries(cfg, fit_dir, fit_cfg, out, report):
    design, y = load_timeseries(fit_cfg)
    est = json.loads((fit_dir / "estimates.json").read_text())
    c = np.asarray(est["contrast"])
    opt = method_options(fit_cfg, design.n)
    methods = cfg.infer.methods or list(est["methods"])
    report["contrast"] = c.tolist()
    for name in methods:
        res = permutation_test(design, y, name, c, int(cfg.infer.permutations), cfg.seed, opt, cfg.workers)
        report["permutation"].append(res.to_dict())
        _null_plot(res, out / f"null_{slug(name)}.svg")
        log.info("%s permutation p=%.6g (%d failures)", res.method, res.p_value, res.failures)
    if cfg.infer.resels is not None:
        df = float(design.n - design.m)
        for a in cfg.infer.alphas:
            spec = RftSpec(tuple(cfg.infer.resels), df, "T")
            u = rft_voxel_threshold(spec, float(a), cfg.infer.bonferroni)
            report["thresholds"].append({"kind": "rft", "alpha": float(a), "u": u,
                                         "resels": list(spec.resels), "df": df})
        u0 = next(t["u"] for t in report["thresholds"] if t["alpha"] == report["thresholds"][0]["alpha"])
        for name, rec in est["methods"].items():
            if name in methods and rec.get("t") is not None:
                report["suprathreshold"].append({"method": name, "kind": "rft", "u": u0,
                                                 "count": int(rec["t"] > u0)})


def _infer_volume(cfg, fit_dir, fit_cfg, out, report):
    maps = json.loads((fit_dir / "maps.json").read_text())
    _, _, mask = _load_volume_inputs(fit_cfg)
    report["contrast"] = maps["contrast"]
    fwhm = maps["fwhm"]
    resels = resel_counts(mask, fwhm) if cfg.infer.resels is None else np.asarray(cfg.infer.resels, float)
    df = float(maps["df"])
    for a in cfg.infer.alphas:
        spec = RftSpec(tuple(resels), df, "T", int(mask.sum()))
        report["thresholds"].append({"kind": "rft", "alpha": float(a),
                                     "u": rft_voxel_threshold(spec, float(a), cfg.infer.bonferroni),
                                     "resels": [float(v) for v in resels], "df": df, "fwhm": list(fwhm)})
    u_rft = report["thresholds"][0]["u"]
    null = load_mask(_need(cfg.infer.null_mask, "infer.null_mask"), mask.shape) & mask \
        if cfg.infer.null_mask else None
    methods = cfg.infer.methods or list(maps["methods"])
    sets = {}
    for name in methods:
        m = Method.parse(name).value
        t = read_volume(fit_dir / maps["methods"][m]["tmap"]).data.astype(np.float64)
        finite = np.isfinite(t) & mask
        sets[(m, "rft")] = finite & (np.where(finite, t, -np.inf) > u_rft)
        report["suprathreshold"].append({"method": m, "kind": "rft", "u": u_rft,
                                         "count": int(sets[(m, "rft")].sum())})
        fig = Figure(f"T map values, {m}", "T", "voxels")
        counts, edges = np.histogram(t[finite], bins=64)
        fig.hist(counts, edges).vline(u_rft, "RFT")
        if null is not None:
            vals = t[null & finite]
            u_np = np_threshold(vals, float(cfg.infer.np_alpha))
            report["thresholds"].append({"kind": "np", "alpha": float(cfg.infer.np_alpha), "u": u_np,
                                         "method": m})
            sets[(m, "np")] = finite & (np.where(finite, t, -np.inf) > u_np)
            report["suprathreshold"].append({"method": m, "kind": "np", "u": u_np,
                                             "count": int(sets[(m, "np")].sum())})
            fig.vline(u_np, "NP", "#2471a3")
        fig.save(out / f"tvalues_{slug(m)}.svg")
    ref = Method.OLS.value
    for (m, kind), s in sets.items():
        if m == ref or (ref, kind) not in sets:
            continue
        base = sets[(ref, kind)]
        frac = float((s & base).sum() / base.sum()) if base.sum() else None
        report.setdefault("containment", []).append({"method": m, "reference": ref, "kind": kind,
                                                     "fraction": frac})


def cmd_infer(cfg: RunConfig, out: Path) -> None:
    fit_dir, fit_cfg = _fit_run(cfg)
    report = {"command": "infer", "seed": cfg.seed, "permutation": [], "thresholds": [],
              "suprathreshold": []}
    if (fit_dir / "maps.json").exists():
        report["mode"] = "volume"
        _infer_volume(cfg, fit_dir, fit_cfg, out, report)
    else:
        report["mode"] = "timeseries"
        _infer_timeseries(cfg, fit_dir, fit_cfg, out, report)
    validate_report(report)
    dump_json(report, out / "report.json")


# ---------------------------------------------------------------- l1study / report

def cmd_l1study(cfg: RunConfig, out: Path) -> None:
    c = cfg.l1study
    grid = tuple(float(v) for v in np.round(np.linspace(0.0, float(c.sigma_max), int(c.sigma_steps)), 10))
    rows = l1study.run_l1_mse_experiment(
        l1study.L1StudyConfig(int(c.n), int(c.trials), float(c.theta_diff), grid), cfg.seed)
    l1study.write_table(rows, out / "l1_table.csv")
    l1study.plot_table(rows, out / "l1_plot.svg")
    log.info("sigma=%g: L1 error %.4g, MSE error %.4g", rows[-1].sigma, rows[-1].l1_error, rows[-1].mse_error)


def load_schema(path: Optional[str] = None) -> dict:
    if path:
        return json.loads(Path(path).read_text())
    return json.loads(resources.files("invglm").joinpath("schemas/report.schema.json").read_text())


def validate_report(report: dict, schema_path: Optional[str] = None) -> None:
    import jsonschema

    jsonschema.validate(report, load_schema(schema_path))


def cmd_report(cfg: RunConfig, out: Path) -> None:
    path = _need(cfg.report.report_json or str(out / "report.json"), "report.report_json")
    report = json.loads(path.read_text())
    validate_report(report, cfg.report.schema)
    lines = [f"# Inference report ({report['mode']})", "", f"seed: {report['seed']}", ""]
    if report["permutation"]:
        lines += ["| method | observed | p | K | failures |", "|---|---|---|---|---|"]
        lines += [f"| {p['method']} | {p['observed']:.6g} | {p['p']:.6g} | {p['K']} | {p['failures']} |"
                  for p in report["permutation"]]
        lines.append("")
    if report["thresholds"]:
        lines += ["| threshold | alpha | u | method |", "|---|---|---|---|"]
        lines += [f"| {t['kind']} | {t['alpha']:g} | {t['u']:.4f} | {t.get('method', '')} |"
                  for t in report["thresholds"]]
        lines.append("")
    if report["suprathreshold"]:
        lines += ["| method | threshold | u | voxels above |", "|---|---|---|---|"]
        lines += [f"| {s['method']} | {s['kind']} | {s['u']:.4f} | {s['count']} |"
                  for s in report["suprathreshold"]]
        lines.append("")
    for c in report.get("containment", []):
        frac = "n/a" if c["fraction"] is None else f"{c['fraction']:.3f}"
        lines.append(f"- {c['method']} contains {frac} of the {c['reference']} set ({c['kind']})")
    (out / "report.md").write_text("\n".join(lines) + "\n")


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "infer": cmd_infer,
            "l1study": cmd_l1study, "report": cmd_report}


# ---------------------------------------------------------------- entry point

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="invglm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON run configuration")
        s.add_argument("--out", help="output directory")
        s.add_argument("--seed", type=int)
        s.add_argument("--workers", type=int)
        s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config field, e.g. simulate.cnr=0.5")
    return p


def _setup_logging(out: Path):
    log.setLevel(logging.INFO)
    for h in list(log.handlers):
        log.removeHandler(h)
        h.close()
    fh = logging.FileHandler(out / "run.log", mode="a")
    fh.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    log.addHandler(fh)
    err = logging.StreamHandler(sys.stderr)
    err.setLevel(logging.WARNING)
    err.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    log.addHandler(err)
    return fh


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        overrides = list(args.set)
        env_out, env_workers = os.environ.get(ENV_OUT), os.environ.get(ENV_WORKERS)
        if env_out:
            overrides.insert(0, f"out_dir={json.dumps(env_out)}")
        if env_workers:
            overrides.insert(0, f"workers={env_workers}")
        if args.out:
            overrides.append(f"out_dir={json.dumps(args.out)}")
        if args.seed is not None:
            overrides.append(f"seed={args.seed}")
        if args.workers is not None:
            overrides.append(f"workers={args.workers}")
        cfg = load_config(args.config, overrides, args.command)
    except (UsageError, ConfigError, FileNotFoundError) as exc:
        print(f"invglm: error: {exc}", file=sys.stderr)
        return 2
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    handler = _setup_logging(out)
    try:
        dump_json(cfg.to_dict(), out / "resolved_config.json")
        dump_json(cfg.to_dict(), out / f"{cfg.command}.resolved.json")
        COMMANDS[cfg.command](cfg, out)
        return 0
    except (ConfigError, FileNotFoundError) as exc:
        log.error("%s", exc)
        return 2
    except Exception as exc:  # noqa: BLE001 - any failure maps to exit 1
        log.error("%s: %s", type(exc).__name__, exc)
        return 1
    finally:
        handler.close()


if __name__ == "__main__":
    sys.exit(main())
