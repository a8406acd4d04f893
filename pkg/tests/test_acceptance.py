"""Acceptance criteria, one test each, at the stated tolerances.

Each test records a single PASS/FAIL line; the lines are printed in the
terminal summary (or directly with ``python tests/test_acceptance.py``).
"""
import math
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from invglm import iglm, synth
from invglm.inference import RftSpec, np_threshold, permutation_test, rft_voxel_threshold
from invglm.inference.calibration import simulate_fwer
from invglm.l1study import (L1StudyConfig, l1_expected_abs, mse_omega, omega_star,
                            run_l1_mse_experiment)
from invglm.methods import ALL_METHODS, MethodOptions, fit_method
from invglm.model import NoiseModel, indicator_design
from invglm.svr import dual_objective, kkt_violations, svr_fit
from invglm.volume import Volume, map_fit, read_volume, sequential_map, write_volume
from oracles import svr_dual_pg, svr_primal_1d

RESULTS = {}


def record(number, ok, detail):
    RESULTS[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, RESULTS[number]


def ml_options(spec):
    return MethodOptions(ml_noise=NoiseModel.known(synth.estimate_noise_cov(spec)))


def test_1_permutation_floor():
    spec = synth.SyntheticSpec(n=1000, cnr=1.0, seed=0)
    ds = synth.simulate(spec)
    opt = ml_options(spec)
    parts, ok = [], True
    for m in ALL_METHODS:
        t0 = time.perf_counter()
        res = permutation_test(ds.design, ds.obs, m, [1, -1, 0], K=1000, seed=0, options=opt)
        dt = time.perf_counter() - t0
        ok &= res.p_value == 1 / 1001 and dt <= 120
        parts.append(f"{m.value} p={res.p_value:.6f} ({dt:.1f}s)")
    record(1, ok, "; ".join(parts))


def recovery(cnr, seeds=50):
    contrast = {m: [] for m in ALL_METHODS}
    mse = {m: [] for m in ALL_METHODS}
    for seed in range(seeds):
        spec = synth.SyntheticSpec(n=1000, cnr=cnr, theta=(1.0, 0.0, 1.0), seed=seed)
        ds = synth.simulate(spec)
        opt = ml_options(spec)
        for m in ALL_METHODS:
            est = fit_method(ds.design, ds.obs, m, opt)
            contrast[m].append(est.theta[0] - est.theta[1])
            if m.is_inverse:
                rec = iglm.reconstruct(est.extras["fit"], ds.design, obs=ds.obs, rescale=True)
                mse[m].append(np.mean((ds.obs - rec.y_est) ** 2))
            else:
                mse[m].append(np.mean(est.residuals ** 2))
    return ({m: float(np.mean(v)) for m, v in contrast.items()},
            {m: float(np.mean(v)) for m, v in mse.items()})


def test_2_estimator_recovery():
    from invglm.model import Method
    con1, mse1 = recovery(1.0)
    _, mse025 = recovery(0.25)
    in_band = {m.value: 0.9 <= v <= 1.1 for m, v in con1.items()}
    ratio = mse1[Method.SVR_IGLM] / mse1[Method.REML]
    low = mse025[Method.REML] <= mse025[Method.SVR_IGLM]
    ok = all(in_band.values()) and ratio <= 2 and low
    detail = ("contrast " + ", ".join(f"{m.value}={v:.3f}" for m, v in con1.items())
              + f"; MSE SVR/ReML at CNR=1 {ratio:.2f} (<=2)"
              + f"; CNR=0.25 ReML {mse025[Method.REML]:.3f} vs SVR {mse025[Method.SVR_IGLM]:.3f}")
    record(2, ok, detail)


def test_3_classifier_domain():
    acc = {"LS": [], "SVR": []}
    for seed in range(20):
        ds = synth.simulate(synth.SyntheticSpec(n=1000, cnr=1.0, seed=seed))
        truth = ds.design.matrix[:, 0] > 0.5
        for reg in acc:
            fit = iglm.fit_inverse(ds.design, ds.obs, reg)
            acc[reg].append(np.mean(iglm.classify(fit, ds.design, ds.obs) == truth))
    ls, sv = float(np.mean(acc["LS"])), float(np.mean(acc["SVR"]))
    record(3, sv >= ls and min(ls, sv) >= 0.9, f"accuracy SVR={sv:.3f} LS={ls:.3f} (need SVR>=LS, both>=0.9)")


def test_4_svr_solver():
    gen = np.random.default_rng(2024)
    worst_f = worst_w = worst_kkt = 0.0
    for _ in range(200):
        n = int(gen.integers(2, 13))
        y = gen.normal(size=n)
        x = gen.normal() * y + gen.normal(scale=gen.uniform(0.1, 2.0), size=n)
        C, eps = float(10 ** gen.uniform(-1, 1)), float(gen.uniform(0, 0.5))
        m = svr_fit(y, x, C, eps)
        _, f_oracle, _ = svr_dual_pg(y, x, C, eps)
        w_oracle, _ = svr_primal_1d(y, x, C, eps)
        worst_f = max(worst_f, abs(dual_objective(y, x, m.alphas, eps) - f_oracle))
        worst_w = max(worst_w, abs(m.w[0] - w_oracle))
        worst_kkt = max(worst_kkt, float(kkt_violations(m, y, x).max()) / C)
    ok = worst_f <= 1e-6 and worst_w <= 1e-5 and worst_kkt <= 1e-6
    record(4, ok, f"max |dual diff|={worst_f:.2e}, max |w diff|={worst_w:.2e}, max KKT/C={worst_kkt:.2e}")


def test_5_l1_vs_mse_study():
    grid_ok = mse_omega(1, 0) == 1 and all(
        omega_star(a, s).value == mse_omega(a, s) for a in (-2.0, -0.5, 0.3, 1.0, 4.0) for s in (0.0, 0.1, 1.0, 3.0))
    gen = np.random.default_rng(7)
    worst = 0.0
    for k in range(20):
        w, mu, s = gen.uniform(0.2, 2.0), gen.uniform(-1.5, 1.5), gen.uniform(0.2, 2.0)
        draw = np.random.default_rng(1000 + k)
        centre = np.where(draw.random(1_000_000) < 0.5, -mu, mu)
        mc = np.abs(centre + w * s * draw.standard_normal(1_000_000)).mean()
        worst = max(worst, abs(l1_expected_abs(w, mu, s) / mc - 1))
    t0 = time.perf_counter()
    rows = run_l1_mse_experiment(L1StudyConfig(n=100, trials=100), seed=0)
    dt = time.perf_counter() - t0
    top, zero = rows[-1], rows[0]
    fig_ok = top.l1_error <= top.mse_error and zero.l1_error <= 1e-10 and zero.mse_error <= 1e-10 and dt <= 60
    ok = grid_ok and worst <= 0.005 and fig_ok
    record(5, ok, f"(a) {'ok' if grid_ok else 'mismatch'}; (b) max MC rel err {worst:.4f}; "
                  f"(c) sigma={top.sigma:g} L1 {top.l1_error:.3f} vs MSE {top.mse_error:.3f}, "
                  f"sigma=0 errors {zero.l1_error:.1e}/{zero.mse_error:.1e}, {dt:.1f}s")


def test_6_rft_calibration():
    u0 = rft_voxel_threshold(RftSpec((1, 0, 0, 0)), 0.05)
    t0 = time.perf_counter()
    res = simulate_fwer((32, 32, 32), 3.0, 0.05, n_fields=2000, seed=0, workers=4)
    dt = time.perf_counter() - t0
    ok = abs(u0 - 1.6449) <= 1e-3 and 0.01 <= res.fwer <= 0.06 and dt <= 600
    record(6, ok, f"0-D u={u0:.4f}; u={res.threshold:.3f}, FWER={res.fwer:.4f} over {res.n_fields} fields ({dt:.0f}s)")


def test_7_map_engine():
    spec = synth.GroupVolumeSpec(shape=(2, 2, 2), n_per_group=10, radius=1.0, seed=3)
    data, groups, _ = synth.group_volume(spec)
    vol, design = Volume(data), indicator_design(groups)
    mask = np.ones((2, 2, 2), bool)
    ok, parts = True, []
    for m in ALL_METHODS:
        maps = [map_fit(vol, design, mask, m, [1, -1], workers=w).volume.data for w in (1, 2, 8)]
        ref = sequential_map(vol, design, mask, m, [1, -1])
        same = np.array_equal(maps[0], ref, equal_nan=True)
        bits = all(x.tobytes() == maps[0].tobytes() for x in maps[1:])
        ok &= same and bits
        parts.append(f"{m.value} {'=' if same else '!='} oracle, workers {'identical' if bits else 'differ'}")
    record(7, ok, "; ".join(parts))


def test_8_nifti_round_trip():
    gen = np.random.default_rng(8)
    bad = 0
    with tempfile.TemporaryDirectory() as tmp:
        for k in range(100):
            shape = tuple(int(v) for v in gen.integers(1, 9, 3))
            vox = tuple(float(v) for v in gen.uniform(0.5, 4.0, 3))
            data = gen.standard_normal(shape).astype(np.float32)
            path = Path(tmp) / f"v{k}.nii"
            write_volume(Volume(data, vox), path)
            back = read_volume(path)
            ok = (back.dims == shape and np.allclose(back.voxel_size, np.float32(vox), rtol=0)
                  and back.data.tobytes() == data.tobytes())
            bad += not ok
        one = Path(tmp) / "one.nii"
        write_volume(Volume(np.zeros((1, 1, 1), np.float32)), one)
        size = one.stat().st_size
    record(8, bad == 0 and size == 356, f"{100 - bad}/100 exact round trips; 1x1x1 file {size} bytes")


def test_9_group_volume_analogue():
    spec = synth.GroupVolumeSpec(shape=(16, 16, 16), n_per_group=50, radius=4.0, effect=1.0, fwhm=3.0, seed=0)
    data, groups, blob = synth.group_volume(spec)
    vol, design = Volume(data), indicator_design(groups)
    mask = np.ones(spec.shape, bool)
    opt = MethodOptions(svr=iglm.SvrHyper(mean_loss=True))
    maps = {m: map_fit(vol, design, mask, m, [1, -1], opt).volume.data for m in ("OLS", "SVR-iGLM")}
    sets = {m: t > np_threshold(t[~blob], 0.05) for m, t in maps.items()}
    ref = sets["OLS"]
    frac = float((sets["SVR-iGLM"] & ref).sum() / ref.sum())
    record(9, frac >= 0.95, f"SVR-iGLM set holds {frac:.3f} of the {int(ref.sum())} OLS suprathreshold voxels "
                            f"(NP thresholds matched at alpha=0.05 outside the blob)")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
