"""L1 versus MSE inverse-weight error as a function of the noise level.

    python scripts/l1_study.py --out results/l1
"""
import argparse
from pathlib import Path

import numpy as np

from invglm import l1study


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--sigma-max", type=float, default=2.0)
    ap.add_argument("--steps", type=int, default=21)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/l1")
    args = ap.parse_args()
    grid = tuple(np.round(np.linspace(0, args.sigma_max, args.steps), 10))
    rows = l1study.run_l1_mse_experiment(l1study.L1StudyConfig(args.n, args.trials, 1.0, grid), args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    l1study.write_table(rows, out / "l1_table.csv")
    l1study.plot_table(rows, out / "l1_plot.svg")
    for r in rows:
        star = l1study.omega_star(1.0, r.sigma)
        print(f"sigma={r.sigma:.2f}  L1={r.l1_error:.4f}  MSE={r.mse_error:.4f}  "
              f"omega*={star.value:.4f} ({'ok' if star.reliable else 'unreliable'})")


if __name__ == "__main__":
    main()
