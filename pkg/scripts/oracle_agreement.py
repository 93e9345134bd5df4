"""Compare the cone-program norm with a frequency grid and the dual bound on random systems."""
import argparse
import time
from dataclasses import dataclass

import numpy as np

from gramcone import freq_grid_hinf, hinf_primal, is_controllable, random_system
from gramcone.sdp import SolverParams


@dataclass
class Config:
    count: int = 20
    seed: int = 1234
    grid: int = 10_000
    max_n: int = 4
    tol: float = 1e-6


def main(cfg: Config):
    rng = np.random.default_rng(cfg.seed)
    params = SolverParams(tol=cfg.tol)
    print(f"{'n':>2} {'m':>2} {'p':>2} {'rho':>6} {'mu':>12} {'grid':>12} {'rel err':>9} {'gap':>9} {'s':>6}")
    done = 0
    while done < cfg.count:
        n, m, p = rng.integers(1, cfg.max_n + 1), rng.integers(1, 3), rng.integers(1, 3)
        sys = random_system(rng, n, m, p, rho=rng.uniform(0.3, 0.9))
        if not is_controllable(sys):
            continue
        t0 = time.perf_counter()
        r = hinf_primal(sys, params)
        dt = time.perf_counter() - t0
        g = freq_grid_hinf(sys, cfg.grid).lower
        print(f"{n:2d} {m:2d} {p:2d} {sys.rho:6.3f} {r.mu_inf:12.6g} {g:12.6g} "
              f"{abs(r.mu_inf - g) / (1 + r.mu_inf):9.2e} {r.gap / (1 + r.mu_inf):9.2e} {dt:6.2f}")
        done += 1


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for f, v in Config().__dict__.items():
        ap.add_argument(f"--{f.replace('_', '-')}", type=type(v), default=v)
    main(Config(**vars(ap.parse_args())))
