"""Strict KYP verdicts and both alternative certificates as the gain crosses 1."""
import argparse
from dataclasses import dataclass

import numpy as np

from gramcone import freq_grid_hinf, kyp_alternatives, kyp_strict, random_system


@dataclass
class Config:
    systems: int = 3
    seed: int = 77
    grid: int = 2**16


def main(cfg: Config):
    rng = np.random.default_rng(cfg.seed)
    factors = [0.5, 0.9, 0.99, 0.999, 1.001, 1.01, 1.1, 2.0]
    print(f"{'sys':>3} {'mu':>9} {'verdict':>13} {'P cert':>7} {'V cert':>7}")
    for i in range(cfg.systems):
        base = random_system(rng, int(rng.integers(1, 4)), 1, 1, rho=rng.uniform(0.3, 0.9))
        mu0 = freq_grid_hinf(base, cfg.grid).lower
        for f in factors:
            sys = base.scaled(np.sqrt(f / mu0))
            r = kyp_strict(sys)
            alt = kyp_alternatives(sys)
            print(f"{i:3d} {r.mu_inf:9.5f} {r.status:>13} {str(alt['P_valid']):>7} {str(alt['V_valid']):>7}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for f, v in Config().__dict__.items():
        ap.add_argument(f"--{f}", type=type(v), default=v)
    main(Config(**vars(ap.parse_args())))
