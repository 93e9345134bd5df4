"""Gramian error of synthesised inputs against the window length and the analytic C3/N bound."""
import argparse
from dataclasses import dataclass

import numpy as np

from gramcone import StateSpace, random_cone_element, random_system, synth
from gramcone.cone import rank_one_decompose
from gramcone.synthesis import error_bound_constants, rank_one_bound, rank_one_error


@dataclass
class Config:
    a: float = 0.5
    windows: int = 8
    seed: int = 0


def main(cfg: Config):
    sys = StateSpace.scalar(cfg.a, 1.0, 0.0, 0.0)
    v = np.array([1.0 / (1.0 - cfg.a), 1.0])
    V = np.outer(v, v)
    (comp,) = rank_one_decompose(V, sys)
    k = error_bound_constants(sys)
    print(f"a={cfg.a}: C={k.C:.4f} C1={k.C1:.4f}")
    print(f"{'N':>7} {'error':>10} {'C3/N':>10} {'N*error':>9}")
    for j in range(cfg.windows):
        N = 16 * 4**j
        err, _ = rank_one_error(comp, sys, N)
        print(f"{N:7d} {err:10.3e} {rank_one_bound(comp, sys, N, k):10.3e} {N * err:9.4f}")
    rng = np.random.default_rng(cfg.seed)
    plant = random_system(rng, 2, 1, 1, rho=0.8)
    Vr = np.asarray(random_cone_element(plant, seed=cfg.seed))
    print("random element, n=2 m=1:")
    print(f"{'eps':>7} {'error':>10} {'support':>8} {'W resid':>9}")
    for eps in (1e-1, 1e-2, 1e-3):
        _, rep = synth(Vr, plant, eps)
        print(f"{eps:7.0e} {rep.achieved_error:10.3e} {rep.support:8d} {rep.W_residual:9.1e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for f, v in Config().__dict__.items():
        ap.add_argument(f"--{f}", type=type(v), default=v)
    main(Config(**vars(ap.parse_args())))
