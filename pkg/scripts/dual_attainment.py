"""Growth of the smallest feasible ||P|| as lambda approaches the optimum.

For the input-feedthrough system x+ = x/2, z = x + w (state unreachable)
the dual LMI is feasible for every lambda > 1 but the norm of P diverges.
"""
import argparse
from dataclasses import dataclass

import numpy as np

from gramcone import StateSpace, hinf_primal
from gramcone.hinf import _lambda_P_problem
from gramcone.sdp import SolverParams


@dataclass
class Config:
    decades: int = 3
    tol: float = 1e-7


def main(cfg: Config):
    sys = StateSpace.scalar(0.5, 0.0, 1.0, 1.0)
    mu = hinf_primal(sys).mu_inf
    print(f"primal value {mu:.8f}")
    print(f"{'eta':>8} {'||P||':>12} {'(1+1/eta)/0.75':>16}")
    for j in range(1, cfg.decades + 1):
        eta = 10.0 ** -j
        status, P = _lambda_P_problem(sys, 1.0 + eta, SolverParams(tol=cfg.tol))
        norm = np.linalg.norm(P, 2) if P is not None else float("nan")
        print(f"{eta:8.0e} {norm:12.5g} {(1 + 1 / eta) / 0.75:16.5g}  {status}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for f, v in Config().__dict__.items():
        ap.add_argument(f"--{f}", type=type(v), default=v)
    main(Config(**vars(ap.parse_args())))
