"""Certificate for a gain-2 scalar plant under full-block uncertainty and the extracted (w, z) pair."""
import argparse
from dataclasses import dataclass

from gramcone import StateSpace, extract_destabilizing_pair, stability_lmi
from gramcone.fileio import write_signal_csv
from gramcone.robust import full_block


@dataclass
class Config:
    out_prefix: str = "pair"
    write: bool = False


def main(cfg: Config):
    sys = StateSpace.scalar(0.5, 1.0, 1.0, 0.0)
    v = stability_lmi(sys, full_block(1, 1))
    print(f"verdict {v.status}, certificate value {v.certificate_value:.6f}")
    print(f"{'eps':>7} {'|z|^2-|w|^2':>12} {'eps_f':>9} {'samples':>8}")
    for eps in (1e-1, 5e-2, 1e-2, 5e-3):
        pair = extract_destabilizing_pair(v.V_cert, sys, eps)
        print(f"{eps:7.0e} {pair.energy_z - pair.energy_w:12.6f} {pair.eps_f:9.2e} {len(pair.w):8d}")
    if cfg.write:
        write_signal_csv(pair.w, f"{cfg.out_prefix}_w.csv")
        write_signal_csv(pair.z, f"{cfg.out_prefix}_z.csv")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-prefix", default=Config.out_prefix)
    ap.add_argument("--write", action="store_true")
    main(Config(**vars(ap.parse_args())))
