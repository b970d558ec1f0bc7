"""Normalized SC versus GPT mismatch across frequency for a few shapes.

Prints the log-log slope and the fit err / omega^2 = a log(omega) + b,
which separates the omega^2 log(omega) remainder from the omega^2 one.
"""

import argparse

import numpy as np

from gptshape.geometry import ShapeSpec, make_shape
from gptshape.gpt import compute_gpt
from gptshape.potentials import HelmholtzParams
from gptshape.scattering import compute_sc

SHAPES = {"circle": ShapeSpec.circle(1.0), "ellipse": ShapeSpec.ellipse(1.0, 0.5), "kite": ShapeSpec.kite()}


def main(omegas, k: int, n: int) -> None:
    omegas = np.asarray(omegas)
    for name, spec in SHAPES.items():
        curve = make_shape(spec, n)
        m = compute_gpt(curve, HelmholtzParams().contrast, k).values
        errs = np.array([np.linalg.norm(compute_sc(curve, HelmholtzParams(omega=w), k)
                                        .normalized().without_zero().values - m) for w in omegas])
        slope = np.polyfit(np.log(omegas), np.log(errs), 1)[0]
        a, b = np.polyfit(np.log(omegas), errs / omegas ** 2, 1)
        print(f"{name:8s} slope {slope:.3f}  err/omega^2 = {a:.4f} log(omega) + {b:.4f}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--omegas", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025, 0.0125])
    parser.add_argument("-K", type=int, default=3)
    parser.add_argument("-N", type=int, default=256)
    a = parser.parse_args()
    main(a.omegas, a.K, a.N)
