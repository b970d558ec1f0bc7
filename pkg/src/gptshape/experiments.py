"""Experiment runners behind the command line interface.

Each runner takes a validated config and an output directory, writes its
tables, and returns (results, checks) where checks maps a name to a dict
with ``passed`` plus the numbers that decided it.
"""

from __future__ import annotations

import csv
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .geometry import PerturbationField, make_shape, perturb_curve
from .gpt import compute_gpt, gpt_from_far_field
from .inversion import (NewtonOptions, add_noise, boundary_error, change_of_basis, fourier_jacobian,
                        measured_gpt, newton_reconstruct, recover_hH)
from .potentials import HelmholtzParams
from .scattering import compute_sc
from .sensitivity import GptDerivative, gpt_jacobian, spearman, write_sensitivity_csv
from .spectra import np_spectrum


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


class Timer:
    def __init__(self):
        self.stages: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        yield
        self.stages[name] = time.perf_counter() - t0


def _check(passed: bool, **values) -> dict:
    return {"passed": bool(passed), **{k: (float(v) if isinstance(v, (np.floating, float)) else v)
                                       for k, v in values.items()}}


def circular_distance(i: int, j: int, n: int) -> int:
    d = abs(i - j) % n
    return min(d, n - d)


def fit_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def run_spectrum(cfg: ExperimentConfig, out: Path, timer: Timer):
    with timer.stage("assemble+eig"):
        curve = make_shape(cfg.shape, cfg.n)
        rep = np_spectrum(curve, cfg.count)
    rep.to_csv(out / "spectrum.csv")
    rep.to_csv(out / "np_eigenvalues.csv", normalization="np")
    checks = {
        "twin_spectrum": _check(rep.twin_defect < 1e-6, twin_defect=rep.twin_defect),
        "single_half_eigenvalue": _check(
            int(np.sum(np.abs(rep.eigenvalues - 0.5) < 1e-8)) == 1),
    }
    if cfg.shape.kind == "ellipse":
        q = (cfg.shape.a - cfg.shape.b) / (cfg.shape.a + cfg.shape.b)
        levels = rep.magnitude_levels()
        jmax = min(6, len(levels))
        err = max(abs(levels[j - 1] - q ** j) for j in range(1, jmax + 1))
        checks["ellipse_fredholm"] = _check(err < 1e-6, max_error=err, levels_checked=jmax)
    results = {"twin_defect": rep.twin_defect, "decay_fit": rep.decay_fit, "max_imag": rep.max_imag}
    return results, checks


def run_gpt(cfg: ExperimentConfig, out: Path, timer: Timer):
    curve = make_shape(cfg.shape, cfg.n)
    radius = cfg.radius or 2.0 * curve.max_radius
    with timer.stage("gpt"):
        m = compute_gpt(curve, cfg.lam, cfg.k)
    with timer.stage("far_field"):
        f = gpt_from_far_field(curve, cfg.lam, cfg.k, radius)
    m.to_csv(out / "gpt.csv")
    f.to_csv(out / "gpt_far_field.csv")
    (out / "gpt.json").write_text(m.to_json())
    rel = float(np.max(np.abs(m.values - f.values)) / np.max(np.abs(m.values)))
    checks = {"far_field_agreement": _check(rel < 1e-6, max_rel_error=rel, radius=radius)}
    if cfg.shape.kind == "circle":
        r0 = cfg.shape.radius
        err = max(abs(m[n, n] / (2 * np.pi * n * r0 ** (2 * n) / cfg.lam) - 1) for n in range(1, cfg.k + 1))
        checks["disk_closed_form"] = _check(err < 1e-8, max_rel_error=err)
    return {"max_rel_far_field": rel}, checks


def run_sensitivity_map(cfg: ExperimentConfig, out: Path, timer: Timer):
    curve = make_shape(cfg.shape, cfg.n)
    with timer.stage("jacobian"):
        jac = gpt_jacobian(curve, cfg.lam, cfg.k, "nodes")
    write_sensitivity_csv(out / "sensitivity_map.csv", jac)
    v = jac.column_norms()
    habs = np.abs(curve.curvature)
    dist = circular_distance(int(np.argmax(v)), int(np.argmax(habs)), curve.n)
    rho = spearman(habs, v)
    checks = {"argmax_coincidence": _check(dist <= 2, node_distance=dist)}
    return {"spearman_abs_H": rho, "argmax_node_distance": dist}, checks


def run_low_freq_limit(cfg: ExperimentConfig, out: Path, timer: Timer):
    curve = make_shape(cfg.shape, cfg.n)
    base = cfg.helmholtz
    lam = base.contrast
    with timer.stage("gpt"):
        m = compute_gpt(curve, lam, cfg.k).values
    rows = []
    with timer.stage("sc"):
        for w in cfg.omegas:
            p = HelmholtzParams(base.mu0, base.mu1, base.eps0, base.eps1, w)
            wn = compute_sc(curve, p, cfg.k).normalized().without_zero().values
            rows.append((w, float(np.linalg.norm(wn - m))))
    write_csv(out / "low_freq_limit.csv", ["omega", "error"], rows)
    slope = fit_slope([r[0] for r in rows], [r[1] for r in rows])
    checks = {"slope_two": _check(abs(slope - 2.0) <= 0.1, slope=slope, contrast=lam)}
    return {"slope": slope}, checks


def run_condition_number(cfg: ExperimentConfig, out: Path, timer: Timer):
    curve = make_shape(cfg.shape, cfg.n)
    rows = []
    with timer.stage("svd"):
        for s in range(1, cfg.s + 1):
            kappa = change_of_basis(curve, s).condition
            pred = max(cfg.shape.radius ** s, cfg.shape.radius ** -s) if cfg.shape.kind == "circle" else float("nan")
            rows.append((s, kappa, pred))
    write_csv(out / "condition_number.csv", ["s", "kappa", "kappa_circle_formula"], rows)
    checks = {}
    if cfg.shape.kind == "circle":
        err = max(abs(k / p - 1) for _, k, p in rows)
        checks["circle_formula"] = _check(err < 1e-5, max_rel_error=err)
    return {"kappa": rows[-1][1]}, checks


def default_field(t: np.ndarray) -> np.ndarray:
    return 0.5 + 0.3 * np.cos(2 * t) + 0.2 * np.sin(3 * t)


def run_recover(cfg: ExperimentConfig, out: Path, timer: Timer):
    curve = make_shape(cfg.shape, cfg.n)
    h_true = PerturbationField.on(curve, default_field(curve.t))
    with timer.stage("jacobian"):
        deriv = GptDerivative.build(curve, cfg.lam, cfg.k)
        jac = fourier_jacobian(curve, cfg.lam, cfg.k, cfg.s, derivative=deriv)
        m1 = deriv.apply(h_true)
    clean = recover_hH(curve, cfg.lam, m1, cfg.s, jacobian=jac)
    rel = curve.l2_norm(clean.h - h_true.values) / curve.l2_norm(h_true.values)
    rng = np.random.default_rng(cfg.seed)
    errs = np.zeros((cfg.noise.draws, curve.n))
    with timer.stage("noise_draws"):
        if cfg.noise.level > 0:
            for d in range(cfg.noise.draws):
                noisy = type(m1)(add_noise(m1.values, cfg.noise.level, rng), m1.orders, m1.lam)
                errs[d] = recover_hH(curve, cfg.lam, noisy, cfg.s, jacobian=jac).h - h_true.values
    rms = np.sqrt(np.mean(errs ** 2, axis=0))
    write_csv(out / "recover.csv", ["node", "s", "H", "h_true", "h_recovered", "hH_recovered", "noise_rms_error"],
              [(i, curve.arclength[i], curve.curvature[i], h_true.values[i], clean.h[i], clean.hH[i], rms[i])
               for i in range(curve.n)])
    checks = {"noiseless_round_trip": _check(rel < 1e-3, rel_error=rel)}
    results = {"rel_error": rel, "jacobian_condition": clean.condition}
    if cfg.noise.level > 0:
        hw = max(2, curve.n // 32)
        idx = np.arange(curve.n)
        def local(i):
            sel = np.array([circular_distance(j, i, curve.n) <= hw for j in idx])
            return float(np.sqrt(np.mean(errs[:, sel] ** 2)))
        habs = np.abs(curve.curvature)
        results["local_error_ratio_max_over_min_H"] = local(int(np.argmax(habs))) / local(int(np.argmin(habs)))
    return results, checks


def run_newton(cfg: ExperimentConfig, out: Path, timer: Timer):
    d0 = make_shape(cfg.shape, cfg.n)
    truth = make_shape(cfg.target, cfg.n)
    opts = NewtonOptions(max_iters=cfg.newton.max_iters, alpha_rel=cfg.newton.alpha_rel,
                         damping=cfg.newton.damping, tol=cfg.newton.tol)
    rng = np.random.default_rng(cfg.seed)
    draws = cfg.noise.draws if cfg.noise.level > 0 else 1
    finals = []
    with timer.stage("newton"):
        for d in range(draws):
            m = measured_gpt(truth, cfg.lam, cfg.k, cfg.noise.level, rng)
            res = newton_reconstruct(m, d0, cfg.lam, cfg.k, opts, truth=truth)
            finals.append(res.final.boundary_error)
            if d == 0:
                (out / "history.jsonl").write_text(res.to_jsonl())
                write_csv(out / "history.csv", ["iterate", "residual_norm", "boundary_error"],
                          [(s.iterate, s.residual_norm, s.boundary_error) for s in res.history])
                res.final.curve.to_csv(out / "final_curve.csv")
                first = res
    results = {"iterations": first.iterations, "converged": first.converged, "halted": first.halted,
               "mean_final_error": float(np.mean(finals))}
    checks = {}
    if cfg.noise.level == 0:
        err = first.final.boundary_error
        checks["noiseless_recovery"] = _check(err < 1e-3 and first.iterations <= 15,
                                              boundary_error=err, iterations=first.iterations)
    return results, checks


RUNNERS = {
    "spectrum": run_spectrum,
    "gpt": run_gpt,
    "sensitivity_map": run_sensitivity_map,
    "low_freq_limit": run_low_freq_limit,
    "condition_number": run_condition_number,
    "recover": run_recover,
    "newton": run_newton,
}
