"""Helmholtz scattering coefficients of a penetrable inclusion.

Incident waves are u_m = J_|m|(k0 r) e^{i m theta} for m = -K..K.  With the
densities (phi, psi) of the transmission system, the scattered field is
u - u0 = S^{k0}[psi], and by Graf's addition theorem

    u - u0 = -(i/4) sum_m H^(1)_|m|(k0 |x|) e^{i m theta} W[m][n],
    W[m][n] = int_{dD} J_|m|(k0 r) e^{-i m theta} psi_n dsigma.

As k0 -> 0, J_|m|(k0 r) ~ beta_m r^|m| with beta_m = (k0/2)^|m| / |m|!, and
W[m][n] / (beta_m beta_n) tends to the GPT M[m][n] with contrast
lambda = (mu0 + mu1) / (2 (mu0 - mu1)).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from math import factorial

import numpy as np
from scipy.special import hankel1, jv, jvp

from .geometry import BoundaryCurve
from .potentials import (ContractError, HelmholtzParams, HelmholtzSolver,
                         helmholtz_single_layer_potential)


def sc_orders(k: int) -> np.ndarray:
    if k < 0:
        raise ContractError("order K must be >= 0")
    return np.arange(-k, k + 1)


def bessel_scale(m: int, k0: float) -> float:
    """Leading small-argument coefficient (k0/2)^|m| / |m|!."""
    return (k0 / 2) ** abs(m) / factorial(abs(m))


@dataclass(frozen=True, eq=False)
class ScatteringMatrix:
    values: np.ndarray
    orders: np.ndarray
    params: HelmholtzParams
    curve_id: str = ""
    is_normalized: bool = False

    @property
    def order(self) -> int:
        return int(np.max(np.abs(self.orders)))

    @property
    def k0(self) -> float:
        return self.params.k0

    @property
    def k1(self) -> float:
        return self.params.k1

    def index(self, m: int) -> int:
        hits = np.flatnonzero(self.orders == m)
        if not len(hits):
            raise KeyError(f"order {m} not stored")
        return int(hits[0])

    def __getitem__(self, mn: tuple[int, int]) -> complex:
        return complex(self.values[self.index(mn[0]), self.index(mn[1])])

    def normalized(self) -> "ScatteringMatrix":
        """W[m][n] / (beta_m beta_n), directly comparable with the GPT."""
        if self.is_normalized:
            return self
        beta = np.array([bessel_scale(m, self.k0) for m in self.orders])
        return replace(self, values=self.values / np.outer(beta, beta), is_normalized=True)

    def without_zero(self) -> "ScatteringMatrix":
        sel = self.orders != 0
        return replace(self, values=self.values[np.ix_(sel, sel)], orders=self.orders[sel])

    def entries(self):
        for i, m in enumerate(self.orders):
            for j, n in enumerate(self.orders):
                yield int(m), int(n), complex(self.values[i, j])

    def to_json(self) -> str:
        p = self.params
        payload = {
            "order": self.order, "mu0": p.mu0, "mu1": p.mu1, "eps0": p.eps0, "eps1": p.eps1,
            "omega": p.omega, "k0": self.k0, "k1": self.k1, "normalized": self.is_normalized,
            "curve_hash": self.curve_id,
            "entries": [{"m": m, "n": n, "re": v.real, "im": v.imag} for m, n, v in self.entries()],
        }
        return json.dumps(payload, indent=2)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["m", "n", "re", "im"])
            for m, n, v in self.entries():
                writer.writerow([m, n, repr(v.real), repr(v.imag)])


def wave_trace(curve: BoundaryCurve, m: int, k: float) -> tuple[np.ndarray, np.ndarray]:
    """Trace and normal derivative of J_|m|(k r) e^{i m theta}."""
    if k <= 0:
        raise ContractError("wavenumber must be positive")
    p = abs(m)
    r = np.hypot(curve.x, curve.y)
    theta = np.arctan2(curve.y, curve.x)
    phase = np.exp(1j * m * theta)
    trace = jv(p, k * r) * phase
    # grad = (dr f) e_r + (1/r) (d_theta f) e_theta; J_p(kr)/r is finite at r = 0 for p >= 1
    er = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    et = np.stack([-np.sin(theta), np.cos(theta)], axis=1)
    nr = np.einsum("ij,ij->i", curve.normal, er)
    nt = np.einsum("ij,ij->i", curve.normal, et)
    with np.errstate(invalid="ignore", divide="ignore"):
        j_over_r = np.where(r > 0, jv(p, k * r) / np.where(r > 0, r, 1.0), k / 2 if p == 1 else 0.0)
    dnu = (k * jvp(p, k * r) * nr + 1j * m * j_over_r * nt) * phase
    return trace, dnu


def wave_basis(curve: BoundaryCurve, orders, k: float) -> tuple[np.ndarray, np.ndarray]:
    pairs = [wave_trace(curve, int(m), k) for m in orders]
    return np.stack([p[0] for p in pairs], axis=1), np.stack([p[1] for p in pairs], axis=1)


@dataclass(frozen=True, eq=False)
class ScSolve:
    curve: BoundaryCurve
    solver: HelmholtzSolver
    orders: np.ndarray
    traces: np.ndarray
    phi: np.ndarray
    psi: np.ndarray

    @classmethod
    def build(cls, curve: BoundaryCurve, params: HelmholtzParams, k: int) -> "ScSolve":
        if params.omega > 1:
            raise ContractError("omega must be <= 1 (quasi-static range)")
        if k > curve.n // 8:
            raise ContractError(f"K = {k} exceeds N/8 = {curve.n // 8}")
        solver = HelmholtzSolver.build(curve, params)
        orders = sc_orders(k)
        traces, normals = wave_basis(curve, orders, params.k0)
        phi, psi = solver.solve(traces, normals)
        return cls(curve, solver, orders, traces, phi, psi)

    def matrix(self) -> ScatteringMatrix:
        values = (self.curve.weights[:, None] * np.conj(self.traces)).T @ self.psi
        return ScatteringMatrix(values, self.orders, self.solver.params, self.curve.curve_hash)


def compute_sc(curve: BoundaryCurve, params: HelmholtzParams, k: int) -> ScatteringMatrix:
    """Scattering coefficients W[m][n], m, n = -K..K."""
    return ScSolve.build(curve, params, k).matrix()


def sc_from_far_field(curve: BoundaryCurve, params: HelmholtzParams, k: int, radius: float,
                      samples: int = 512) -> ScatteringMatrix:
    """SCs from the Hankel-normalized Fourier modes of u - u0 on |x| = radius."""
    if radius <= curve.max_radius:
        raise ContractError(f"measurement radius {radius} must exceed the curve's max radius "
                            f"{curve.max_radius:.4g}")
    orders = sc_orders(k)
    sol = ScSolve.build(curve, params, k)
    theta = 2 * np.pi * np.arange(samples) / samples
    targets = radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    field = helmholtz_single_layer_potential(curve, sol.psi, targets, params.k0)
    coeffs = np.fft.fft(field, axis=0) / samples
    rows = np.mod(orders, samples)
    scale = np.array([-4.0 / (1j * hankel1(abs(m), params.k0 * radius)) for m in orders])
    return ScatteringMatrix(scale[:, None] * coeffs[rows, :], orders, params, curve.curve_hash)


def scattered_field_modes(curve: BoundaryCurve, params: HelmholtzParams, n: int, radius: float,
                          k: int, samples: int = 512) -> np.ndarray:
    """Fourier modes -K..K of u - u0 on |x| = radius for the incident order n."""
    sol = ScSolve.build(curve, params, max(k, abs(n)))
    col = sol.orders.tolist().index(n)
    theta = 2 * np.pi * np.arange(samples) / samples
    targets = radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    field = helmholtz_single_layer_potential(curve, sol.psi[:, col], targets, params.k0)
    coeffs = np.fft.fft(field) / samples
    return coeffs[np.mod(sc_orders(k), samples)]


# ---------------------------------------------------------------------------
# wave change of basis
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WaveBasisMap:
    matrix: np.ndarray
    orders: np.ndarray
    condition: float
    k0: float


def wave_change_of_basis(curve: BoundaryCurve, s: int, k0: float, drop_tol: float = 1e-10) -> WaveBasisMap:
    """Matrix <J_|m|(k0 r) e^{i m theta}, eta_p> for m = -s..s and the first 2s+1 LB modes."""
    from .inversion import lb_eigenbasis

    orders = sc_orders(s)
    traces, _ = wave_basis(curve, orders, k0)
    eig = lb_eigenbasis(curve, 2 * s + 1)
    mat = (curve.weights[:, None] * traces).T @ eig.vectors
    row_norms = np.sqrt(np.abs(np.sum(np.abs(traces) ** 2 * curve.weights[:, None], axis=0)))
    scale = np.sqrt(curve.total_length)
    bad = [int(m) for m, v in zip(orders, row_norms) if v < drop_tol * scale]
    if bad:
        raise ContractError(f"wave trace of order(s) {bad} vanishes on the boundary (Bessel zero at "
                            f"k0 = {k0}); drop these modes or change k0")
    sv = np.linalg.svd(mat, compute_uv=False)
    return WaveBasisMap(mat, orders, float(sv[0] / sv[-1]), k0)
