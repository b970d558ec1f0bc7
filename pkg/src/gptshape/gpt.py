"""Generalized polarization tensors of planar inclusions.

Harmonic basis: u_m = r^|m| e^{i m theta} for m = +-1, ..., +-K (so u_m = z^m
for m > 0 and conj(z)^|m| for m < 0).  The GPT is

    M[m][n] = int_{dD} conj(u_m) (lambda I - K*)^{-1}[d u_n / d nu] dsigma,

and with G = log|x| / (2 pi) the scattered field for u0 = u_n expands as

    u - u0 = sum_m c_m r^{-|m|} e^{i m theta} M[m][n],   c_m = -1 / (4 pi |m|).

M is Hermitian in the sense M[m][n] = conj(M[-m][-n]) = M[-n][-m]; it is
symmetric in (m, n) only for shapes symmetric about the x-axis.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .geometry import BoundaryCurve
from .potentials import ContractError, ElectrostaticSolver, single_layer_potential


def gpt_orders(k: int) -> np.ndarray:
    """Signed orders -K..-1, 1..K."""
    if k < 1:
        raise ContractError("GPT order K must be >= 1")
    return np.concatenate([np.arange(-k, 0), np.arange(1, k + 1)])


def far_field_constant(m: int) -> float:
    return -1.0 / (4 * np.pi * abs(m))


@dataclass(frozen=True, eq=False)
class GptMatrix:
    """Entries M[m][n] stored on the signed order grid ``orders``."""

    values: np.ndarray
    orders: np.ndarray
    lam: float
    curve_id: str = ""

    @property
    def order(self) -> int:
        return int(np.max(np.abs(self.orders)))

    def index(self, m: int) -> int:
        hits = np.flatnonzero(self.orders == m)
        if not len(hits):
            raise KeyError(f"order {m} not stored (orders {self.orders.tolist()})")
        return int(hits[0])

    def __getitem__(self, mn: tuple[int, int]) -> complex:
        m, n = mn
        return complex(self.values[self.index(m), self.index(n)])

    def _like(self, values: np.ndarray) -> "GptMatrix":
        return GptMatrix(values, self.orders, self.lam, self.curve_id)

    def __sub__(self, other: "GptMatrix") -> "GptMatrix":
        return self._like(self.values - other.values)

    def __add__(self, other: "GptMatrix") -> "GptMatrix":
        return self._like(self.values + other.values)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def restrict(self, k: int) -> "GptMatrix":
        sel = (np.abs(self.orders) <= k) & (self.orders != 0)
        return GptMatrix(self.values[np.ix_(sel, sel)], self.orders[sel], self.lam, self.curve_id)

    def entries(self):
        for i, m in enumerate(self.orders):
            for j, n in enumerate(self.orders):
                yield int(m), int(n), complex(self.values[i, j])

    def to_json(self) -> str:
        payload = {
            "order": self.order, "lambda": self.lam, "curve_hash": self.curve_id,
            "entries": [{"m": m, "n": n, "re": v.real, "im": v.imag} for m, n, v in self.entries()],
        }
        return json.dumps(payload, indent=2)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["m", "n", "re", "im"])
            for m, n, v in self.entries():
                writer.writerow([m, n, repr(v.real), repr(v.imag)])


def harmonic_trace(curve: BoundaryCurve, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Trace and normal derivative of r^|m| e^{i m theta} on the curve."""
    if m == 0:
        raise ContractError("order 0 is excluded from the harmonic basis")
    p = abs(m)
    z = curve.z
    nu = curve.normal[:, 0] + 1j * curve.normal[:, 1]
    trace = z ** p
    dnu = p * z ** (p - 1) * nu
    if m < 0:
        return np.conj(trace), np.conj(dnu)
    return trace, dnu


def harmonic_tangential(curve: BoundaryCurve, m: int) -> tuple[np.ndarray, np.ndarray]:
    """First and second arclength derivatives of r^|m| e^{i m theta} along the curve."""
    p = abs(m)
    z = curve.z
    tau = curve.tangent[:, 0] + 1j * curve.tangent[:, 1]
    nu = curve.normal[:, 0] + 1j * curve.normal[:, 1]
    d1 = p * z ** (p - 1)
    d2 = p * (p - 1) * z ** (p - 2) if p > 1 else np.zeros_like(z)
    ds = d1 * tau
    dss = d2 * tau ** 2 - curve.curvature * d1 * nu
    if m < 0:
        return np.conj(ds), np.conj(dss)
    return ds, dss


def harmonic_basis(curve: BoundaryCurve, orders) -> tuple[np.ndarray, np.ndarray]:
    """Columns of traces and normal derivatives for each order."""
    pairs = [harmonic_trace(curve, int(m)) for m in orders]
    return np.stack([p[0] for p in pairs], axis=1), np.stack([p[1] for p in pairs], axis=1)


@dataclass(frozen=True, eq=False)
class GptSolve:
    """Intermediate quantities shared by GPT and GPT-sensitivity evaluation.

    ``phi[:, n] = (lambda - K*)^{-1} G_n`` and ``psi[:, m]`` solves the
    transposed system with right-hand side ``w * conj(U_m)``, so that
    ``M[m][n] = psi[:, m] @ G[:, n]``.
    """

    curve: BoundaryCurve
    solver: ElectrostaticSolver
    orders: np.ndarray
    traces: np.ndarray
    normals: np.ndarray
    phi: np.ndarray
    psi: np.ndarray

    @classmethod
    def build(cls, curve: BoundaryCurve, lam: float, k: int) -> "GptSolve":
        if k > curve.n // 8:
            raise ContractError(f"K = {k} exceeds N/8 = {curve.n // 8}")
        solver = ElectrostaticSolver.build(curve, lam)
        orders = gpt_orders(k)
        traces, normals = harmonic_basis(curve, orders)
        phi = solver.solve(normals)
        psi = solver.solve_transposed(curve.weights[:, None] * np.conj(traces))
        return cls(curve, solver, orders, traces, normals, phi, psi)

    def gpt(self) -> GptMatrix:
        values = (self.curve.weights[:, None] * np.conj(self.traces)).T @ self.phi
        return GptMatrix(values, self.orders, self.solver.lam, self.curve.curve_hash)


def compute_gpt(curve: BoundaryCurve, lam: float, k: int) -> GptMatrix:
    """GPT matrix of orders up to ``k`` by the boundary-integral definition."""
    return GptSolve.build(curve, lam, k).gpt()


def _outside_check(curve: BoundaryCurve, targets: np.ndarray) -> None:
    diff = targets[:, None, :] - curve.nodes[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)).min(axis=1)
    spacing = curve.weights.max()
    if np.any(dist < 1e-10 * max(curve.diameter, 1.0)):
        raise ContractError("target lies on the boundary")
    if np.any(winding_number(curve, targets) != 0):
        raise ContractError("target lies inside the inclusion")
    if np.any(dist < 2 * spacing):
        raise ContractError("target is closer than two node spacings to the boundary; "
                            "trapezoid evaluation would be inaccurate")


def winding_number(curve: BoundaryCurve, targets: np.ndarray) -> np.ndarray:
    rel = curve.z[None, :] - (targets[:, 0] + 1j * targets[:, 1])[:, None]
    ang = np.angle(np.roll(rel, -1, axis=1) / rel).sum(axis=1)
    return np.rint(ang / (2 * np.pi)).astype(int)


def gpt_from_far_field(curve: BoundaryCurve, lam: float, k: int, radius: float,
                       samples: int | None = None) -> GptMatrix:
    """GPTs recovered from the scattered field on the circle |x| = radius.

    For each incident order n, u - u0 = S[phi_n] is sampled on the circle and
    its Fourier coefficients rescaled by radius^|m| / c_m.
    """
    if radius <= curve.max_radius:
        raise ContractError(f"measurement radius {radius} must exceed the curve's max radius "
                            f"{curve.max_radius:.4g}")
    sol = GptSolve.build(curve, lam, k)
    samples = samples or max(4 * k + 4, 512)
    theta = 2 * np.pi * np.arange(samples) / samples
    targets = radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    field = single_layer_potential(curve, sol.phi, targets)
    coeffs = np.fft.fft(field, axis=0) / samples
    rows = np.mod(sol.orders, samples)
    scale = np.array([radius ** abs(m) / far_field_constant(m) for m in sol.orders])
    values = scale[:, None] * coeffs[rows, :]
    return GptMatrix(values, sol.orders, lam, curve.curve_hash)


def scattered_potential(curve: BoundaryCurve, lam: float, coefficients: dict[int, complex],
                        targets: np.ndarray) -> np.ndarray:
    """u - u0 at exterior targets for u0 = sum_m a_m r^|m| e^{i m theta}."""
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    _outside_check(curve, targets)
    g = np.zeros(curve.n, dtype=complex)
    for m, a in coefficients.items():
        if a != 0:
            g = g + a * harmonic_trace(curve, int(m))[1]
    if not np.any(g):
        return np.zeros(len(targets), dtype=complex)
    phi = ElectrostaticSolver.build(curve, lam).solve(g)
    return single_layer_potential(curve, phi, targets)


def multipole_field(gpt: GptMatrix, coefficients: dict[int, complex], targets: np.ndarray) -> np.ndarray:
    """Truncated multipole expansion of u - u0 from a GPT matrix."""
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    r = np.hypot(targets[:, 0], targets[:, 1])
    th = np.arctan2(targets[:, 1], targets[:, 0])
    out = np.zeros(len(targets), dtype=complex)
    for n, a in coefficients.items():
        for m in gpt.orders:
            out += far_field_constant(m) * r ** (-abs(m)) * np.exp(1j * m * th) * gpt[int(m), int(n)] * a
    return out
