"""First-order shape derivatives of K* and of the GPTs.

For the normal perturbation x -> x + eps h(x) nu(x), pull the perturbed
operator back to the reference nodes.  Its eps-derivative K1 has kernel
(times 1/(2 pi), with respect to dsigma(y))

    [<Kh, nu_x> - h_s(x) <x-y, T_x> + <x-y, nu_x> h(y) H(y)] / r^2
        - 2 <x-y, Kh> <x-y, nu_x> / r^4,          Kh = h(x) nu_x - h(y) nu_y,

and diagonal limit -h_ss(x) / (4 pi).  Splitting by which of h(x), h(y),
h_s(x), h_ss(x) appears gives K1 = diag(h) A + B diag(h) + diag(h_s) C
+ diag(-h_ss w / (4 pi)), which makes every derivative below linear in the
nodal values of h through fixed tensors.

The GPT derivative collects four contributions: the moving trace and
normal derivative of conj(u_m) (DtN term), the K1 term, the commutator
with hH coming from the area element and the normal-derivative variation,
and the tangential term -d/ds(h du_n/ds).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .geometry import BoundaryCurve, PerturbationField, differentiation_matrix, periodic_bump, perturb_curve
from .gpt import GptMatrix, GptSolve, compute_gpt, harmonic_tangential
from .potentials import BoundaryOperator, HelmholtzParams, interior_dtn_matrix


def k1_components(curve: BoundaryCurve) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Matrices (A, B, C) of the K1 splitting, weights included, zero diagonal."""
    diff = curve.nodes[:, None, :] - curve.nodes[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(r2, 1.0)
    nx, tx = curve.normal, curve.tangent
    dnx = np.einsum("ijk,ik->ij", diff, nx)
    dny = np.einsum("ijk,jk->ij", diff, nx)
    dtx = np.einsum("ijk,ik->ij", diff, tx)
    nn = nx @ nx.T
    scale = curve.weights[None, :] / (2 * np.pi)
    a = (1.0 / r2 - 2 * dnx ** 2 / r2 ** 2) * scale
    b = ((-nn + dnx * curve.curvature[None, :]) / r2 + 2 * dny * dnx / r2 ** 2) * scale
    c = (-dtx / r2) * scale
    for mat in (a, b, c):
        np.fill_diagonal(mat, 0.0)
    return a, b, c


def k1_matrix(curve: BoundaryCurve, h: PerturbationField,
              parts: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None) -> np.ndarray:
    a, b, c = parts if parts is not None else k1_components(curve)
    mat = h.values[:, None] * a + b * h.values[None, :] + h.ds[:, None] * c
    mat[np.diag_indices(curve.n)] = -h.dss * curve.weights / (4 * np.pi)
    return mat


def assemble_k1(curve: BoundaryCurve, h: PerturbationField) -> BoundaryOperator:
    """Shape derivative of the pulled-back Neumann-Poincare operator."""
    return BoundaryOperator(k1_matrix(curve, h), "shape_derivative", curve.curve_hash)


def arclength_derivative_matrices(curve: BoundaryCurve) -> tuple[np.ndarray, np.ndarray]:
    d1 = differentiation_matrix(curve.n, 1) / curve.jacobian[:, None]
    return d1, d1 @ d1


@dataclass(frozen=True, eq=False)
class GptDerivative:
    """Tensors P, Q, R with M1[m][n] = sum_i h_i P[i] + h_s,i Q[i] + h_ss,i R[i].

    ``nodal`` folds the arclength derivatives in: M1 = sum_i h_i nodal[i].
    """

    solve: GptSolve
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    commutator: np.ndarray

    @classmethod
    def build(cls, curve: BoundaryCurve, lam: float, k: int, term1: str = "analytic") -> "GptDerivative":
        sol = GptSolve.build(curve, lam, k)
        w, curv = curve.weights, curve.curvature
        phi, psi, traces, normals = sol.phi, sol.psi, sol.traces, sol.normals
        a, b, c = k1_components(curve)
        tang = [harmonic_tangential(curve, int(m)) for m in sol.orders]
        ds_u = np.stack([t[0] for t in tang], axis=1)
        dss_u = np.stack([t[1] for t in tang], axis=1)

        # term 1: moving conj(u_m)
        if term1 == "analytic":
            t1 = np.einsum("i,im,in->imn", w, np.conj(normals), phi)
        elif term1 == "dtn":
            # <conj(u_m), Lambda0[h phi_n]> : linear in h through Lambda0^T
            dtn = interior_dtn_matrix(curve)
            left = dtn.T @ (w[:, None] * np.conj(traces))
            t1 = np.einsum("im,in->imn", left, phi)
        else:
            raise ValueError("term1 must be 'analytic' or 'dtn'")
        # term 2: psi^T K1 phi
        t2_p = np.einsum("im,in->imn", psi, a @ phi) + np.einsum("im,in->imn", b.T @ psi, phi)
        t2_q = np.einsum("im,in->imn", psi, c @ phi)
        t2_r = -np.einsum("im,i,in->imn", psi, w / (4 * np.pi), phi)
        # term 3: commutator with hH
        t3 = (np.einsum("i,im,in->imn", w * curv, np.conj(traces), phi)
              - np.einsum("im,i,in->imn", psi, curv, normals))
        # term 4: -d/ds(h du_n/ds)
        t4_p = -np.einsum("im,in->imn", psi, dss_u)
        t4_q = -np.einsum("im,in->imn", psi, ds_u)
        return cls(sol, t1 + t2_p + t3 + t4_p, t2_q + t4_q, t2_r, t3)

    @property
    def curve(self) -> BoundaryCurve:
        return self.solve.curve

    @property
    def orders(self) -> np.ndarray:
        return self.solve.orders

    @property
    def lam(self) -> float:
        return self.solve.solver.lam

    def nodal(self) -> np.ndarray:
        d1, d2 = arclength_derivative_matrices(self.curve)
        return (self.p + np.einsum("ji,jmn->imn", d1, self.q)
                + np.einsum("ji,jmn->imn", d2, self.r))

    def apply(self, h: PerturbationField, commutator: bool = True) -> GptMatrix:
        vals = (np.einsum("i,imn->mn", h.values, self.p) + np.einsum("i,imn->mn", h.ds, self.q)
                + np.einsum("i,imn->mn", h.dss, self.r))
        if not commutator:
            vals = vals - np.einsum("i,imn->mn", h.values, self.commutator)
        return GptMatrix(vals, self.orders, self.lam, self.curve.curve_hash)


def gpt_sensitivity(curve: BoundaryCurve, lam: float, h: PerturbationField, k: int,
                    commutator: bool = True, term1: str = "analytic") -> GptMatrix:
    """First-order variation M1 of the GPTs along the normal field h."""
    return GptDerivative.build(curve, lam, k, term1=term1).apply(h, commutator=commutator)


def gpt_fd(curve: BoundaryCurve, lam: float, h: PerturbationField, k: int, eps: float = 1e-4) -> GptMatrix:
    """Central finite difference of compute_gpt along h."""
    plus = compute_gpt(perturb_curve(curve, h, eps), lam, k)
    minus = compute_gpt(perturb_curve(curve, h, -eps), lam, k)
    return GptMatrix((plus.values - minus.values) / (2 * eps), plus.orders, lam, curve.curve_hash)


# ---------------------------------------------------------------------------
# bases and Jacobians
# ---------------------------------------------------------------------------

def node_bump_basis(curve: BoundaryCurve, width_nodes: float = 4.0) -> np.ndarray:
    """Rows are periodic bumps centred at each node, width in node spacings."""
    t = curve.t
    width = width_nodes * 2 * np.pi / curve.n
    return np.stack([periodic_bump(t, tc, width) for tc in t])


def fourier_basis(curve: BoundaryCurve, s: int) -> np.ndarray:
    """Rows 1, cos(kt), sin(kt) for k = 1..s (2s + 1 rows)."""
    t = curve.t
    rows = [np.ones_like(t)]
    for k in range(1, s + 1):
        rows += [np.cos(k * t), np.sin(k * t)]
    return np.stack(rows)


@dataclass(frozen=True, eq=False)
class SensitivityJacobian:
    """J[b] = M1 for the b-th basis field; basis rows are nodal values."""

    basis: np.ndarray
    tensor: np.ndarray
    orders: np.ndarray
    lam: float
    curve: BoundaryCurve
    kind: str = "custom"

    def evaluate(self, coeffs: np.ndarray) -> np.ndarray:
        return np.einsum("b,bmn->mn", np.asarray(coeffs), self.tensor)

    def column_norms(self) -> np.ndarray:
        return np.sqrt(np.sum(np.abs(self.tensor) ** 2, axis=(1, 2)))

    def real_matrix(self) -> np.ndarray:
        """Real matrix mapping basis coefficients to stacked (Re, Im) GPT entries."""
        flat = self.tensor.reshape(len(self.basis), -1).T
        return np.vstack([flat.real, flat.imag])


def gpt_jacobian(curve: BoundaryCurve, lam: float, k: int, basis: np.ndarray | str = "nodes",
                 derivative: GptDerivative | None = None, s: int | None = None) -> SensitivityJacobian:
    """Stack M1 over a basis of perturbation fields.

    ``basis`` is an array whose rows are nodal fields, or ``"nodes"`` (periodic
    node bumps) or ``"fourier"`` (modes up to ``s``, default N/8).
    """
    kind = "custom"
    if isinstance(basis, str):
        kind = basis
        if basis == "nodes":
            basis = node_bump_basis(curve)
        elif basis == "fourier":
            basis = fourier_basis(curve, s if s is not None else curve.n // 8)
        else:
            raise ValueError(f"unknown basis {basis!r}")
    derivative = derivative or GptDerivative.build(curve, lam, k)
    tensor = np.einsum("bi,imn->bmn", basis, derivative.nodal())
    return SensitivityJacobian(np.asarray(basis), tensor, derivative.orders, lam, curve, kind)


def sensitivity_map(jacobian: SensitivityJacobian) -> list[tuple[float, float]]:
    """Per-node pairs (arclength, Frobenius norm of J[b])."""
    if jacobian.kind != "nodes" or len(jacobian.basis) != jacobian.curve.n:
        raise ValueError("sensitivity_map needs the per-node bump basis")
    return [(float(s), float(v)) for s, v in zip(jacobian.curve.arclength, jacobian.column_norms())]


def write_sensitivity_csv(path, jacobian: SensitivityJacobian) -> None:
    curve = jacobian.curve
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "abs_H", "sensitivity"])
        for (s, v), hh in zip(sensitivity_map(jacobian), np.abs(curve.curvature)):
            writer.writerow([repr(s), repr(float(hh)), repr(v)])


def spearman(a: np.ndarray, b: np.ndarray) -> float:
    from scipy.stats import spearmanr

    return float(spearmanr(a, b).statistic)


# ---------------------------------------------------------------------------
# scattering-coefficient derivative
# ---------------------------------------------------------------------------

def sc_sensitivity_fd(curve: BoundaryCurve, params: HelmholtzParams, h: PerturbationField,
                      k: int, eps_fd: float = 1e-4, normalized: bool = True) -> np.ndarray:
    """Central FD of the scattering coefficients along h, orders +-1..+-K."""
    from .scattering import compute_sc

    if not np.any(h.values):
        return np.zeros((2 * k, 2 * k), dtype=complex)
    plus = compute_sc(perturb_curve(curve, h, eps_fd), params, k)
    minus = compute_sc(perturb_curve(curve, h, -eps_fd), params, k)
    if normalized:
        plus, minus = plus.normalized().without_zero(), minus.normalized().without_zero()
    return (plus.values - minus.values) / (2 * eps_fd)
