"""Nystrom discretizations of layer potentials on smooth closed curves.

Conventions: the Laplace fundamental solution is G(x) = log|x| / (2 pi) and
the outgoing Helmholtz one is G_k(x) = -(i/4) H_0^(1)(k|x|), so that
G_k -> G + const as k -> 0 and the single layer satisfies

    d/dnu S[phi]^(+/-) = (+/- 1/2 I + K*)[phi]

with K* the Neumann-Poincare operator of kernel <x-y, nu_x> / (2 pi |x-y|^2).
Smooth kernels use the trapezoid rule; logarithmic kernels use Kress'
product quadrature for log(4 sin^2((t - tau)/2)).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla
from scipy.special import hankel1, j0, j1

from .geometry import BoundaryCurve, differentiation_matrix

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.57721566490153286061

OPERATOR_KINDS = (
    "single_layer", "np_adjoint", "np_direct", "helmholtz_single", "helmholtz_np_adjoint",
    "dtn_interior", "surface_laplacian", "shape_derivative", "composite",
)


class ContractError(ValueError):
    """Raised when an input violates a documented precondition."""


class ConditioningError(RuntimeError):
    """Raised when a boundary integral system is numerically singular."""


@dataclass(frozen=True, eq=False)
class BoundaryOperator:
    """Dense matrix acting on nodal densities of one curve.

    ``includes_weights`` records whether quadrature weights are already
    folded in, i.e. whether ``matrix @ phi`` directly approximates the
    integral operator applied to the nodal values ``phi``.
    """

    matrix: np.ndarray
    kind: str
    curve_id: str
    includes_weights: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in OPERATOR_KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, density: np.ndarray) -> np.ndarray:
        density = np.asarray(density)
        if density.shape[0] != self.n:
            raise ContractError(f"density has {density.shape[0]} nodes, operator expects {self.n}")
        return self.matrix @ density

    def __matmul__(self, other):
        if isinstance(other, BoundaryOperator):
            return BoundaryOperator(self.matrix @ other.matrix, "composite", self.curve_id)
        return self(other)

    def dump(self, path) -> None:
        """Row-major complex128 dump (real/imag interleaved) plus a JSON sidecar."""
        path = Path(path)
        np.ascontiguousarray(self.matrix, dtype=np.complex128).tofile(path)
        sidecar = {
            "N": self.n, "kind": self.kind, "curve_hash": self.curve_id,
            "includes_weights": self.includes_weights, "dtype": "complex128",
            "layout": "row-major, interleaved re/im", **{k: v for k, v in self.meta.items()},
        }
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))

    @classmethod
    def load(cls, path) -> "BoundaryOperator":
        path = Path(path)
        sidecar = json.loads(path.with_suffix(path.suffix + ".json").read_text())
        n = sidecar["N"]
        matrix = np.fromfile(path, dtype=np.complex128).reshape(n, n)
        meta = {k: v for k, v in sidecar.items()
                if k not in ("N", "kind", "curve_hash", "includes_weights", "dtype", "layout")}
        return cls(matrix, sidecar["kind"], sidecar["curve_hash"], sidecar["includes_weights"], meta)


def contrast_from_permittivities(eps_c: float, eps_m: float) -> float:
    """lambda = (eps_c + eps_m) / (2 (eps_c - eps_m))."""
    if eps_c == eps_m:
        raise ContractError("equal permittivities give infinite contrast parameter")
    return (eps_c + eps_m) / (2.0 * (eps_c - eps_m))


# ---------------------------------------------------------------------------
# geometry helpers shared by all kernels
# ---------------------------------------------------------------------------

def _pair_geometry(curve: BoundaryCurve):
    diff = curve.nodes[:, None, :] - curve.nodes[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(r2, 1.0)
    return diff, r2


def kress_log_weights(n: int) -> np.ndarray:
    """R[i, j] with sum_j R[i, j] f(t_j) ~ int_0^{2pi} log(4 sin^2((t_i - tau)/2)) f(tau) dtau."""
    half = n // 2
    t = 2 * np.pi * np.arange(n) / n
    m = np.arange(1, half)
    row = -(4 * np.pi / n) * (np.cos(np.outer(t, m)) / m).sum(axis=1) \
        - (4 * np.pi / n ** 2) * np.cos(half * t)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return row[idx]


def _log_sin_sq(n: int) -> np.ndarray:
    t = 2 * np.pi * np.arange(n) / n
    delta = t[:, None] - t[None, :]
    val = 4 * np.sin(delta / 2) ** 2
    np.fill_diagonal(val, 1.0)
    return np.log(val)


# ---------------------------------------------------------------------------
# Laplace operators
# ---------------------------------------------------------------------------

def np_adjoint_matrix(curve: BoundaryCurve) -> np.ndarray:
    diff, r2 = _pair_geometry(curve)
    num = np.einsum("ijk,ik->ij", diff, curve.normal)
    mat = num / (2 * np.pi * r2) * curve.weights[None, :]
    np.fill_diagonal(mat, curve.curvature * curve.weights / (4 * np.pi))
    return mat


def assemble_np_adjoint(curve: BoundaryCurve) -> BoundaryOperator:
    """Neumann-Poincare operator K*; diagonal uses the limit H(x)/(4 pi)."""
    return BoundaryOperator(np_adjoint_matrix(curve), "np_adjoint", curve.curve_hash)


def assemble_np_direct(curve: BoundaryCurve) -> BoundaryOperator:
    """Double-layer trace K, the L2(dsigma)-adjoint of K*."""
    kstar = np_adjoint_matrix(curve)
    w = curve.weights
    mat = (kstar / w[None, :]).T * w[None, :]
    return BoundaryOperator(mat, "np_direct", curve.curve_hash)


def single_layer_matrix(curve: BoundaryCurve) -> np.ndarray:
    n = curve.n
    _, r2 = _pair_geometry(curve)
    smooth = 0.5 * np.log(r2) - 0.5 * _log_sin_sq(n)
    np.fill_diagonal(smooth, np.log(curve.jacobian))
    jac = curve.jacobian[None, :]
    return (0.5 * kress_log_weights(n) + (2 * np.pi / n) * smooth) * jac / (2 * np.pi)


def assemble_single_layer(curve: BoundaryCurve) -> BoundaryOperator:
    """Single layer S with kernel log|x-y| / (2 pi), Kress quadrature."""
    return BoundaryOperator(single_layer_matrix(curve), "single_layer", curve.curve_hash)


# ---------------------------------------------------------------------------
# Helmholtz operators
# ---------------------------------------------------------------------------

def helmholtz_matrices(curve: BoundaryCurve, k: float) -> tuple[np.ndarray, np.ndarray]:
    """Matrices of S^k and (K^k)* with G_k = -(i/4) H_0^(1)(k r)."""
    if k <= 0:
        raise ContractError("wavenumber must be positive")
    n = curve.n
    diff, r2 = _pair_geometry(curve)
    r = np.sqrt(r2)
    kr = k * r
    logsin = _log_sin_sq(n)
    rk = kress_log_weights(n)
    jac = curve.jacobian[None, :]
    h = 2 * np.pi / n

    # single layer: kernel = L1 log(4 sin^2) + L2
    full = -0.25j * hankel1(0, kr) * jac
    l1 = j0(kr) * jac / (4 * np.pi)
    l2 = full - l1 * logsin
    diag = -(0.25j - EULER_GAMMA / (2 * np.pi)
             - np.log(k * curve.jacobian / 2) / (2 * np.pi)) * curve.jacobian
    np.fill_diagonal(l1, curve.jacobian / (4 * np.pi))
    np.fill_diagonal(l2, diag)
    s_mat = rk * l1 + h * l2

    # adjoint double layer: kernel (ik/4) H_1(kr) <x-y, nu_x> / r
    num = np.einsum("ijk,ik->ij", diff, curve.normal)
    full = 0.25j * k * hankel1(1, kr) * num / r * jac
    l1 = -(k / (4 * np.pi)) * j1(kr) * num / r * jac
    l2 = full - l1 * logsin
    np.fill_diagonal(l1, 0.0)
    np.fill_diagonal(l2, curve.curvature * curve.jacobian / (4 * np.pi))
    k_mat = rk * l1 + h * l2
    return s_mat, k_mat


def assemble_helmholtz_ops(curve: BoundaryCurve, k: float) -> tuple[BoundaryOperator, BoundaryOperator]:
    s_mat, k_mat = helmholtz_matrices(curve, k)
    meta = {"k": float(k)}
    return (BoundaryOperator(s_mat, "helmholtz_single", curve.curve_hash, meta=meta),
            BoundaryOperator(k_mat, "helmholtz_np_adjoint", curve.curve_hash, meta=meta))


# ---------------------------------------------------------------------------
# layer potentials off the boundary
# ---------------------------------------------------------------------------

def _target_distances(curve: BoundaryCurve, targets: np.ndarray):
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    diff = targets[:, None, :] - curve.nodes[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    return targets, diff, r2


def _weighted(curve: BoundaryCurve, density: np.ndarray) -> np.ndarray:
    density = np.asarray(density)
    w = curve.weights if density.ndim == 1 else curve.weights[:, None]
    return density * w


def single_layer_potential(curve: BoundaryCurve, density: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """S[phi] at off-boundary targets by the trapezoid rule."""
    _, _, r2 = _target_distances(curve, targets)
    return (np.log(r2) / (4 * np.pi)) @ _weighted(curve, density)


def single_layer_gradient(curve: BoundaryCurve, density: np.ndarray, targets: np.ndarray) -> np.ndarray:
    _, diff, r2 = _target_distances(curve, targets)
    kern = diff / (2 * np.pi * r2[..., None])
    return np.einsum("ijk,j...->ik...", kern, _weighted(curve, density))


def helmholtz_single_layer_potential(curve: BoundaryCurve, density: np.ndarray,
                                     targets: np.ndarray, k: float) -> np.ndarray:
    _, _, r2 = _target_distances(curve, targets)
    return (-0.25j * hankel1(0, k * np.sqrt(r2))) @ _weighted(curve, density)


# ---------------------------------------------------------------------------
# transmission problems
# ---------------------------------------------------------------------------

def check_contrast(lam: float) -> None:
    if not np.isfinite(lam) or abs(lam) <= 0.5:
        raise ContractError(f"|lambda| must exceed 1/2 for invertibility, got {lam}")


@dataclass(frozen=True, eq=False)
class ElectrostaticSolver:
    """LU factorization of (lambda I - K*) shared across right-hand sides."""

    curve: BoundaryCurve
    lam: float
    kstar: np.ndarray
    lu: tuple

    @classmethod
    def build(cls, curve: BoundaryCurve, lam: float, kstar: np.ndarray | None = None) -> "ElectrostaticSolver":
        check_contrast(lam)
        if kstar is None:
            kstar = np_adjoint_matrix(curve)
        a = lam * np.eye(curve.n) - kstar
        return cls(curve, lam, kstar, sla.lu_factor(a))

    @property
    def matrix(self) -> np.ndarray:
        return self.lam * np.eye(self.curve.n) - self.kstar

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs)
        if np.iscomplexobj(rhs):
            return sla.lu_solve(self.lu, rhs.real) + 1j * sla.lu_solve(self.lu, rhs.imag)
        return sla.lu_solve(self.lu, rhs)

    def solve_transposed(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs)
        if np.iscomplexobj(rhs):
            return (sla.lu_solve(self.lu, rhs.real, trans=1)
                    + 1j * sla.lu_solve(self.lu, rhs.imag, trans=1))
        return sla.lu_solve(self.lu, rhs, trans=1)


def solve_electrostatic(curve: BoundaryCurve, lam: float, g: np.ndarray) -> np.ndarray:
    """Density phi with (lambda I - K*) phi = g."""
    return ElectrostaticSolver.build(curve, lam).solve(g)


@dataclass(frozen=True)
class HelmholtzParams:
    mu0: float = 1.0
    mu1: float = 3.0
    eps0: float = 1.0
    eps1: float = 2.0
    omega: float = 0.1

    @property
    def k0(self) -> float:
        return self.omega * np.sqrt(self.mu0 * self.eps0)

    @property
    def k1(self) -> float:
        return self.omega * np.sqrt(self.mu1 * self.eps1)

    @property
    def contrast(self) -> float:
        """Quasi-static contrast (mu0 + mu1) / (2 (mu0 - mu1))."""
        if self.mu0 == self.mu1:
            return np.inf
        return (self.mu0 + self.mu1) / (2 * (self.mu0 - self.mu1))

    @property
    def trivial(self) -> bool:
        return self.mu0 == self.mu1 and self.eps0 == self.eps1


@dataclass(frozen=True, eq=False)
class HelmholtzSolver:
    """Factorized 2N x 2N system for the densities (phi, psi).

        S^{k1} phi - S^{k0} psi = u0
        (-1/2 + K^{k1}*) phi / mu1 - (1/2 + K^{k0}*) psi / mu0 = du0/dnu / mu0
    """

    curve: BoundaryCurve
    params: HelmholtzParams
    system: np.ndarray
    lu: tuple
    condition: float

    max_condition = 1e12

    @classmethod
    def build(cls, curve: BoundaryCurve, params: HelmholtzParams) -> "HelmholtzSolver":
        if params.omega <= 0:
            raise ContractError("omega must be positive")
        n = curve.n
        s1, k1 = helmholtz_matrices(curve, params.k1)
        s0, k0 = helmholtz_matrices(curve, params.k0)
        eye = np.eye(n)
        system = np.block([
            [s1, -s0],
            [(-0.5 * eye + k1) / params.mu1, -(0.5 * eye + k0) / params.mu0],
        ])
        cond = float(np.linalg.cond(system))
        if not np.isfinite(cond) or cond > cls.max_condition:
            raise ConditioningError(
                f"transmission system condition number {cond:.3e} exceeds {cls.max_condition:.0e}; "
                "k1^2 is likely close to a Dirichlet eigenvalue of the inclusion")
        return cls(curve, params, system, sla.lu_factor(system), cond)

    def solve(self, u0: np.ndarray, du0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        n = self.curve.n
        rhs = np.concatenate([np.asarray(u0, dtype=complex),
                              np.asarray(du0, dtype=complex) / self.params.mu0], axis=0)
        sol = sla.lu_solve(self.lu, rhs)
        return sol[:n], sol[n:]

    def residual(self, u0, du0, phi, psi) -> float:
        rhs = np.concatenate([u0, np.asarray(du0) / self.params.mu0])
        sol = np.concatenate([phi, psi])
        return float(np.linalg.norm(self.system @ sol - rhs) / max(np.linalg.norm(rhs), 1e-300))


def solve_helmholtz_transmission(curve: BoundaryCurve, params: HelmholtzParams,
                                 u0: np.ndarray, du0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Densities (phi, psi): u = S^{k1}[phi] inside, u0 + S^{k0}[psi] outside."""
    return HelmholtzSolver.build(curve, params).solve(u0, du0)


# ---------------------------------------------------------------------------
# Dirichlet-to-Neumann map and surface Laplacian
# ---------------------------------------------------------------------------

def interior_dtn_matrix(curve: BoundaryCurve) -> np.ndarray:
    """(-1/2 I + K*) S^{-1}, assembled on a copy rescaled to unit diameter.

    The 2D single layer is singular when the logarithmic capacity equals
    one; capacity <= diameter / 2, so the rescaled copy is always safe.
    """
    scale = 1.0 / curve.diameter
    scaled = curve.transformed(scale=scale)
    s_mat = single_layer_matrix(scaled)
    cond = np.linalg.cond(s_mat)
    if cond > 1e12:
        raise ConditioningError(
            f"single layer is numerically singular (cond {cond:.2e}); rescale the curve")
    a = -0.5 * np.eye(curve.n) + np_adjoint_matrix(scaled)
    dtn_scaled = np.linalg.solve(s_mat.T, a.T).T
    return scale * dtn_scaled


def interior_dtn(curve: BoundaryCurve) -> BoundaryOperator:
    return BoundaryOperator(interior_dtn_matrix(curve), "dtn_interior", curve.curve_hash)


def surface_laplacian_matrix(curve: BoundaryCurve) -> np.ndarray:
    d = differentiation_matrix(curve.n, 1)
    inv_j = 1.0 / curve.jacobian
    return (inv_j[:, None] * d) @ (inv_j[:, None] * d)


def surface_laplacian(curve: BoundaryCurve) -> BoundaryOperator:
    """d^2/ds^2 by spectral differentiation through the parameter grid."""
    return BoundaryOperator(surface_laplacian_matrix(curve), "surface_laplacian", curve.curve_hash)
