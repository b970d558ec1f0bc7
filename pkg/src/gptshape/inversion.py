"""Change-of-basis conditioning, linearized recovery and Newton reconstruction.

The Laplace-Beltrami eigenfunctions of a closed curve of length L are, in
arclength s, the constant and cos/sin(2 pi k s / L) with eigenvalues
(2 pi k / L)^2.  They are evaluated in closed form at the nodal arclengths
rather than by diagonalizing a discretized d^2/ds^2, whose Nyquist mode
would otherwise appear as a spurious second null vector.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import BoundaryCurve, CurveError, perturb_curve, radial_profile
from .gpt import GptMatrix, compute_gpt
from .potentials import ContractError, check_contrast
from .sensitivity import GptDerivative, SensitivityJacobian, fourier_basis, gpt_jacobian

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LBEigenpairs:
    values: np.ndarray
    vectors: np.ndarray

    @property
    def frequencies(self) -> np.ndarray:
        return np.sqrt(self.values)


def lb_eigenbasis(curve: BoundaryCurve, count: int) -> LBEigenpairs:
    """First ``count`` eigenpairs of -d^2/ds^2, orthonormal in L2(dsigma)."""
    if count < 1 or count > curve.n // 4:
        raise ContractError(f"count must be in [1, N/4 = {curve.n // 4}]")
    length = curve.total_length
    s = curve.arclength
    vecs = [np.full(curve.n, 1 / np.sqrt(length))]
    vals = [0.0]
    k = 1
    while len(vecs) < count:
        arg = 2 * np.pi * k * s / length
        for f in (np.cos, np.sin):
            vecs.append(np.sqrt(2 / length) * f(arg))
            vals.append((2 * np.pi * k / length) ** 2)
        k += 1
    return LBEigenpairs(np.array(vals[:count]), np.stack(vecs[:count], axis=1))


def weyl_count(curve: BoundaryCurve, bound: float) -> int:
    """Number of LB eigenvalues below ``bound`` predicted by L sqrt(bound) / pi."""
    return int(np.floor(curve.total_length * np.sqrt(bound) / np.pi))


@dataclass(frozen=True, eq=False)
class BasisMaps:
    s: int
    eigenpairs: LBEigenpairs
    matrix: np.ndarray
    pinv: np.ndarray
    condition: float
    orders: np.ndarray


def harmonic_rows(curve: BoundaryCurve, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Traces r^|m| e^{i m theta} for m = -s..s (m = 0 is the constant)."""
    orders = np.arange(-s, s + 1)
    z = curve.z
    cols = [np.conj(z) ** (-m) if m < 0 else z ** m for m in orders]
    return orders, np.stack(cols, axis=1)


def change_of_basis(curve: BoundaryCurve, s: int) -> BasisMaps:
    """Inner products of harmonic traces with LB eigenfunctions and the condition number."""
    if s < 1 or s > curve.n // 8:
        raise ContractError(f"s must be in [1, N/8 = {curve.n // 8}]")
    eig = lb_eigenbasis(curve, 2 * s + 1)
    orders, traces = harmonic_rows(curve, s)
    mat = (curve.weights[:, None] * traces).T @ eig.vectors
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[-1] <= 1e-14 * sv[0]:
        raise ContractError("change-of-basis matrix is rank deficient")
    return BasisMaps(s, eig, mat, np.linalg.pinv(mat), float(sv[0] / sv[-1]), orders)


# ---------------------------------------------------------------------------
# linearized recovery
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Recovery:
    h: np.ndarray
    hH: np.ndarray
    coefficients: np.ndarray
    condition: float
    regularized: bool


def fourier_jacobian(curve: BoundaryCurve, lam: float, k: int, s: int,
                     derivative: GptDerivative | None = None) -> SensitivityJacobian:
    return gpt_jacobian(curve, lam, k, basis=fourier_basis(curve, s), derivative=derivative)


def stacked(values: np.ndarray) -> np.ndarray:
    flat = np.asarray(values).ravel()
    return np.concatenate([flat.real, flat.imag])


def _least_squares(a: np.ndarray, b: np.ndarray, alpha: float = 0.0) -> np.ndarray:
    if alpha > 0:
        n = a.shape[1]
        a = np.vstack([a, np.sqrt(alpha) * np.eye(n)])
        b = np.concatenate([b, np.zeros(n)])
    return np.linalg.lstsq(a, b, rcond=None)[0]


def recover_hH(curve: BoundaryCurve, lam: float, m1: GptMatrix, s: int,
               jacobian: SensitivityJacobian | None = None, max_condition: float = 1e14) -> Recovery:
    """Band-limited h minimizing ||J h - M1||_F; returns h and the nodal product h H."""
    jac = jacobian or fourier_jacobian(curve, lam, m1.order, s)
    a = jac.real_matrix()
    sv = np.linalg.svd(a, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    regularized = cond > max_condition
    alpha = 0.0
    if regularized:
        alpha = 1e-8 * sv[0] ** 2
        warnings.warn(f"Jacobian condition number {cond:.2e} > {max_condition:.0e}; "
                      f"using Tikhonov alpha = {alpha:.3e}", RuntimeWarning, stacklevel=2)
    coeffs = _least_squares(a, stacked(m1.values), alpha)
    h = coeffs @ jac.basis
    return Recovery(h, h * curve.curvature, coeffs, cond, regularized)


def add_noise(values: np.ndarray, level: float, rng: np.random.Generator) -> np.ndarray:
    """Complex Gaussian noise with standard deviation ``level`` times the RMS entry."""
    rms = np.sqrt(np.mean(np.abs(values) ** 2))
    noise = rng.standard_normal(values.shape) + 1j * rng.standard_normal(values.shape)
    return values + level * rms * noise / np.sqrt(2)


# ---------------------------------------------------------------------------
# Newton reconstruction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NewtonOptions:
    max_iters: int = 15
    alpha_rel: float = 1e-8
    damping: float = 0.5
    tol: float = 1e-10
    s: int | None = None
    divergence_window: int = 3


@dataclass
class ReconstructionState:
    iterate: int
    curve: BoundaryCurve
    residual_norm: float
    residual: np.ndarray
    step: np.ndarray | None
    boundary_error: float | None
    alpha: float

    def record(self) -> dict:
        return {
            "iterate": self.iterate,
            "residual_norm": self.residual_norm,
            "boundary_error": self.boundary_error,
            "alpha": self.alpha,
            "step_norm": None if self.step is None else float(np.sqrt(np.mean(self.step ** 2))),
        }


@dataclass
class ReconstructionResult:
    history: list[ReconstructionState] = field(default_factory=list)
    converged: bool = False
    halted: bool = False
    options: NewtonOptions = field(default_factory=NewtonOptions)

    @property
    def final(self) -> ReconstructionState:
        return self.history[-1]

    @property
    def iterations(self) -> int:
        return self.final.iterate

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(st.record()) for st in self.history) + "\n"

    def summary(self) -> dict:
        return {"iterations": self.iterations, "converged": self.converged, "halted": self.halted,
                "options": asdict(self.options), "final_residual": self.final.residual_norm,
                "final_boundary_error": self.final.boundary_error}


def boundary_error(curve: BoundaryCurve, truth: BoundaryCurve, samples: int = 512,
                   window: tuple[float, float] | None = None) -> float:
    """RMS radial distance between two star-shaped curves, optionally on an angular window."""
    theta = 2 * np.pi * np.arange(samples) / samples
    if window is not None:
        center, half = window
        d = np.angle(np.exp(1j * (theta - center)))
        theta = theta[np.abs(d) <= half]
    diff = radial_profile(curve, theta) - radial_profile(truth, theta)
    return float(np.sqrt(np.mean(diff ** 2)))


def newton_reconstruct(m_meas: GptMatrix, d0: BoundaryCurve, lam: float, k: int,
                       options: NewtonOptions | None = None,
                       truth: BoundaryCurve | None = None) -> ReconstructionResult:
    """Damped, regularized Gauss-Newton iteration on the GPT misfit."""
    opts = options or NewtonOptions()
    check_contrast(lam)
    s = opts.s if opts.s is not None else k
    target = m_meas.restrict(k).values
    scale = max(np.linalg.norm(target), 1e-300)
    result = ReconstructionResult(options=opts)
    curve = d0
    growth = 0

    def err(c):
        if truth is None:
            return None
        try:
            return boundary_error(c, truth)
        except CurveError:
            return float("nan")

    for it in range(opts.max_iters + 1):
        deriv = GptDerivative.build(curve, lam, k)
        residual = target - deriv.solve.gpt().values
        rnorm = float(np.linalg.norm(residual))
        state = ReconstructionState(it, curve, rnorm, residual, None, err(curve), 0.0)
        if result.history and rnorm > result.history[-1].residual_norm:
            growth += 1
        else:
            growth = 0
        result.history.append(state)
        if rnorm <= opts.tol * scale:
            result.converged = True
            break
        if growth >= opts.divergence_window:
            result.halted = True
            logger.warning("residual grew %d consecutive iterates; halting", growth)
            break
        if it == opts.max_iters:
            break
        jac = fourier_jacobian(curve, lam, k, s, derivative=deriv)
        a = jac.real_matrix()
        alpha = opts.alpha_rel * np.linalg.norm(a, 2) ** 2
        coeffs = _least_squares(a, stacked(residual), alpha)
        step = coeffs @ jac.basis
        state.step, state.alpha = step, float(alpha)
        try:
            curve = perturb_curve(curve, opts.damping * step, 1.0)
        except CurveError as exc:
            logger.warning("Newton step produced an invalid curve: %s", exc)
            result.halted = True
            break
    return result


def measured_gpt(truth: BoundaryCurve, lam: float, k: int, noise: float = 0.0,
                 rng: np.random.Generator | None = None) -> GptMatrix:
    m = compute_gpt(truth, lam, k)
    if noise > 0:
        if rng is None:
            raise ValueError("noisy data needs an explicit generator")
        m = GptMatrix(add_noise(m.values, noise, rng), m.orders, m.lam, m.curve_id)
    return m
