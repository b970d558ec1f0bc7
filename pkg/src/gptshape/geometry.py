"""Smooth closed planar curves sampled on an equispaced periodic grid.

All geometric quantities (tangents, normals, curvature, arclength) are
obtained by FFT differentiation of the node coordinates, so a curve built
from an analytic parametrization and a curve obtained by moving nodes
along the normal are treated identically.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np


class CurveError(ValueError):
    """Raised when a curve is degenerate or self-intersecting."""


# ---------------------------------------------------------------------------
# spectral calculus on the periodic grid t_j = 2 pi j / N
# ---------------------------------------------------------------------------

def wavenumbers(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, d=1.0 / n)


def spectral_derivative(values: np.ndarray, order: int = 1, axis: int = 0) -> np.ndarray:
    """Differentiate periodic samples ``order`` times with respect to t.

    The Nyquist coefficient is dropped for odd orders so that real input
    stays real.
    """
    values = np.asarray(values)
    n = values.shape[axis]
    k = wavenumbers(n)
    symbol = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        symbol[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = n
    out = np.fft.ifft(np.fft.fft(values, axis=axis) * symbol.reshape(shape), axis=axis)
    if np.isrealobj(values):
        return out.real
    return out


def differentiation_matrix(n: int, order: int = 1) -> np.ndarray:
    """Dense matrix of :func:`spectral_derivative` (real, n x n)."""
    return spectral_derivative(np.eye(n), order=order, axis=0)


def periodic_antiderivative(values: np.ndarray) -> np.ndarray:
    """Cumulative integral from t=0 of periodic samples.

    Returns ``mean * t + periodic part`` evaluated at the grid nodes.
    """
    n = len(values)
    coeffs = np.fft.fft(values)
    k = wavenumbers(n)
    mean = coeffs[0].real / n
    safe = np.where(k == 0, 1.0, k)
    integ = np.where(k == 0, 0.0, coeffs / (1j * safe))
    if n % 2 == 0:
        integ[n // 2] = 0.0
    periodic = np.fft.ifft(integ).real
    periodic -= periodic[0]
    t = 2 * np.pi * np.arange(n) / n
    return mean * t + periodic


def fourier_interpolate(values: np.ndarray, m: int) -> np.ndarray:
    """Resample periodic data from n to m equispaced points (m >= n)."""
    n = len(values)
    coeffs = np.fft.fft(values)
    padded = np.zeros(m, dtype=complex)
    half = n // 2
    padded[:half] = coeffs[:half]
    padded[m - half + 1:] = coeffs[half + 1:]
    # split the Nyquist coefficient symmetrically
    padded[half] = coeffs[half] / 2
    padded[m - half] += coeffs[half] / 2
    out = np.fft.ifft(padded) * (m / n)
    return out.real if np.isrealobj(values) else out


# ---------------------------------------------------------------------------
# shape descriptions
# ---------------------------------------------------------------------------

SHAPE_KINDS = ("circle", "ellipse", "fourier_curve", "bump_circle", "kite")


@dataclass(frozen=True)
class ShapeSpec:
    """Declarative description of a test boundary.

    Only the fields relevant to ``kind`` are used:

    * circle: ``radius``
    * ellipse: ``a``, ``b`` (semi-axes along x and y)
    * fourier_curve: ``radius`` and ``modes`` as (m, cos amp, sin amp); the
      radial function is ``radius + sum(c cos m th + s sin m th)``
    * bump_circle: ``radius``, ``theta0``, ``height``, ``width``
    * kite: ``scale`` (kite x = cos t + 0.65 cos 2t, y = 1.5 sin t; max radius 1.65)

    ``center`` and ``rotation`` apply a rigid motion after construction.
    """

    kind: str = "circle"
    radius: float = 1.0
    a: float = 2.0
    b: float = 1.0
    modes: tuple[tuple[int, float, float], ...] = ()
    theta0: float = 0.0
    height: float = 0.1
    width: float = 0.2
    scale: float = 1.0
    center: tuple[float, float] = (0.0, 0.0)
    rotation: float = 0.0

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise ValueError(f"unknown shape kind {self.kind!r}; expected one of {SHAPE_KINDS}")
        if self.kind == "ellipse" and not (self.a >= self.b > 0):
            raise ValueError("ellipse requires a >= b > 0")
        if self.kind in ("circle", "fourier_curve", "bump_circle") and self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.kind == "bump_circle" and self.width <= 0:
            raise ValueError("bump width must be positive")
        object.__setattr__(self, "modes", tuple(tuple(m) for m in self.modes))

    @classmethod
    def circle(cls, radius: float = 1.0, **kw) -> "ShapeSpec":
        return cls(kind="circle", radius=radius, **kw)

    @classmethod
    def ellipse(cls, a: float, b: float, **kw) -> "ShapeSpec":
        return cls(kind="ellipse", a=a, b=b, **kw)

    @classmethod
    def fourier_curve(cls, radius: float, modes: Sequence[tuple[int, float, float]], **kw) -> "ShapeSpec":
        return cls(kind="fourier_curve", radius=radius, modes=tuple(modes), **kw)

    @classmethod
    def bump_circle(cls, radius: float = 1.0, theta0: float = 0.0, height: float = 0.1,
                    width: float = 0.2, **kw) -> "ShapeSpec":
        return cls(kind="bump_circle", radius=radius, theta0=theta0, height=height, width=width, **kw)

    @classmethod
    def kite(cls, scale: float = 1.0, **kw) -> "ShapeSpec":
        return cls(kind="kite", scale=scale, **kw)

    def points(self, t: np.ndarray) -> np.ndarray:
        """Evaluate the parametrization at parameter values ``t``; shape (len(t), 2)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "circle":
            xy = self.radius * np.stack([np.cos(t), np.sin(t)], axis=-1)
        elif self.kind == "ellipse":
            xy = np.stack([self.a * np.cos(t), self.b * np.sin(t)], axis=-1)
        elif self.kind in ("fourier_curve", "bump_circle"):
            r = self.radial_function(t)
            xy = r[:, None] * np.stack([np.cos(t), np.sin(t)], axis=-1)
        else:
            xy = self.scale * np.stack(
                [np.cos(t) + 0.65 * np.cos(2 * t), 1.5 * np.sin(t)], axis=-1)
        c, s = np.cos(self.rotation), np.sin(self.rotation)
        rot = np.array([[c, -s], [s, c]])
        return xy @ rot.T + np.asarray(self.center, dtype=float)

    def radial_function(self, theta: np.ndarray) -> np.ndarray:
        """Radius as a function of polar angle for star-shaped kinds."""
        theta = np.asarray(theta, dtype=float)
        if self.kind == "circle":
            return np.full_like(theta, self.radius)
        if self.kind == "fourier_curve":
            r = np.full_like(theta, self.radius)
            for m, ca, sa in self.modes:
                r = r + ca * np.cos(m * theta) + sa * np.sin(m * theta)
            return r
        if self.kind == "bump_circle":
            return self.radius + self.height * periodic_bump(theta, self.theta0, self.width)
        raise ValueError(f"{self.kind} has no radial description")


def periodic_bump(theta: np.ndarray, center: float, width: float) -> np.ndarray:
    """exp(-(d/width)^2) with d the wrapped angular distance to ``center``."""
    d = np.angle(np.exp(1j * (np.asarray(theta) - center)))
    return np.exp(-(d / width) ** 2)


# ---------------------------------------------------------------------------
# discretized curve
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BoundaryCurve:
    """Counterclockwise curve sampled at t_j = 2 pi j / N with cached geometry.

    Attributes
    ----------
    nodes : (N, 2) array
    d1, d2 : (N, 2) arrays
        First and second t-derivatives of the parametrization.
    tangent, normal : (N, 2) arrays
        Unit tangent and outward unit normal.
    jacobian : (N,) array
        Speed |X'(t_j)|.
    curvature : (N,) array
        Signed curvature, +1/R on a circle of radius R.
    weights : (N,) array
        Trapezoid weights 2 pi |X'(t_j)| / N.
    """

    nodes: np.ndarray
    d1: np.ndarray = field(repr=False)
    d2: np.ndarray = field(repr=False)
    tangent: np.ndarray = field(repr=False)
    normal: np.ndarray = field(repr=False)
    jacobian: np.ndarray = field(repr=False)
    curvature: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @classmethod
    def from_nodes(cls, nodes: np.ndarray, check: bool = True) -> "BoundaryCurve":
        nodes = np.array(nodes, dtype=float)
        n = nodes.shape[0]
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise CurveError("nodes must have shape (N, 2)")
        if n < 16 or n % 2:
            raise CurveError(f"N must be even and >= 16, got {n}")
        d1 = spectral_derivative(nodes, 1)
        d2 = spectral_derivative(nodes, 2)
        jac = np.hypot(d1[:, 0], d1[:, 1])
        if jac.min() <= 1e-10:
            raise CurveError("degenerate parametrization: |X'| vanishes")
        tangent = d1 / jac[:, None]
        normal = np.stack([tangent[:, 1], -tangent[:, 0]], axis=1)
        cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        curvature = cross / jac ** 3
        weights = 2 * np.pi * jac / n
        for arr in (nodes, d1, d2, tangent, normal, jac, curvature, weights):
            arr.setflags(write=False)
        curve = cls(nodes, d1, d2, tangent, normal, jac, curvature, weights)
        if check:
            curve.check()
        return curve

    def check(self) -> None:
        """Orientation, finiteness and a pairwise-distance self-intersection test."""
        if not np.all(np.isfinite(self.curvature)):
            raise CurveError("curvature is not finite")
        x, y = self.nodes[:, 0], self.nodes[:, 1]
        signed_area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        if signed_area <= 0:
            raise CurveError("curve must be traversed counterclockwise")
        n = self.n
        spacing = np.linalg.norm(np.roll(self.nodes, -1, axis=0) - self.nodes, axis=1)
        diff = self.nodes[:, None, :] - self.nodes[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        idx = np.arange(n)
        gap = np.abs(idx[:, None] - idx[None, :])
        gap = np.minimum(gap, n - gap)
        nonadjacent = gap > 1
        if dist[nonadjacent].min() <= 0.1 * spacing.min():
            raise CurveError("curve appears to self-intersect")
        # winding: total turning must be 2 pi for a simple curve
        turning = np.sum(self.curvature * self.weights)
        if abs(turning - 2 * np.pi) > 1e-3:
            raise CurveError(f"total turning {turning:.6f} != 2 pi; curve not simple")

    # -- basic accessors ------------------------------------------------------

    @property
    def n(self) -> int:
        return self.nodes.shape[0]

    @property
    def t(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n) / self.n

    @property
    def x(self) -> np.ndarray:
        return self.nodes[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.nodes[:, 1]

    @property
    def z(self) -> np.ndarray:
        """Nodes as complex numbers x + iy."""
        return self.nodes[:, 0] + 1j * self.nodes[:, 1]

    @property
    def total_length(self) -> float:
        return float(self.weights.sum())

    @cached_property
    def arclength(self) -> np.ndarray:
        """Cumulative arclength s(t_j) from node 0."""
        return periodic_antiderivative(self.jacobian)

    @property
    def max_radius(self) -> float:
        return float(np.hypot(self.x, self.y).max())

    @property
    def diameter(self) -> float:
        diff = self.nodes[:, None, :] - self.nodes[None, :, :]
        return float(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)).max())

    @cached_property
    def curve_hash(self) -> str:
        return hashlib.sha1(np.ascontiguousarray(self.nodes).tobytes()).hexdigest()[:16]

    # -- calculus along the curve --------------------------------------------

    def d_ds(self, values: np.ndarray) -> np.ndarray:
        """Arclength derivative of nodal values."""
        return spectral_derivative(values, 1) / self.jacobian

    def d2_ds2(self, values: np.ndarray) -> np.ndarray:
        return self.d_ds(self.d_ds(values))

    def integrate(self, values: np.ndarray) -> complex | float:
        return np.sum(np.asarray(values) * self.weights)

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        """L2(dsigma) inner product, conjugate-linear in ``g``."""
        return np.sum(f * np.conj(g) * self.weights)

    def l2_norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(np.real(self.inner(f, f))))

    # -- transforms -------------------------------------------------------------

    def transformed(self, scale: float = 1.0, rotation: float = 0.0,
                    shift: Sequence[float] = (0.0, 0.0)) -> "BoundaryCurve":
        c, s = np.cos(rotation), np.sin(rotation)
        rot = np.array([[c, -s], [s, c]])
        return BoundaryCurve.from_nodes(scale * self.nodes @ rot.T + np.asarray(shift), check=False)

    def to_csv(self, path) -> None:
        """Write columns t, x, y, nx, ny, H, w."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "x", "y", "nx", "ny", "H", "w"])
            for row in zip(self.t, self.x, self.y, self.normal[:, 0], self.normal[:, 1],
                           self.curvature, self.weights):
                writer.writerow([repr(float(v)) for v in row])


def make_shape(spec: ShapeSpec, n: int) -> BoundaryCurve:
    """Sample ``spec`` at ``n`` equispaced parameter values."""
    if n < 16 or n % 2:
        raise CurveError(f"N must be even and >= 16, got {n}")
    t = 2 * np.pi * np.arange(n) / n
    return BoundaryCurve.from_nodes(spec.points(t))


# ---------------------------------------------------------------------------
# normal perturbations
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PerturbationField:
    """Scalar field h on the nodes of a curve with its arclength derivatives."""

    values: np.ndarray
    ds: np.ndarray
    dss: np.ndarray

    @classmethod
    def on(cls, curve: BoundaryCurve, values) -> "PerturbationField":
        values = np.broadcast_to(np.asarray(values, dtype=float), (curve.n,)).copy()
        ds = curve.d_ds(values)
        return cls(values, ds, curve.d_ds(ds))

    @classmethod
    def from_function(cls, curve: BoundaryCurve, func) -> "PerturbationField":
        """Build from a function of the grid parameter t."""
        return cls.on(curve, func(curve.t))

    @classmethod
    def zero(cls, curve: BoundaryCurve) -> "PerturbationField":
        return cls.on(curve, 0.0)

    def __add__(self, other: "PerturbationField") -> "PerturbationField":
        return PerturbationField(self.values + other.values, self.ds + other.ds, self.dss + other.dss)

    def __mul__(self, c: float) -> "PerturbationField":
        return PerturbationField(c * self.values, c * self.ds, c * self.dss)

    __rmul__ = __mul__

    def __neg__(self) -> "PerturbationField":
        return -1.0 * self


def perturb_curve(curve: BoundaryCurve, h: PerturbationField | np.ndarray, eps: float) -> BoundaryCurve:
    """Move node j to x_j + eps h_j nu_j and recompute the geometry."""
    values = h.values if isinstance(h, PerturbationField) else np.asarray(h, dtype=float)
    if eps == 0:
        return curve
    return BoundaryCurve.from_nodes(curve.nodes + eps * values[:, None] * curve.normal)


def curvature_profile(curve: BoundaryCurve) -> list[tuple[float, float]]:
    """Pairs (cumulative arclength, curvature) at each node."""
    return [(float(s), float(h)) for s, h in zip(curve.arclength, curve.curvature)]


def radial_profile(curve: BoundaryCurve, theta: np.ndarray, upsample: int = 16) -> np.ndarray:
    """Radius of a star-shaped (about the origin) curve at polar angles ``theta``.

    The curve is spectrally upsampled and r(theta) interpolated linearly on
    the fine polygon; accurate to O((2 pi / (upsample N))^2).
    """
    m = upsample * curve.n
    z = fourier_interpolate(curve.z, m)
    ang = np.unwrap(np.angle(z))
    r = np.abs(z)
    if ang[-1] < ang[0]:
        raise CurveError("curve is not star-shaped about the origin")
    start = ang[0]
    ang_ext = np.concatenate([ang, [start + 2 * np.pi]])
    r_ext = np.concatenate([r, [r[0]]])
    if np.any(np.diff(ang_ext) <= 0):
        raise CurveError("curve is not star-shaped about the origin")
    th = np.mod(np.asarray(theta) - start, 2 * np.pi) + start
    return np.interp(th, ang_ext, r_ext)
