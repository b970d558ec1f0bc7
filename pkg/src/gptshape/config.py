"""Experiment configuration: TOML files with dotted sections.

Example::

    experiment = "spectrum"
    N = 256
    seed = 0
    output_dir = "ellipse_spectrum"

    [shape]
    kind = "ellipse"
    a = 2.0
    b = 1.0

    [contrast]
    lambda = 1.0          # or eps_c / eps_m

    [orders]
    K = 4
    s = 4
"""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .geometry import ShapeSpec
from .potentials import HelmholtzParams, contrast_from_permittivities

EXPERIMENTS = {
    "spectrum": "Neumann-Poincare eigenvalues, twin-spectrum defect and (for ellipses) the closed-form check.",
    "gpt": "GPT matrix by boundary integrals, cross-checked against far-field projection.",
    "sensitivity_map": "Per-node GPT sensitivity norms next to |H|; checks the argmax coincidence.",
    "low_freq_limit": "||W - M(lambda)|| over an omega grid and its fitted log-log slope.",
    "condition_number": "Condition number of the harmonic / Laplace-Beltrami change of basis.",
    "recover": "Linearized recovery of h (and hH) from GPT sensitivities, with seeded noise draws.",
    "newton": "Damped Gauss-Newton shape reconstruction from GPT data.",
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class NoiseConfig:
    level: float = 0.0
    draws: int = 1


@dataclass(frozen=True)
class NewtonConfig:
    max_iters: int = 15
    alpha_rel: float = 1e-8
    damping: float = 0.5
    tol: float = 1e-10


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    shape: ShapeSpec
    n: int = 256
    lam: float = 1.0
    helmholtz: HelmholtzParams = field(default_factory=HelmholtzParams)
    omegas: tuple[float, ...] = (0.2, 0.1, 0.05)
    k: int = 4
    s: int = 4
    count: int = 12
    radius: float | None = None
    target: ShapeSpec | None = None
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    seed: int = 0
    output_dir: str = "out"

    def echo(self) -> dict[str, Any]:
        out = asdict(self)
        out["shape"] = _shape_dict(self.shape)
        out["target"] = None if self.target is None else _shape_dict(self.target)
        return out


def _shape_dict(spec: ShapeSpec) -> dict[str, Any]:
    d = asdict(spec)
    d["modes"] = [list(m) for m in spec.modes]
    d["center"] = list(spec.center)
    return d


_SHAPE_KEYS = {"kind", "radius", "a", "b", "modes", "theta0", "height", "width", "scale", "center", "rotation"}


def _shape(table: dict, key: str) -> ShapeSpec:
    unknown = set(table) - _SHAPE_KEYS
    if unknown:
        raise ConfigError(f"{key}: unknown key(s) {sorted(unknown)}")
    kw = dict(table)
    if "modes" in kw:
        kw["modes"] = tuple(tuple(m) for m in kw["modes"])
    if "center" in kw:
        kw["center"] = tuple(kw["center"])
    try:
        return ShapeSpec(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _take(table: dict, key: str, kind, default, prefix: str):
    if key not in table:
        return default
    val = table[key]
    try:
        if kind is int and (isinstance(val, bool) or int(val) != val):
            raise TypeError
        return kind(val)
    except (TypeError, ValueError):
        raise ConfigError(f"{prefix}{key}: expected {kind.__name__}, got {val!r}") from None


def parse_config(data: dict) -> ExperimentConfig:
    """Validate a parsed TOML mapping."""
    if "experiment" not in data:
        raise ConfigError("experiment: missing (valid kinds: " + ", ".join(EXPERIMENTS) + ")")
    kind = data["experiment"]
    if kind not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown kind {kind!r}; valid kinds: {', '.join(EXPERIMENTS)}")
    if "shape" not in data:
        raise ConfigError("shape: missing section")
    shape = _shape(data["shape"], "shape")
    target = _shape(data["target"], "target") if "target" in data else None

    n = _take(data, "N", int, 256, "")
    if n < 16 or n % 2:
        raise ConfigError(f"N: must be even and >= 16, got {n}")

    contrast = data.get("contrast", {})
    if "lambda" in contrast:
        lam = _take(contrast, "lambda", float, 1.0, "contrast.")
    elif "eps_c" in contrast or "eps_m" in contrast:
        eps_c = _take(contrast, "eps_c", float, 3.0, "contrast.")
        eps_m = _take(contrast, "eps_m", float, 1.0, "contrast.")
        if eps_c <= 0 or eps_m <= 0 or eps_c == eps_m:
            raise ConfigError("contrast.eps_c: permittivities must be positive and distinct")
        lam = contrast_from_permittivities(eps_c, eps_m)
    else:
        lam = 1.0
    if abs(lam) <= 0.5:
        raise ConfigError(f"contrast.lambda: |lambda| must exceed 1/2, got {lam}")

    hz = data.get("helmholtz", {})
    params = HelmholtzParams(
        mu0=_take(hz, "mu0", float, 1.0, "helmholtz."), mu1=_take(hz, "mu1", float, 3.0, "helmholtz."),
        eps0=_take(hz, "eps0", float, 1.0, "helmholtz."), eps1=_take(hz, "eps1", float, 2.0, "helmholtz."),
        omega=_take(hz, "omega", float, 0.1, "helmholtz."),
    )
    omegas = tuple(float(w) for w in hz.get("omegas", (0.2, 0.1, 0.05)))
    for key, w in [("helmholtz.omega", params.omega)] + [("helmholtz.omegas", w) for w in omegas]:
        if not 0 < w <= 1:
            raise ConfigError(f"{key}: omega must lie in (0, 1], got {w}")
    if kind == "low_freq_limit" and params.mu0 == params.mu1:
        raise ConfigError("helmholtz.mu1: equal permeabilities give no GPT limit to compare with")

    orders = data.get("orders", {})
    k = _take(orders, "K", int, 4, "orders.")
    s = _take(orders, "s", int, 4, "orders.")
    if not 1 <= k <= n // 8:
        raise ConfigError(f"orders.K: must satisfy 1 <= K <= N/8 = {n // 8}, got {k}")
    if not 1 <= s <= n // 8:
        raise ConfigError(f"orders.s: must satisfy 1 <= s <= N/8 = {n // 8}, got {s}")

    spec_tab = data.get("spectrum", {})
    count = _take(spec_tab, "count", int, 12, "spectrum.")
    if not 1 <= count <= n // 4:
        raise ConfigError(f"spectrum.count: must satisfy 1 <= count <= N/4 = {n // 4}, got {count}")
    radius = data.get("gpt", {}).get("radius")
    radius = None if radius is None else float(radius)

    nz = data.get("noise", {})
    noise = NoiseConfig(level=_take(nz, "level", float, 0.0, "noise."), draws=_take(nz, "draws", int, 1, "noise."))
    if noise.level < 0 or noise.draws < 1:
        raise ConfigError("noise.level: level must be >= 0 and draws >= 1")

    nt = data.get("newton", {})
    newton = NewtonConfig(
        max_iters=_take(nt, "max_iters", int, 15, "newton."),
        alpha_rel=_take(nt, "alpha_rel", float, 1e-8, "newton."),
        damping=_take(nt, "damping", float, 0.5, "newton."),
        tol=_take(nt, "tol", float, 1e-10, "newton."),
    )
    if not 0 < newton.damping <= 1:
        raise ConfigError(f"newton.damping: must lie in (0, 1], got {newton.damping}")
    if kind == "newton" and target is None:
        raise ConfigError("target: newton experiments need a [target] shape section")

    return ExperimentConfig(
        experiment=kind, shape=shape, n=n, lam=lam, helmholtz=params, omegas=omegas, k=k, s=s,
        count=count, radius=radius, target=target, noise=noise, newton=newton,
        seed=_take(data, "seed", int, 0, ""), output_dir=str(data.get("output_dir", "out")),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML ({exc})") from None
    return parse_config(data)
