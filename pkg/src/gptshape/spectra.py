"""Neumann-Poincare spectra of discretized curves.

Eigenvalues are computed from W^(1/2) K* W^(-1/2) (W = diag of quadrature
weights), which has the same spectrum as K* but better-scaled eigenvectors.

Two normalizations are reported.  ``eigenvalues`` are those of K* itself
and lie in (-1/2, 1/2].  ``fredholm`` are the classical Fredholm
eigenvalues, i.e. the eigenvalues of 2K* (double-layer kernel normalized by
1/pi); for an ellipse they are +-((a-b)/(a+b))^j.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .geometry import BoundaryCurve
from .potentials import ContractError, np_adjoint_matrix


def symmetrized_np(curve: BoundaryCurve, kstar: np.ndarray | None = None) -> np.ndarray:
    if kstar is None:
        kstar = np_adjoint_matrix(curve)
    sw = np.sqrt(curve.weights)
    return sw[:, None] * kstar / sw[None, :]


def np_eigenvalues(curve: BoundaryCurve) -> np.ndarray:
    """All eigenvalues of K*, sorted by magnitude (descending), +lambda before -lambda."""
    ev = np.linalg.eigvals(symmetrized_np(curve))
    # twins have equal magnitude only up to roundoff; quantize so the order is stable
    mag = np.round(np.abs(ev), 10)
    return ev[np.lexsort((-ev.real, -mag))]


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    twin_defect: float
    decay_fit: float
    max_imag: float
    curve_id: str

    @property
    def fredholm(self) -> np.ndarray:
        return 2.0 * self.eigenvalues

    @property
    def nontrivial(self) -> np.ndarray:
        """Eigenvalues with the one closest to 1/2 removed."""
        i = int(np.argmin(np.abs(self.eigenvalues - 0.5)))
        return np.delete(self.eigenvalues, i)

    def magnitude_levels(self, normalization: str = "fredholm") -> np.ndarray:
        """Magnitudes of the +- twin pairs: one value per pair, largest first."""
        mags = np.sort(np.abs(self.nontrivial))[::-1]
        mags = mags[: 2 * (len(mags) // 2)].reshape(-1, 2).mean(axis=1)
        return 2 * mags if normalization == "fredholm" else mags

    def to_csv(self, path, normalization: str = "fredholm") -> None:
        """Columns j, Re lambda_j, Im lambda_j (j from 1, sorted by magnitude)."""
        vals = self.fredholm if normalization == "fredholm" else self.eigenvalues
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["j", "re", "im"])
            for j, v in enumerate(vals, start=1):
                writer.writerow([j, repr(float(v.real)), repr(float(v.imag))])


def twin_defect(eigenvalues: np.ndarray, spectrum: np.ndarray | None = None, floor: float = 1e-6) -> float:
    """max_i dist(-lambda_i, spectrum) over lambda_i != 1/2 with |lambda_i| > floor."""
    ev = np.asarray(eigenvalues)
    spectrum = ev if spectrum is None else np.asarray(spectrum)
    i_half = int(np.argmin(np.abs(ev - 0.5)))
    worst = 0.0
    for i, lam in enumerate(ev):
        if i == i_half or abs(lam) <= floor:
            continue
        worst = max(worst, float(np.min(np.abs(spectrum + lam))))
    return worst


def decay_exponent(values: np.ndarray, start: int = 4) -> float:
    """Slope of log|v_j| against log j over j = start..len(values)."""
    v = np.abs(np.asarray(values))
    j = np.arange(1, len(v) + 1)
    sel = (j >= start) & (v > 0)
    if sel.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(j[sel]), np.log(v[sel]), 1)[0])


def np_spectrum(curve: BoundaryCurve, count: int) -> SpectrumReport:
    """Leading ``count`` NP eigenvalues with twin-spectrum and decay diagnostics."""
    if count < 1 or count > curve.n // 4:
        raise ContractError(f"count must be in [1, N/4] = [1, {curve.n // 4}], got {count}")
    ev = np_eigenvalues(curve)
    lead = ev[:count]
    report_twin = twin_defect(lead, ev)
    i_half = int(np.argmin(np.abs(lead - 0.5)))
    rest = np.delete(lead, i_half) if abs(lead[i_half] - 0.5) < 1e-6 else lead
    return SpectrumReport(
        eigenvalues=lead,
        twin_defect=report_twin,
        decay_fit=decay_exponent(rest),
        max_imag=float(np.max(np.abs(ev.imag))),
        curve_id=curve.curve_hash,
    )
