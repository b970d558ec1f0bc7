"""Boundary-integral tools for generalized polarization tensors of planar shapes."""

__version__ = "0.1.0"

from .geometry import (BoundaryCurve, CurveError, PerturbationField, ShapeSpec, curvature_profile,
                       make_shape, perturb_curve)
from .gpt import GptMatrix, compute_gpt, gpt_from_far_field, harmonic_trace, scattered_potential
from .inversion import change_of_basis, lb_eigenbasis, newton_reconstruct, recover_hH
from .potentials import (BoundaryOperator, ConditioningError, ContractError, HelmholtzParams,
                         assemble_helmholtz_ops, assemble_np_adjoint, assemble_single_layer,
                         interior_dtn, solve_electrostatic, solve_helmholtz_transmission,
                         surface_laplacian)
from .scattering import ScatteringMatrix, compute_sc, sc_from_far_field, wave_change_of_basis, wave_trace
from .sensitivity import (SensitivityJacobian, assemble_k1, gpt_jacobian, gpt_sensitivity,
                          sc_sensitivity_fd, sensitivity_map)
from .spectra import SpectrumReport, np_spectrum

__all__ = [
    "BoundaryCurve", "CurveError", "PerturbationField", "ShapeSpec", "curvature_profile", "make_shape",
    "perturb_curve", "GptMatrix", "compute_gpt", "gpt_from_far_field", "harmonic_trace",
    "scattered_potential", "change_of_basis", "lb_eigenbasis", "newton_reconstruct", "recover_hH",
    "BoundaryOperator", "ConditioningError", "ContractError", "HelmholtzParams", "assemble_helmholtz_ops",
    "assemble_np_adjoint", "assemble_single_layer", "interior_dtn", "solve_electrostatic",
    "solve_helmholtz_transmission", "surface_laplacian", "ScatteringMatrix", "compute_sc",
    "sc_from_far_field", "wave_change_of_basis", "wave_trace", "SensitivityJacobian", "assemble_k1",
    "gpt_jacobian", "gpt_sensitivity", "sc_sensitivity_fd", "sensitivity_map", "SpectrumReport",
    "np_spectrum",
]
