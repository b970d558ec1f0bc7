import numpy as np
import pytest

import oracles
from gptshape.geometry import (CurveError, PerturbationField, ShapeSpec, curvature_profile,
                               fourier_interpolate, make_shape, periodic_antiderivative,
                               perturb_curve, radial_profile, spectral_derivative)


def test_circle_nodes_weights_curvature():
    c = make_shape(ShapeSpec.circle(1.0), 64)
    assert np.allclose(c.curvature, 1.0, atol=1e-12)
    assert np.allclose(c.weights, 2 * np.pi / 64, atol=1e-14)
    assert abs(c.weights.sum() - 2 * np.pi) < 1e-12


def test_frame_is_orthonormal(kite256):
    dots = np.einsum("ij,ij->i", kite256.tangent, kite256.normal)
    assert np.max(np.abs(dots)) < 1e-15
    assert np.allclose(np.linalg.norm(kite256.normal, axis=1), 1.0, atol=1e-15)


def test_counterclockwise_outward_normal(ellipse256):
    # outward normal at (2, 0) points along +x
    assert np.allclose(ellipse256.normal[0], [1.0, 0.0], atol=1e-12)
    area = 0.5 * np.sum(ellipse256.x * np.roll(ellipse256.y, -1) - np.roll(ellipse256.x, -1) * ellipse256.y)
    assert area > 0


def test_ellipse_curvature_against_closed_form():
    c = make_shape(ShapeSpec.ellipse(2.0, 1.0), 128)
    assert abs(c.curvature[0] - 2.0) < 1e-10
    assert abs(c.curvature[32] - 0.25) < 1e-10
    ref = oracles.ellipse_curvature(2.0, 1.0, c.t)
    assert np.max(np.abs(c.curvature - ref)) < 1e-9


def test_bump_curvature_peak_at_bump():
    c = make_shape(ShapeSpec.bump_circle(1.0, 0.0, 0.1, 0.2), 256)
    i = int(np.argmax(c.curvature))
    assert min(i, 256 - i) <= 1


@pytest.mark.parametrize("spec", [ShapeSpec.circle(0.7), ShapeSpec.ellipse(2.0, 1.0), ShapeSpec.kite(),
                                  ShapeSpec.bump_circle(1.0, 1.0, 0.15, 0.3),
                                  ShapeSpec.fourier_curve(1.0, [(3, 0.1, 0.05), (5, 0.0, 0.02)])])
def test_gauss_bonnet(spec):
    c = make_shape(spec, 256)
    assert abs(np.sum(c.curvature * c.weights) - 2 * np.pi) < 1e-10


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_perimeter_against_adaptive_quadrature():
    c = make_shape(ShapeSpec.ellipse(2.0, 1.0), 256)
    ref = oracles.arclength(lambda t: np.array([-2 * np.sin(t), np.cos(t)]))
    assert abs(c.total_length - ref) < 1e-12


def test_spectral_convergence_of_curvature():
    # the ellipse parametrization is a trigonometric polynomial: exact up to roundoff
    for n in (64, 128):
        c = make_shape(ShapeSpec.ellipse(2.0, 1.0), n)
        assert np.max(np.abs(c.curvature - oracles.ellipse_curvature(2.0, 1.0, c.t))) < 1e-11
    # an analytic but not band-limited shape shows the geometric decay
    spec = ShapeSpec.bump_circle(1.0, 0.0, 0.15, 0.3)
    ref = make_shape(spec, 1024).curvature
    errs = [np.max(np.abs(make_shape(spec, n).curvature - ref[:: 1024 // n])) for n in (64, 128)]
    assert errs[0] / errs[1] > 10


def test_make_shape_rejects_bad_resolution():
    with pytest.raises(CurveError):
        make_shape(ShapeSpec.circle(), 15)
    with pytest.raises(CurveError):
        make_shape(ShapeSpec.circle(), 8)


def test_self_intersection_detected():
    spec = ShapeSpec.fourier_curve(1.0, [(3, 1.5, 0.0)])
    with pytest.raises(CurveError):
        make_shape(spec, 128)


def test_invalid_spec():
    with pytest.raises(ValueError):
        ShapeSpec.ellipse(1.0, 2.0)
    with pytest.raises(ValueError):
        ShapeSpec(kind="square")


def test_perturb_uniform_offset_of_circle(circle128):
    h = PerturbationField.on(circle128, 1.0)
    out = perturb_curve(circle128, h, 0.1)
    ref = make_shape(ShapeSpec.circle(1.1), 128)
    assert np.max(np.abs(out.nodes - ref.nodes)) < 1e-14


def test_perturb_zero_is_identity(kite256):
    h = PerturbationField.from_function(kite256, np.cos)
    assert perturb_curve(kite256, h, 0.0) is kite256


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_perturbed_perimeter_against_brute_force():
    c = make_shape(ShapeSpec.circle(1.0), 256)
    eps = 0.05
    h = PerturbationField.from_function(c, lambda t: np.cos(2 * t))
    out = perturb_curve(c, h, eps)

    def deriv(t):
        r, dr = 1 + eps * np.cos(2 * t), -2 * eps * np.sin(2 * t)
        return np.array([dr * np.cos(t) - r * np.sin(t), dr * np.sin(t) + r * np.cos(t)])

    assert abs(out.total_length - oracles.arclength(deriv)) < 1e-10


def test_perturb_round_trip_is_second_order(kite256):
    h = PerturbationField.from_function(kite256, lambda t: np.cos(3 * t))
    gaps = []
    for eps in (1e-2, 5e-3):
        fwd = perturb_curve(kite256, h, eps)
        back = perturb_curve(fwd, -h, eps)
        gaps.append(np.max(np.linalg.norm(back.nodes - kite256.nodes, axis=1)))
    assert 3.4 < gaps[0] / gaps[1] < 4.6


def test_perturbation_field_derivatives_round_trip(ellipse256):
    h = PerturbationField.from_function(ellipse256, lambda t: np.sin(2 * t) + 0.3 * np.cos(5 * t))
    # integrate h_s ds back to h
    recon = periodic_antiderivative(h.ds * ellipse256.jacobian)
    recon += h.values[0] - recon[0]
    assert np.max(np.abs(recon - h.values)) < 1e-10
    assert np.max(np.abs(ellipse256.d_ds(h.ds) - h.dss)) < 1e-12


def test_perturbation_field_linear(ellipse256):
    a = PerturbationField.from_function(ellipse256, np.cos)
    b = PerturbationField.from_function(ellipse256, lambda t: np.sin(3 * t))
    s = a + 2.0 * b
    assert np.allclose(s.dss, a.dss + 2 * b.dss)


def test_curvature_profile():
    prof = curvature_profile(make_shape(ShapeSpec.circle(2.0), 64))
    assert np.allclose([h for _, h in prof], 0.5, atol=1e-12)
    assert prof[0][0] == 0.0 and prof[-1][0] < 4 * np.pi
    prof = curvature_profile(make_shape(ShapeSpec.ellipse(2.0, 1.0), 128))
    hs = np.array([h for _, h in prof])
    assert abs(hs.max() - 2.0) < 1e-10 and int(np.argmax(hs)) in (0, 64)
    prof = curvature_profile(make_shape(ShapeSpec.bump_circle(1.0, 2.0, 0.1, 0.3), 256))
    s_peak = prof[int(np.argmax([h for _, h in prof]))][0]
    assert abs(s_peak - 2.0) < 0.05


def test_spectral_helpers():
    t = 2 * np.pi * np.arange(64) / 64
    assert np.allclose(spectral_derivative(np.sin(3 * t)), 3 * np.cos(3 * t), atol=1e-12)
    fine = fourier_interpolate(np.cos(2 * t), 256)
    tf = 2 * np.pi * np.arange(256) / 256
    assert np.allclose(fine, np.cos(2 * tf), atol=1e-13)


def test_radial_profile_matches_spec():
    spec = ShapeSpec.fourier_curve(1.0, [(3, 0.05, 0.0)])
    c = make_shape(spec, 256)
    th = np.linspace(0, 2 * np.pi, 50, endpoint=False)
    assert np.max(np.abs(radial_profile(c, th) - spec.radial_function(th))) < 1e-6


def test_csv_export(tmp_path, kite256):
    path = tmp_path / "curve.csv"
    kite256.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x,y,nx,ny,H,w"
    assert len(lines) == 257
