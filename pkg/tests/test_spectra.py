import numpy as np
import pytest

from gptshape.geometry import ShapeSpec, make_shape
from gptshape.potentials import ContractError, np_adjoint_matrix
from gptshape.spectra import decay_exponent, np_spectrum, twin_defect


def test_ellipse_levels(ellipse256):
    levels = np_spectrum(ellipse256, 16).magnitude_levels()
    for j in range(1, 7):
        assert abs(levels[j - 1] - (1 / 3) ** j) < 1e-6


def test_ellipse_levels_other_aspect():
    c = make_shape(ShapeSpec.ellipse(1.5, 1.0), 256)
    q = 0.5 / 2.5
    levels = np_spectrum(c, 16).magnitude_levels()
    assert np.allclose(levels[:5], q ** np.arange(1, 6), atol=1e-8)


def test_disk_spectrum():
    rep = np_spectrum(make_shape(ShapeSpec.circle(0.6), 128), 10)
    assert abs(rep.eigenvalues[0] - 0.5) < 1e-8
    assert np.max(np.abs(rep.eigenvalues[1:])) < 1e-8


@pytest.mark.parametrize("spec", [ShapeSpec.kite(), ShapeSpec.bump_circle(1.0, 0.5, 0.15, 0.3),
                                  ShapeSpec.fourier_curve(1.0, [(2, 0.1, 0.0), (3, 0.0, 0.08)])])
def test_twin_spectrum(spec):
    rep = np_spectrum(make_shape(spec, 256), 30)
    assert rep.twin_defect < 1e-6
    assert np.sum(np.abs(rep.eigenvalues - 0.5) < 1e-8) == 1


def test_half_eigenvector_of_adjoint_is_constant(kite256):
    # K (the weighted transpose of K*) fixes constants
    k = np_adjoint_matrix(kite256)
    w = kite256.weights
    kd = (k / w[None, :]).T * w[None, :]
    assert np.max(np.abs(kd @ np.ones(kite256.n) - 0.5)) < 1e-12
    ev = np.linalg.eigvals(kd)
    assert np.sum(np.abs(ev - 0.5) < 1e-8) == 1


def test_rigid_motion_and_scale_invariance(kite256):
    moved = kite256.transformed(scale=2.5, rotation=0.7, shift=(0.3, -1.2))
    a = np_spectrum(kite256, 20).eigenvalues
    b = np_spectrum(moved, 20).eigenvalues
    assert np.max(np.abs(a - b)) < 1e-8


def test_count_contract(kite256):
    with pytest.raises(ContractError):
        np_spectrum(kite256, kite256.n // 4 + 1)


def test_twin_defect_and_decay_helpers():
    assert twin_defect(np.array([0.5, 0.2, -0.2, 0.1])) == pytest.approx(0.1)
    assert twin_defect(np.array([0.5, 0.2, -0.2, 0.1, -0.1])) == pytest.approx(0.0)
    assert decay_exponent(1.0 / np.arange(1, 20) ** 2) == pytest.approx(-2.0)


def test_decay_fit_is_negative(kite256):
    assert np_spectrum(kite256, 40).decay_fit < -1


def test_csv_export(tmp_path, ellipse256):
    rep = np_spectrum(ellipse256, 8)
    rep.to_csv(tmp_path / "s.csv")
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert rows[0] == "j,re,im"
    assert abs(abs(float(rows[2].split(",")[1])) - 1 / 3) < 1e-6
