import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from gptshape.geometry import PerturbationField, ShapeSpec, make_shape
from gptshape.gpt import GptMatrix, compute_gpt
from gptshape.inversion import fourier_jacobian, recover_hH
from gptshape.sensitivity import k1_matrix
from gptshape.spectra import np_spectrum

coef = st.floats(-0.06, 0.06)
modes = st.lists(st.tuples(st.integers(2, 5), coef, coef), min_size=1, max_size=3)
radii = st.floats(0.5, 1.5)
contrasts = st.one_of(st.floats(0.55, 5.0), st.floats(-5.0, -0.55))

SETTINGS = settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def shape(radius, terms, n=128):
    return make_shape(ShapeSpec.fourier_curve(radius, terms), n)


@SETTINGS
@given(radii, modes)
def test_gauss_bonnet(radius, terms):
    c = shape(radius, terms)
    assert abs(np.sum(c.curvature * c.weights) - 2 * np.pi) < 1e-9


@SETTINGS
@given(radii, modes)
def test_spectrum_is_real_and_twinned(radius, terms):
    rep = np_spectrum(shape(radius, terms), 16)
    assert rep.max_imag < 1e-8
    assert rep.twin_defect < 1e-6
    assert abs(rep.eigenvalues[0] - 0.5) < 1e-10


@SETTINGS
@given(radii, modes, contrasts)
def test_gpt_is_hermitian(radius, terms, lam):
    m = compute_gpt(shape(radius, terms), lam, 3)
    v = m.values
    # M[m][n] = conj(M[-m][-n]) with orders -K..-1, 1..K
    assert np.max(np.abs(v - np.conj(v[::-1, ::-1]))) < 1e-10 * np.max(np.abs(v))


@SETTINGS
@given(radii, contrasts, st.floats(0.5, 2.0))
def test_gpt_scales_with_dilation(radius, lam, factor):
    c = make_shape(ShapeSpec.ellipse(radius, 0.7 * radius), 128)
    a = compute_gpt(c, lam, 2)
    b = compute_gpt(c.transformed(scale=factor), lam, 2)
    for m in a.orders:
        for n in a.orders:
            assert abs(b[m, n] - factor ** (abs(m) + abs(n)) * a[m, n]) < 1e-9 * np.max(np.abs(b.values))


@SETTINGS
@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6), st.floats(-3, 3))
def test_k1_is_linear_in_h(vals, scale):
    c = make_shape(ShapeSpec.kite(), 64)
    a = PerturbationField.from_function(c, lambda t: vals[0] * np.cos(t) + vals[1] * np.sin(2 * t) + vals[2])
    b = PerturbationField.from_function(c, lambda t: vals[3] * np.cos(3 * t) + vals[4] * np.sin(t) + vals[5])
    lhs = k1_matrix(c, a + scale * b)
    rhs = k1_matrix(c, a) + scale * k1_matrix(c, b)
    assert np.max(np.abs(lhs - rhs)) < 1e-9 * (1 + np.max(np.abs(lhs)))


_KITE = make_shape(ShapeSpec.kite(), 128)
_JAC = fourier_jacobian(_KITE, 1.0, 3, 3)


@SETTINGS
@given(st.integers(0, 2 ** 32 - 1), st.floats(-4, 4))
def test_recover_is_linear(seed, scale):
    rng = np.random.default_rng(seed)
    a, b = (rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)) for _ in range(2))

    def rec(v):
        return recover_hH(_KITE, 1.0, GptMatrix(v, _JAC.orders, 1.0), 3, jacobian=_JAC).h

    assert np.allclose(rec(a + scale * b), rec(a) + scale * rec(b), atol=1e-9)
