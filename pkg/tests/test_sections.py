import numpy as np
import pytest

from pcsio.curves import unit_circle, whirl_curve
from pcsio.errors import InputError, PreconditionError
from pcsio.fredholm import essential_spectrum_cloud
from pcsio.problem import ExponentSpec, PcSymbol, ProblemInstance, RadialWeightSpec
from pcsio.sections import (
    SweepResult,
    cluster_compare,
    fourier_toeplitz,
    sigma_min_sweep,
)

# first oracle run: sigma_min(T_n(a - (1+i)/2)) for the (1, i) jump pair, fft_size 8192
MIDPOINT_SIGMA = {128: 0.2251616985870351, 256: 0.2070551622997745, 512: 0.19144170798569135}
ORIGIN_SIGMA_512 = 0.7325639409338117


@pytest.fixture(scope="module")
def circle():
    return unit_circle(256)


@pytest.fixture(scope="module")
def jump_pair(circle):
    return PcSymbol.piecewise_constant(circle, [1.0, -1.0], [1.0, 1j])


def test_constant_symbol_gives_identity(circle):
    sec = fourier_toeplitz(PcSymbol.constant(circle, 1.0), 256, 16)
    assert np.allclose(sec.matrix, np.eye(16), atol=1e-14)


def test_exponential_gives_shift():
    # curve samples on the transform grid, so no interpolation enters
    fine = unit_circle(1024)
    sec = fourier_toeplitz(PcSymbol.from_function(fine, lambda z: z), 1024, 8)
    assert np.allclose(sec.matrix, np.eye(8, k=-1), atol=1e-12)


def test_jump_coefficients_decay_like_inverse_m(jump_pair):
    sec = fourier_toeplitz(jump_pair, 8192, 512)
    m = np.arange(1, 400, 2)
    c = np.abs(sec.coefficient(m))
    slope = np.polyfit(np.log(m), np.log(c), 1)[0]
    assert slope == pytest.approx(-1.0, abs=2e-2)
    assert c[0] == pytest.approx(np.sqrt(2) / np.pi, rel=1e-4)
    assert sec.coefficient(0) == pytest.approx(0.5 + 0.5j)


def test_section_too_large(jump_pair):
    with pytest.raises(InputError):
        fourier_toeplitz(jump_pair, 1024, 256)


def test_oracle_needs_unit_circle():
    w = whirl_curve(1.0, n_arc=2000)
    with pytest.raises(PreconditionError):
        fourier_toeplitz(PcSymbol.constant(w, 1.0), 1024, 16)


@pytest.mark.parametrize("c", [1.0, 2 - 1j])
def test_constant_symbol_sigma_is_distance(circle, c):
    lam = np.array([0.0, 1j, 3.0, c + 0.25])
    sw = sigma_min_sweep(PcSymbol.constant(circle, c), lam, n=64, fft_size=1024)
    assert np.allclose(sw.sigma_min, np.abs(c - lam), rtol=1e-10)


def test_schur_matches_svd(jump_pair):
    lam = np.array([(1 + 1j) / 2, 0.0, 0.3 + 0.2j, 1.2 - 0.4j])
    a = sigma_min_sweep(jump_pair, lam, n=128, method="schur")
    b = sigma_min_sweep(jump_pair, lam, n=128, method="svd")
    assert np.allclose(a.sigma_min, b.sigma_min, rtol=1e-8)
    assert a.failures == [] and b.failures == []


def test_unknown_method(jump_pair):
    with pytest.raises(InputError):
        sigma_min_sweep(jump_pair, [0.0], n=16, fft_size=256, method="qr")


def test_sigma_regression_512(jump_pair):
    sw = sigma_min_sweep(jump_pair, [(1 + 1j) / 2, 0.0], n=512)
    assert sw.sigma_min[0] == pytest.approx(MIDPOINT_SIGMA[512], rel=1e-8)
    assert sw.sigma_min[1] == pytest.approx(ORIGIN_SIGMA_512, rel=1e-8)


@pytest.mark.slow
def test_midpoint_sigma_decreases_with_n(jump_pair):
    vals = [sigma_min_sweep(jump_pair, [(1 + 1j) / 2], n=n).sigma_min[0] for n in (128, 256, 512)]
    assert vals == pytest.approx([MIDPOINT_SIGMA[n] for n in (128, 256, 512)], rel=1e-8)
    assert vals[0] >= vals[1] - 1e-8 and vals[1] >= vals[2] - 1e-8


def _problem(curve):
    return ProblemInstance(curve, ExponentSpec.constant(2.0), RadialWeightSpec(()))


def test_cluster_compare_constant_symbol(circle):
    a = PcSymbol.constant(circle, 0.5 + 0.25j)
    cloud = essential_spectrum_cloud(a, _problem(circle))
    x = np.linspace(-0.5, 1.5, 21)
    lam = (x[None, :] + 1j * x[:, None]).ravel()
    sw = sigma_min_sweep(a, lam, n=64, fft_size=1024)
    rep = cluster_compare(cloud, sw)
    assert rep.agreement_rate == 1.0
    assert rep.n_classified == np.sum(np.abs(lam - (0.5 + 0.25j)) > 0.1)
    assert rep.disagreements == []


def test_cluster_compare_empty_grid(circle):
    a = PcSymbol.constant(circle, 1.0)
    cloud = essential_spectrum_cloud(a, _problem(circle))
    empty = SweepResult(np.zeros(0, dtype=complex), np.zeros(0), [])
    with pytest.raises(InputError):
        cluster_compare(cloud, empty)


def test_cluster_compare_reports_disagreement(circle, jump_pair):
    cloud = essential_spectrum_cloud(jump_pair, _problem(circle))
    lam = np.array([(1 + 1j) / 2, -0.5 - 0.5j])
    fake = SweepResult(lam, np.array([0.5, 0.01]), [])
    rep = cluster_compare(cloud, fake)
    assert rep.agreement_rate == 0.0 and len(rep.disagreements) == 2
    d = rep.to_dict()
    assert d["disagreements"][0]["predicted_member"] is True
