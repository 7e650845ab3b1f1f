"""Acceptance gate: one test per criterion, at the stated tolerances and time budgets."""

import time
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import brentq

from instances import random_jump_instance
from pcsio.curves import node_circle, unit_circle, whirl_curve
from pcsio.fredholm import (
    check_boundedness,
    essential_spectrum_cloud,
    fredholm_sio,
    interval_test,
    luxemburg_norm,
    theta_condition,
)
from pcsio.horns import SpiralicHorn, boundary_curve
from pcsio.indices import mo_indices, powerlikeness_indices
from pcsio.problem import (
    ExponentSpec,
    PcSymbol,
    ProblemInstance,
    RadialWeightSpec,
    carleson_constant,
    spirality_delta,
)
from pcsio.profiles import AlternatingPower, PowerLaw, load_csv, profile_product
from pcsio.sections import cluster_compare, sigma_min_sweep
from pcsio.symbols import ap_plus_q, fredholm_algebra

FIX = Path(__file__).parent / "fixtures"


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def test_criterion_01_mo_index_recovery():
    with Timer() as tm:
        for gamma in (-0.4, -0.1, 0.0, 0.25, 0.49):
            pair = mo_indices(PowerLaw(gamma))
            assert abs(pair.lower - gamma) < 1e-3 and abs(pair.upper - gamma) < 1e-3
    assert tm.elapsed < 5


def test_criterion_02_powerlikeness_identity():
    fixtures = [
        [(0j, PowerLaw(0.25))],
        [(0j, PowerLaw(-0.3))],
        [(0j, AlternatingPower(0.3, 0.6))],
        [(0j, load_csv(FIX / "alternating_profile.csv"))],
        [(0j, profile_product(PowerLaw(0.1), AlternatingPower(0.0, 0.25))), (2j, PowerLaw(-0.2))],
    ]
    gaps = 0
    with Timer() as tm:
        c = node_circle()
        for nodes in fixtures:
            pr = ProblemInstance(c, ExponentSpec.constant(2), RadialWeightSpec(tuple(nodes)))
            got = powerlikeness_indices(pr, 0j)
            ref = mo_indices(nodes[0][1], length=c.total_length)
            assert abs(got.lower - ref.lower) < 1e-2 and abs(got.upper - ref.upper) < 1e-2
            gaps += ref.lower < ref.upper - 1e-2
    assert gaps >= 1
    assert tm.elapsed < 30


def test_criterion_03_criterion_equivalence():
    rng = np.random.default_rng(20240601)
    disagreements = 0
    with Timer() as tm:
        for _ in range(1000):
            a, pr, _ = random_jump_instance(rng)
            assert check_boundedness(pr).bounded
            sio = fredholm_sio(a, pr).fredholm
            alg = fredholm_algebra(ap_plus_q(a), pr)["fredholm"]
            disagreements += sio != alg
    assert disagreements == 0
    assert tm.elapsed < 60


def test_criterion_04_theta_reduction():
    rng = np.random.default_rng(4)
    thetas = np.linspace(0, 1, 10_000)
    E = rng.uniform(-5, 5, 10_000)
    mu = rng.uniform(-1, 1, 10_000)
    nu = mu + rng.uniform(0, 1, 10_000)
    with Timer() as tm:
        bad = sum(
            interval_test(e, m, n).fredholm != theta_condition(e, m, n, thetas)
            for e, m, n in zip(E, mu, nu)
        )
    assert bad == 0
    assert tm.elapsed < 5


def test_criterion_05_geometry_degeneracies():
    rng = np.random.default_rng(5)
    with Timer() as tm:
        z1, z2 = 0.3 + 1j, -2 + 0.25j
        seg = boundary_curve(SpiralicHorn(z1, z2, 0.0, 0.5, 0.5), 0.5).points
        assert np.max(np.abs(((seg - z1) / (z2 - z1)).imag)) < 1e-12

        for c in (0.15, 0.3, 0.8):
            arc = boundary_curve(SpiralicHorn(z1, z2, 0.0, c, c), c).points
            dev = np.angle(np.exp(1j * (np.angle((arc - z1) / (arc - z2)) - 2 * np.pi * c)))
            assert np.max(np.abs(dev)) < 1e-9

        u = rng.uniform(-4, 4, 100_000) + 1j * rng.uniform(-4, 4, 100_000)
        for h in (SpiralicHorn(0, 1, 0.0, 0.3, 0.7), SpiralicHorn(1j, -1, 1.5, 0.2, 0.45)):
            ref = h.contains(u)
            for k in range(-3, 4):
                assert np.array_equal(h.contains(u, branch=k), ref)

        for delta, a, b in ((0.0, 0.3, 0.7), (1.0, 0.5, 0.5), (-2.0, 0.1, 0.6)):
            h = SpiralicHorn(z1, z2, delta, a, b)
            for c in np.linspace(a, b, 5):
                v = h.level(boundary_curve(h, c).points)
                d = np.mod(v - c, 1.0)
                assert np.max(np.minimum(d, 1 - d)) < 1e-9
    assert tm.elapsed < 10


def test_criterion_06_khvedelidze_rule():
    ps = [2.0, 4.0, 8.0, 16.0, 32.0, 1.25, 1.6, 1.28, 6.4, 1.024]
    curve = unit_circle(64)
    cases = 0
    with Timer() as tm:
        for p in ps:
            inv = 1.0 / p
            # boundary cases first, then interior and exterior exponents
            lams = [-inv, 1.0 - inv, -inv + 0.01, 1.0 - inv - 0.01, 0.0, -inv - 0.3, 1.2 - inv, 0.05, -0.05, 0.9]
            for lam in lams:
                pr = ProblemInstance(curve, ExponentSpec.constant(p), RadialWeightSpec(((1.0, PowerLaw(lam)),)))
                expected = 0 < inv + lam < 1
                assert check_boundedness(pr).bounded == expected, (p, lam)
                cases += 1
    assert cases == 100
    assert tm.elapsed < 1


def test_criterion_07_carleson_constant():
    with Timer() as tm:
        c = unit_circle(1000)
        full = carleson_constant(c, n_t=1000, n_R=1000)
        small = carleson_constant(c, R_grid=[0.01])
    assert abs(full - np.pi) / np.pi < 1e-2
    assert abs(small - 2.0) / 2.0 < 1e-2
    assert tm.elapsed < 10


def test_criterion_08_luxemburg_norm():
    rng = np.random.default_rng(8)
    with Timer() as tm:
        for _ in range(100):
            k = int(rng.integers(1, 10))
            f = rng.uniform(-5, 5, k)
            m = rng.uniform(0.05, 3, k)
            p = rng.uniform(1.0, 9.0)
            ref = np.sum(m * np.abs(f) ** p) ** (1 / p)
            assert abs(luxemburg_norm(f, np.ones(k), p, m) - ref) <= 1e-9 * ref
        root = brentq(lambda lam: lam ** -2 + lam ** -4 - 1, 1.0, 2.0, xtol=1e-14)
        val = luxemburg_norm([1.0, 1.0], [1.0, 1.0], [2.0, 4.0], [1.0, 1.0])
        assert abs(val - root) < 1e-6
        assert round(val, 4) == 1.2720
    assert tm.elapsed < 5


@pytest.fixture(scope="module")
def oracle_run():
    curve = unit_circle(256)
    a = PcSymbol.piecewise_constant(curve, [1.0, -1.0], [1.0, 1j])
    pr = ProblemInstance(curve, ExponentSpec.constant(2.0), RadialWeightSpec(()))
    x = np.linspace(-0.5, 1.5, 41)
    lam = (x[None, :] + 1j * x[:, None]).ravel()
    probes = np.array([(1 + 1j) / 2, 0.0])
    t0 = time.perf_counter()
    cloud = essential_spectrum_cloud(a, pr)
    sweep = sigma_min_sweep(a, np.concatenate([lam, probes]), n=512, fft_size=8192)
    elapsed = time.perf_counter() - t0
    grid = sweep._replace(lam=sweep.lam[:-2], sigma_min=sweep.sigma_min[:-2])
    report = cluster_compare(cloud, grid, threshold=0.05, guard=0.1)
    return {"report": report, "probe": sweep.sigma_min[-2:], "elapsed": elapsed, "failures": sweep.failures}


def test_criterion_09a_oracle_agreement(oracle_run):
    assert oracle_run["failures"] == []
    assert oracle_run["report"].agreement_rate >= 0.95
    assert oracle_run["elapsed"] < 120


def test_criterion_09b_oracle_in_spectrum_probe(oracle_run):
    assert oracle_run["probe"][0] < 0.05


def test_criterion_09c_oracle_resolvent_probe(oracle_run):
    assert oracle_run["probe"][1] > 0.1


def test_criterion_10_spirality_regression():
    with Timer() as tm:
        fit = spirality_delta(whirl_curve(1.0), 0.0)
    assert abs(fit.delta - 1.0) < 1e-2
    assert tm.elapsed < 5
