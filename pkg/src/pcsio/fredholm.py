"""Boundedness of S, Fredholmness and closed image of aP + Q, local and
essential spectra, and the norm-level checks (Luxemburg norm, A_p quotient).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .errors import InputError, PreconditionError, ZeroLimitError
from .horns import SpiralicHorn, classify
from .problem import PcSymbol, ProblemInstance, conjugate_exponent, validate_exponent

INDEX_NOTE = (
    "the operator index is not computed; when a Wiener-Hopf factorization of the "
    "coefficient exists, the index equals minus its total partial index kappa"
)


def _c(z):
    z = complex(z)
    return [z.real, z.imag]


@dataclass
class BoundednessReport:
    bounded: bool
    slacks: list = field(default_factory=list)
    log_holder: dict | None = None

    def to_dict(self):
        return {"bounded": self.bounded, "slacks": self.slacks, "log_holder": self.log_holder}


def check_boundedness(problem: ProblemInstance, require_log_holder=True) -> BoundednessReport:
    """0 < 1/p(t_k) + m(w_k) and 1/p(t_k) + M(w_k) < 1 at every weight node."""
    key = ("boundedness", require_log_holder)
    if key in problem._cache:
        return problem._cache[key]
    lh = None
    if require_log_holder:
        rep = validate_exponent(problem.exponent, problem.curve)
        lh = {"holds": rep.holds, "min_A_estimate": rep.min_A_estimate}
        if not rep.holds:
            raise PreconditionError(
                f"exponent fails the log-Hoelder condition (A estimate {rep.min_A_estimate:.4g})"
            )
    slacks = []
    for node in problem.weight.nodes:
        inv_p = problem.inv_p(node.t)
        m, M = problem.indices_at(node.t)
        lo = inv_p + m
        hi = inv_p + M
        slacks.append({
            "t": _c(node.t),
            "inv_p": inv_p,
            "m": m,
            "M": M,
            "slack": min(lo, 1.0 - hi),
            "ok": bool(0.0 < lo and hi < 1.0),
        })
    report = BoundednessReport(all(s["ok"] for s in slacks), slacks, lh)
    problem._cache[key] = report
    return report


def indicator_functions(problem: ProblemInstance, t, x, numeric=False):
    """(alpha_t(x), beta_t(x)) = powerlikeness indices at t plus delta(t) x.

    By default the indices come from the node profile (they coincide with the
    powerlikeness indices of a radial weight); ``numeric=True`` estimates
    them from the weight on the curve instead.
    """
    delta, _ = problem.delta(t)
    if numeric:
        from .indices import powerlikeness_indices

        pair = powerlikeness_indices(problem, t)
        a, b = pair.lower, pair.upper
    else:
        a, b = problem.indices_at(t)
    return a + delta * x, b + delta * x


# ---------------------------------------------------------------------------
# the interval test


class IntervalTest(NamedTuple):
    base: float  # E(t)
    lo: float
    hi: float
    fredholm: bool
    margin: float
    nearest_integer: int
    shift: int | None


def base_value(ratio, delta, inv_p):
    """E = -arg(r)/2pi + delta log|r| / 2pi + 1/p."""
    return -np.angle(ratio) / (2 * np.pi) + delta * np.log(np.abs(ratio)) / (2 * np.pi) + inv_p


def interval_test(E, mu, nu) -> IntervalTest:
    """Decide [E + mu, E + nu] ∩ Z = ∅; the margin is the distance to Z."""
    lo, hi = E + mu, E + nu
    k = math.ceil(lo)
    if k <= hi:
        return IntervalTest(E, lo, hi, False, 0.0, k, None)
    f = math.floor(lo)
    margin = min(lo - f, f + 1 - hi)
    nearest = f if lo - f <= f + 1 - hi else f + 1
    return IntervalTest(E, lo, hi, True, margin, nearest, -f)


def theta_condition(E, mu, nu, thetas):
    """Sampled check that E + theta mu + (1 - theta) nu avoids Z along a theta grid.

    A sample equal to an integer, or a change of integer part between
    neighbouring samples (the path is continuous), counts as a violation.
    """
    vals = E + np.asarray(thetas) * mu + (1 - np.asarray(thetas)) * nu
    fl = np.floor(vals)
    return bool(np.all(vals != fl) and np.all(fl == fl[0]))


@dataclass
class FredholmReport:
    fredholm: bool
    failures: list = field(default_factory=list)
    margins: list = field(default_factory=list)
    degenerate_zero_limit: list | None = None
    min_margin: float = math.inf
    warnings: list = field(default_factory=list)
    index_note: str = INDEX_NOTE

    def to_dict(self):
        return {
            "fredholm": self.fredholm,
            "failures": self.failures,
            "margins": self.margins,
            "degenerate_zero_limit": self.degenerate_zero_limit,
            "min_margin": None if math.isinf(self.min_margin) else self.min_margin,
            "warnings": self.warnings,
            "index_note": self.index_note,
        }


def _zero_points(a: PcSymbol):
    """Curve points where a one-sided limit or a background sample vanishes."""
    zeros = []
    for j in a.jumps:
        if j.left[0, 0] == 0 or j.right[0, 0] == 0:
            zeros.append(j.t)
    jump_idx = {j.index for j in a.jumps}
    n = a.curve.n_samples - 1
    for i in np.nonzero(a.background[:n, 0, 0] == 0)[0]:
        if int(i) not in jump_idx:
            zeros.append(complex(a.curve.points[i]))
    return zeros


def fredholm_sio(a: PcSymbol, problem: ProblemInstance, margin_warn=1e-6) -> FredholmReport:
    """Fredholm criterion for aP + Q with a scalar PC coefficient."""
    if not a.scalar:
        raise PreconditionError("fredholm_sio needs a scalar coefficient (N = 1)")
    if not check_boundedness(problem).bounded:
        raise PreconditionError("the singular integral operator is not bounded on this space")
    zeros = _zero_points(a)
    if zeros:
        return FredholmReport(False, degenerate_zero_limit=[_c(z) for z in zeros], min_margin=0.0)
    failures, margins = [], []
    for j in a.jumps:
        loc = problem.local(j.t)
        r = complex(j.left[0, 0]) / complex(j.right[0, 0])
        res = interval_test(base_value(r, loc.delta, loc.inv_p), loc.mu, loc.nu)
        entry = {
            "t": _c(j.t),
            "E": res.base,
            "interval": [res.lo, res.hi],
            "margin": res.margin,
            "shift": res.shift,
            "delta": loc.delta,
            "delta_source": loc.delta_source,
            "mu": loc.mu,
            "nu": loc.nu,
        }
        margins.append(entry)
        if not res.fredholm:
            failures.append({"t": _c(j.t), "interval": [res.lo, res.hi], "integer": res.nearest_integer})
    min_margin = min((m["margin"] for m in margins), default=math.inf)
    warnings = [
        f"margin {m['margin']:.3g} at t={m['t']} is below {margin_warn:g}"
        for m in margins
        if 0 < m["margin"] < margin_warn
    ]
    return FredholmReport(not failures, failures, margins, None, min_margin, warnings)


def closed_image(a: PcSymbol, problem: ProblemInstance) -> bool:
    """Image of aP + Q is closed iff the interval condition holds at every jump."""
    zeros = _zero_points(a)
    if zeros:
        raise ZeroLimitError(zeros[0])
    return fredholm_sio(a, problem).fredholm


# ---------------------------------------------------------------------------
# spectra


def _horn_levels(problem, t):
    loc = problem.local(t)
    a, b = loc.inv_p + loc.mu, loc.inv_p + loc.nu
    if not (0.0 < a and b < 1.0):
        raise PreconditionError(f"levels [{a}, {b}] at t={t} leave (0, 1); the instance is not bounded")
    return loc.delta, a, b


def local_spectrum(problem: ProblemInstance, t) -> SpiralicHorn:
    """S(0, 1; delta(t); 1/p(t) + mu_t, 1/p(t) + nu_t)."""
    delta, a, b = _horn_levels(problem, t)
    return SpiralicHorn(0.0, 1.0, delta, a, b)


@dataclass
class SpectrumCloud:
    range_points: np.ndarray
    horns: list  # (t, SpiralicHorn)
    grid: np.ndarray | None = None
    grid_member: np.ndarray | None = None

    def contains(self, lam):
        """Analytic membership: a range sample, or a point of some jump horn."""
        lam = np.asarray(lam, dtype=complex)
        out = np.isin(lam, self.range_points)
        for _, h in self.horns:
            out = out | h.contains(lam)
        return out

    def to_dict(self):
        d = {
            "horns": [{"t": _c(t), **h.to_dict()} for t, h in self.horns],
            "n_range_points": int(self.range_points.size),
        }
        if self.grid is not None:
            d["grid_size"] = int(self.grid.size)
            d["grid_in_spectrum"] = int(self.grid_member.sum())
        return d


def essential_spectrum_cloud(a: PcSymbol, problem: ProblemInstance, lam_grid=None, mode="analytic") -> SpectrumCloud:
    """Essential spectrum of aP + Q: the range of a plus one horn per jump.

    ``mode="grid"`` decides each grid point by running the Fredholm test on
    a - lambda; ``mode="analytic"`` uses horn membership. Both give the same
    booleans on any grid.
    """
    if not a.scalar:
        raise PreconditionError("essential spectra are computed for scalar coefficients")
    if not check_boundedness(problem).bounded:
        raise PreconditionError("the singular integral operator is not bounded on this space")
    jump_idx = {j.index for j in a.jumps}
    n = a.curve.n_samples - 1
    keep = [i for i in range(n) if i not in jump_idx]
    rng = a.background[keep, 0, 0]
    horns = []
    for j in a.jumps:
        delta, lo, hi = _horn_levels(problem, j.t)
        horns.append((j.t, SpiralicHorn(j.left[0, 0], j.right[0, 0], delta, lo, hi)))
    cloud = SpectrumCloud(rng, horns)
    if lam_grid is None:
        return cloud
    grid = np.asarray(lam_grid, dtype=complex).ravel()
    if mode == "grid":
        member = np.array([not fredholm_sio(a.shift(lam), problem).fredholm for lam in grid])
    elif mode == "analytic":
        member = cloud.contains(grid)
    else:
        raise InputError(f"unknown spectrum mode {mode!r}")
    cloud.grid = grid
    cloud.grid_member = member
    return cloud


# ---------------------------------------------------------------------------
# norms


def luxemburg_norm(f_samples, weight_samples, exponent, measure_weights, rtol=1e-10) -> float:
    """inf{lam > 0 : sum_i m_i |f_i w_i / lam|^{p_i} <= 1} by root finding on log lam."""
    fw = np.abs(np.asarray(f_samples) * np.asarray(weight_samples)).astype(float)
    m = np.asarray(measure_weights, dtype=float)
    p = np.broadcast_to(np.asarray(exponent, dtype=float), fw.shape)
    if np.any(p < 1) or np.any(m < 0):
        raise InputError("exponent must be >= 1 and measure weights non-negative")
    if not np.all(np.isfinite(fw)):
        raise InputError("modular is infinite for every lambda: f*w is unbounded on the samples")
    live = (fw > 0) & (m > 0)
    if not live.any():
        return 0.0
    lfw, lm, pp = np.log(fw[live]), np.log(m[live]), p[live]

    def g(ell):
        return float(logsumexp(pp * (lfw - ell) + lm))

    lo = hi = float(np.max(lfw))
    step = 1.0
    while g(lo) <= 0:
        lo -= step
        step *= 2
    step = 1.0
    while g(hi) > 0:
        hi += step
        step *= 2
    ell = brentq(g, lo, hi, xtol=rtol * 1e-2, rtol=4 * np.finfo(float).eps, maxiter=500)
    return float(np.exp(ell))


def ap_condition_estimate(problem: ProblemInstance, t_grid=None, R_grid=None, refine=8, growth_tol=1e-2):
    """Grid supremum of (1/R) |w chi|_p |w^-1 chi|_q over portions Gamma(t, R).

    The portion integrals exclude a small disc |tau - t| < eps; the quotient
    is recomputed for eps = R 10^-k, k = 1..refine, and the point is flagged
    as diverging when the last refinement still grows it by more than
    ``growth_tol`` (relative).
    """
    curve = problem.curve
    if t_grid is None:
        pts = curve.points[:-1]
        t_grid = list(problem.special_points) + list(pts[:: max(1, pts.size // 16)])
        t_grid = list(dict.fromkeys(np.round(np.asarray(t_grid, dtype=complex), 12)))
    if R_grid is None:
        R_grid = np.geomspace(max(2 * curve.resolution, 1e-3 * curve.diameter), curve.diameter, 24)
    R_grid = np.asarray(R_grid, dtype=float)
    p_s = problem.exponent.at_samples(curve)

    def quotient(por, R, eps):
        pc = por.pieces(R, eps)
        if pc.lengths.size == 0:
            raise InputError(f"portion Gamma({por.t}, {R}) has no samples")
        p = pc.interpolate(p_s)
        q = conjugate_exponent(p)
        logw = problem.weight.log_w(pc.points)
        one = np.ones_like(pc.lengths)
        a = luxemburg_norm(one, np.exp(logw), p, pc.lengths)
        b = luxemburg_norm(one, np.exp(-logw), q, pc.lengths)
        return a * b / R

    best = 0.0
    arg_best = None
    diverging_at = []
    for t in t_grid:
        por = curve.portions(t)
        for R in R_grid:
            val = quotient(por, R, R * 10.0 ** -refine)
            if val > best:
                best, arg_best = val, (complex(t), float(R))
        R = R_grid[-1]
        seq = [quotient(por, R, R * 10.0 ** -k) for k in range(refine - 1, refine + 1)]
        if seq[-1] > seq[-2] * (1 + growth_tol):
            diverging_at.append(complex(t))
    return {
        "sup_estimate": best,
        "argmax": None if arg_best is None else [_c(arg_best[0]), arg_best[1]],
        "diverging": bool(diverging_at),
        "diverging_at": [_c(t) for t in diverging_at],
    }


def shape_of(problem, t):
    return classify(local_spectrum(problem, t))
