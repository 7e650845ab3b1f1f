"""Indices of submultiplicative functions.

Three profiles are built numerically, all on log scale:

* Phi_{rho,B}(x), the sup over y <= B of rho(xy)/rho(y) (x <= 1) or
  rho(y)/rho(y/x) (x > 1), with the limit B -> 0 giving Phi^0 rho;
* V_t^0 w(x), the limsup over R -> 0 of ratios of exponentiated mean
  values of log w over the portions Gamma(t, xR) and Gamma(t, R);
* the almost-increasing envelopes x^a rho and x^b / rho (class W).

The lower and upper indices are the slopes log Phi(x) / log x at x -> 0 and
x -> infinity; both are cross-checked against the sup / inf forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, InputError, InsufficientScaleError, PreconditionError

LN2 = np.log(2.0)
LN10 = np.log(10.0)


@dataclass(frozen=True)
class IndexPair:
    lower: float
    upper: float
    details: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise InputError("indices must be finite")
        if self.lower > self.upper:
            raise InputError(f"lower index {self.lower} exceeds upper index {self.upper}")

    def as_tuple(self):
        return (self.lower, self.upper)


class SubmultProfile(NamedTuple):
    x: np.ndarray
    phi: np.ndarray
    source: str
    converged: bool
    # one row per cutoff: log Phi at that cutoff, used for the stabilization test
    log_history: np.ndarray
    cutoffs: np.ndarray

    @property
    def log_x(self):
        return np.log(self.x)

    @property
    def log_phi(self):
        return self.log_history[-1]


def default_x_grid(K=20, per_octave=4):
    j = np.arange(-K * per_octave, K * per_octave + 1)
    return 2.0 ** (j / per_octave)


def _stabilized(log_hist, rtol):
    """Relative change of Phi between the last two cutoffs, and the verdict."""
    if log_hist.shape[0] < 2:
        return 0.0, True
    change = float(np.max(np.abs(np.expm1(log_hist[-1] - log_hist[-2]))))
    return change, change < rtol


def phi_estimate(profile, x_grid=None, y_cutoffs=None, length=1.0, per_decade=512,
                 floor_decades=60.0, rtol=1e-3, chunk=8) -> SubmultProfile:
    """Approximate Phi^0 rho on ``x_grid`` by stabilization over decreasing cutoffs.

    For each cutoff B_j the sup runs over a geometric y-grid between a floor
    ``floor_decades`` below the last cutoff and B_j.
    """
    x = default_x_grid() if x_grid is None else np.asarray(x_grid, dtype=float)
    if np.any(x <= 0):
        raise InputError("x grid must be positive")
    if y_cutoffs is None:
        y_cutoffs = length * 4.0 ** -np.arange(21)
    cut = np.sort(np.asarray(y_cutoffs, dtype=float))[::-1]
    lx = np.log(x)
    lcut = np.log(cut)
    lo = lcut[-1] - floor_decades * LN10
    ny = int(np.ceil((lcut[0] - lo) / LN10 * per_decade)) + 1
    ly = np.linspace(lo, lcut[0], ny)
    # each cutoff rounds down to the nearest grid node
    pos = np.searchsorted(ly, lcut + 1e-12, side="right") - 1
    with np.errstate(invalid="ignore", over="ignore"):
        lr_y = profile.log_rho(ly)
    if not np.all(np.isfinite(lr_y)):
        raise InputError("profile is not positive and finite on the analysis range")
    hist = np.empty((cut.size, x.size))
    for start in range(0, x.size, chunk):
        sl = slice(start, start + chunk)
        lxs = lx[sl, None]
        small = lxs <= 0
        # x <= 1: rho(xy)/rho(y); x > 1: rho(y)/rho(y/x)
        with np.errstate(invalid="ignore", over="ignore"):
            num = np.where(small, profile.log_rho(lxs + ly), lr_y)
            den = np.where(small, lr_y, profile.log_rho(ly - lxs))
        ratio = num - den
        if not np.all(np.isfinite(ratio)):
            raise InputError("profile is not positive and finite on the analysis range")
        run = np.maximum.accumulate(ratio, axis=1)
        hist[:, sl] = run[:, pos].T
    change, ok = _stabilized(hist, rtol)
    return SubmultProfile(x, np.exp(hist[-1]), "phi_0", ok, hist, cut)


def _slopes(lx, lphi, K=20):
    """Slope indices at x = 2^{-K}, 2^{K} and the sup/inf forms."""
    i_lo = int(np.argmin(np.abs(lx + K * LN2)))
    i_hi = int(np.argmin(np.abs(lx - K * LN2)))
    lower = lphi[i_lo] / lx[i_lo]
    upper = lphi[i_hi] / lx[i_hi]
    below = lx < 0
    above = lx > 0
    sup_lower = float(np.max(lphi[below] / lx[below]))
    inf_upper = float(np.min(lphi[above] / lx[above]))
    return float(lower), float(upper), sup_lower, inf_upper


def indices_from_profile(sp: SubmultProfile, K=20, check_tol=5e-3, order_tol=1e-6) -> IndexPair:
    if not sp.converged:
        raise ConvergenceError(f"{sp.source} profile did not stabilize over the cutoff sequence")
    lower, upper, sup_lower, inf_upper = _slopes(sp.log_x, sp.log_phi, K)
    if lower > upper + order_tol:
        raise PreconditionError(
            f"estimated lower index {lower:.6g} exceeds upper index {upper:.6g}: inconsistent profile"
        )
    flagged = abs(lower - sup_lower) > check_tol or abs(upper - inf_upper) > check_tol
    details = {
        "source": sp.source,
        "sup_form_lower": sup_lower,
        "inf_form_upper": inf_upper,
        "flagged": bool(flagged),
        "K": K,
    }
    lower = min(lower, upper)
    return IndexPair(lower, upper, details)


def mo_indices(profile, K=20, length=1.0, **kw) -> IndexPair:
    """Matuszewska-Orlicz indices (m, M) of a weight profile."""
    sp = phi_estimate(profile, default_x_grid(K), length=length, **kw)
    return indices_from_profile(sp, K)


def profile_indices(profile, length=1.0) -> IndexPair:
    """Closed-form indices when the profile knows them, else the numeric estimate."""
    if profile.exact_indices is not None:
        m, M = profile.exact_indices
        return IndexPair(m, M, {"source": "closed_form"})
    env = envelope_check(profile)
    if not env.in_W:
        raise PreconditionError("weight profile is outside the class W (no power envelopes)")
    return mo_indices(profile, length=length)


# ---------------------------------------------------------------------------
# indices of powerlikeness


def _portion_means(problem, t, radii):
    """Mean of log w over Gamma(t, r) for each radius."""
    curve = problem.curve
    por = curve.portions(t)
    logw = problem.weight.log_w
    vals = logw(curve.points)
    lengths, integrals = por.measure(radii, vals, logw)
    if np.any(lengths <= 0):
        raise InputError(f"a portion around {t} contains no curve samples")
    means = integrals / lengths
    if not np.all(np.isfinite(means)):
        raise InputError(f"log w is not integrable on a sampled portion around {t}")
    return means


def vt0_estimate(problem, t, K=20, per_octave=4, n_cutoffs=21, floor=None, rtol=1e-3) -> SubmultProfile:
    """V_t^0 w on x = 2^{j/per_octave}, |j| <= K per_octave.

    Radii form the lattice R_max 2^{-k/per_octave} so that xR stays on it.
    """
    curve = problem.curve
    t = complex(t)
    pts = curve.points[:-1]
    dist = np.abs(pts - t)
    d_t = float(dist.max())
    r_max = 0.5 * d_t
    pos = dist[dist > 0]
    if pos.size == 0:
        raise InputError("curve has no samples away from t")
    if floor is None:
        # keep clear of the innermost segments, where a singular log w is patched
        floor = 1e4 * float(pos.min())
    step = LN2 / per_octave
    n_lat = int(np.floor(np.log(r_max / floor) / step)) + 1
    jmax = K * per_octave
    # cutoffs every 2 octaves below r_max, leaving room for x = 2^{-K}
    cut_k = 2 * per_octave * np.arange(n_cutoffs)
    if n_lat - 1 - cut_k[-1] < jmax + 4 * per_octave:
        raise InsufficientScaleError(
            f"curve near {t} is not resolved finely enough for V_t^0 (need radii down to "
            f"{r_max * 2.0 ** -((cut_k[-1] + jmax) / per_octave + 4):.3g})"
        )
    radii = r_max * np.exp(-step * np.arange(n_lat))
    M = _portion_means(problem, t, radii)
    js = np.arange(-jmax, jmax + 1)
    hist = np.empty((n_cutoffs, js.size))
    k_all = np.arange(n_lat)
    for c, k0 in enumerate(cut_k):
        for col, j in enumerate(js):
            # R = radii[k] with k >= k0; xR = radii[k - j]
            ks = k_all[(k_all >= k0) & (k_all - j >= 0) & (k_all - j < n_lat)]
            hist[c, col] = np.max(M[ks - j] - M[ks])
    _, ok = _stabilized(hist, rtol)
    x = 2.0 ** (js / per_octave)
    return SubmultProfile(x, np.exp(hist[-1]), "V0", ok, hist, radii[cut_k])


def powerlikeness_indices(problem, t, K=20, **kw) -> IndexPair:
    """Indices of powerlikeness of the weight at t (the index pair of V_t^0 w)."""
    return indices_from_profile(vt0_estimate(problem, t, K=K, **kw), K)


# ---------------------------------------------------------------------------
# class W envelopes


class EnvelopeReport(NamedTuple):
    in_W: bool
    a: float
    b: float
    c_a: float
    c_b: float


def almost_increasing_constant(log_f):
    """sup over x1 < x2 of f(x1)/f(x2) for samples ordered by increasing x."""
    run = np.maximum.accumulate(log_f)
    with np.errstate(invalid="ignore", over="ignore"):
        return float(np.exp(np.max(run - log_f)))


def envelope_check(profile, candidates=None, exponent_range=(-10.0, 10.0), step=0.01,
                   c_max=1.0 + 1e-9, length=1.0, decades=70.0, per_decade=64) -> EnvelopeReport:
    """Search exponents a, b making x^a rho and x^b / rho almost increasing.

    With ``candidates=(a, b)`` only those exponents are tested and any finite
    almost-increasing constant is accepted. Otherwise the smallest exponents
    on the search grid whose constant is at most ``c_max`` are returned.
    """
    lx = np.linspace(np.log(length) - decades * LN10, np.log(length), int(decades * per_decade) + 1)
    with np.errstate(over="ignore", invalid="ignore"):
        lr = profile.log_rho(lx)
    if not np.all(np.isfinite(lr)):
        return EnvelopeReport(False, np.nan, np.nan, np.inf, np.inf)
    if candidates is not None:
        a, b = candidates
        c_a = almost_increasing_constant(a * lx + lr)
        c_b = almost_increasing_constant(b * lx - lr)
        ok = bool(np.isfinite(c_a) and np.isfinite(c_b))
        return EnvelopeReport(ok, float(a), float(b), c_a, c_b)
    grid = np.round(np.arange(exponent_range[0], exponent_range[1] + step / 2, step), 10)

    def first(sign):
        for e in grid:
            c = almost_increasing_constant(e * lx + sign * lr)
            if c <= c_max:
                return float(e), c
        return np.nan, np.inf

    a, c_a = first(+1.0)
    b, c_b = first(-1.0)
    return EnvelopeReport(bool(np.isfinite(c_a) and np.isfinite(c_b)), a, b, c_a, c_b)
