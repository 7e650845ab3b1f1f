"""Problem data: curve, variable exponent, radial weight, PC coefficient.

Also hosts the checks of the standing hypotheses (log-Hoelder exponent,
Carleson condition, logarithmic whirl at a point) and the per-point data
1/p(t), delta(t), mu_t, nu_t consumed by the decision modules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .curves import CurveSpec
from .errors import InputError, InsufficientScaleError, PreconditionError, ZeroLimitError
from .profiles import WeightProfile


# ---------------------------------------------------------------------------
# exponent


@dataclass(frozen=True)
class ExponentSpec:
    """Variable exponent: a constant, or one value per curve sample."""

    values: object
    declared_A: float | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim > 1:
            raise InputError("exponent values must be a number or a per-sample list")
        if not np.all(np.isfinite(v)) or np.any(v <= 1.0):
            raise InputError("exponent must satisfy 1 < p < infinity")
        object.__setattr__(self, "values", float(v) if v.ndim == 0 else v)
        if self.declared_A is not None and not self.declared_A > 0:
            raise InputError("declared A must be positive")

    @classmethod
    def constant(cls, p, declared_A=None):
        return cls(float(p), declared_A)

    @classmethod
    def from_function(cls, curve: CurveSpec, fn, declared_A=None):
        return cls(np.asarray(fn(curve.points), dtype=float), declared_A)

    @property
    def is_constant(self) -> bool:
        return np.ndim(self.values) == 0

    def at_samples(self, curve: CurveSpec) -> np.ndarray:
        if self.is_constant:
            return np.full(curve.n_samples, self.values)
        if self.values.size != curve.n_samples:
            raise InputError(
                f"exponent has {self.values.size} values but the curve has {curve.n_samples} samples"
            )
        return self.values

    def at(self, curve: CurveSpec, t) -> float:
        if self.is_constant:
            return self.values
        return float(curve.interpolate(self.at_samples(curve), t))

    def bounds(self, curve):
        v = self.at_samples(curve)
        return float(v.min()), float(v.max())


class LogHolderReport(NamedTuple):
    holds: bool
    min_A_estimate: float
    n_pairs: int


def conjugate_exponent(p_value):
    """q = p / (p - 1)."""
    p = np.asarray(p_value, dtype=float)
    if np.any(p <= 1.0) or not np.all(np.isfinite(p)):
        raise InputError("the conjugate exponent needs 1 < p < infinity")
    q = p / (p - 1.0)
    return float(q) if q.ndim == 0 else q


def _subsample(n, limit):
    if n <= limit:
        return np.arange(n)
    return np.unique(np.linspace(0, n - 1, limit).round().astype(int))


def validate_exponent(exponent: ExponentSpec, curve: CurveSpec, max_points=1000) -> LogHolderReport:
    """Smallest A with |p(tau) - p(t)| <= -A / log|tau - t| over sampled pairs.

    Pairs are restricted to 0 < |tau - t| <= 1/2. The estimate is declared
    divergent (inf) when the largest per-decade term sits in the finest
    distance decade among pairs where p differs, the signature of a jump.
    """
    p = exponent.at_samples(curve)[:-1]
    pts = curve.points[:-1]
    if pts.size == 0:
        raise InputError("no curve samples")
    if np.any(p <= 1.0):
        raise InputError("exponent must satisfy 1 < p < infinity")
    if exponent.is_constant:
        return LogHolderReport(True, 0.0, 0)
    idx = _subsample(pts.size, max_points)
    z, pv = pts[idx], p[idx]
    dist = np.abs(z[:, None] - z[None, :])
    sel = (dist > 0) & (dist <= 0.5)
    if not sel.any():
        raise InputError("no sample pairs with 0 < |tau - t| <= 1/2")
    d = dist[sel]
    term = np.abs(pv[:, None] - pv[None, :])[sel] * -np.log(d)
    est = float(term.max())
    live = term > 0
    decade = np.floor(np.log10(d[live])).astype(int)
    tl = term[live]
    if est > 0 and decade.max() > decade.min():
        finest = decade.min()
        coarser = tl[decade > finest].max()
        if decade[np.argmax(tl)] == finest and tl[decade == finest].max() > coarser * (1 + 1e-9):
            est = float("inf")
    holds = bool(np.isfinite(est) and (exponent.declared_A is None or est <= exponent.declared_A))
    return LogHolderReport(holds, est, int(sel.sum()))


# ---------------------------------------------------------------------------
# weight


class WeightNode(NamedTuple):
    t: complex
    profile: WeightProfile


@dataclass(frozen=True)
class RadialWeightSpec:
    """w(tau) = prod_k rho_k(|tau - t_k|)."""

    nodes: tuple = ()

    def __post_init__(self):
        nodes = tuple(WeightNode(complex(t), prof) for t, prof in self.nodes)
        ts = [n.t for n in nodes]
        for i in range(len(ts)):
            for j in range(i):
                if ts[i] == ts[j]:
                    raise InputError(f"weight node {ts[i]} listed twice")
        object.__setattr__(self, "nodes", nodes)

    def log_w(self, points):
        pts = np.asarray(points, dtype=complex)
        out = np.zeros(pts.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            for t, prof in self.nodes:
                out = out + prof.log_rho(np.log(np.abs(pts - t)))
        return out

    def __call__(self, points):
        return np.exp(self.log_w(points))

    def node_at(self, t, tol=0.0):
        for node in self.nodes:
            if abs(node.t - t) <= tol:
                return node
        return None


# ---------------------------------------------------------------------------
# coefficient


class Jump(NamedTuple):
    t: complex
    index: int
    left: np.ndarray
    right: np.ndarray


class PcSymbol:
    """Piecewise continuous N x N coefficient sampled along a curve.

    ``background`` holds one matrix per curve sample (the closing sample
    included). At a jump sample the one-sided limits from the jump list are
    used instead of the background value; a jump at the start point is
    approached from the left through the closing sample.
    """

    def __init__(self, curve: CurveSpec, background, jumps=()):
        bg = np.asarray(background, dtype=complex)
        if bg.ndim == 1:
            bg = bg[:, None, None]
        if bg.ndim != 3 or bg.shape[1] != bg.shape[2]:
            raise InputError("symbol background must have shape (n_samples, N, N)")
        if bg.shape[0] != curve.n_samples:
            raise InputError(
                f"symbol background has {bg.shape[0]} samples but the curve has {curve.n_samples}"
            )
        if not np.all(np.isfinite(bg)):
            raise InputError("symbol background must be finite")
        self.curve = curve
        self.background = bg
        self.N = bg.shape[1]
        js = []
        for j in jumps:
            t, left, right = (j.t, j.left, j.right) if isinstance(j, Jump) else j
            left = np.asarray(left, dtype=complex).reshape(self.N, self.N)
            right = np.asarray(right, dtype=complex).reshape(self.N, self.N)
            idx = curve.sample_index(t)
            js.append(Jump(complex(curve.points[idx]), idx, left, right))
        js.sort(key=lambda j: j.index)
        if len({j.index for j in js}) != len(js):
            raise InputError("two jumps at the same curve sample")
        self.jumps = tuple(js)
        self._by_index = {j.index: j for j in js}

    # construction helpers
    @classmethod
    def constant(cls, curve, value):
        value = np.asarray(value, dtype=complex)
        shape = (curve.n_samples,) + value.shape
        return cls(curve, np.broadcast_to(value, shape).copy())

    @classmethod
    def from_function(cls, curve, fn, jumps=()):
        return cls(curve, fn(curve.points), jumps)

    @classmethod
    def piecewise_constant(cls, curve, breaks, values):
        """Constant values[j] on the arc from breaks[j] to the next break (cyclic)."""
        if len(breaks) != len(values) or not breaks:
            raise InputError("piecewise constant symbol needs one value per break point")
        idx = [curve.sample_index(t) for t in breaks]
        order = np.argsort(idx)
        idx = [idx[k] for k in order]
        vals = [np.atleast_2d(np.asarray(values[k], dtype=complex)) for k in order]
        n = curve.n_samples
        N = vals[0].shape[0]
        bg = np.empty((n, N, N), dtype=complex)
        bg[:] = vals[-1]
        for k, i in enumerate(idx):
            bg[i:] = vals[k]
        if idx[0] == 0:
            bg[-1] = vals[-1]
        jumps = []
        for k, i in enumerate(idx):
            left = vals[k - 1]
            right = vals[k]
            if not np.array_equal(left, right):
                jumps.append((curve.points[i], left, right))
        return cls(curve, bg, jumps)

    # evaluation
    @property
    def scalar(self) -> bool:
        return self.N == 1

    def jump_at(self, t, tol=None):
        tol = self.curve.tolerance if tol is None else tol
        for j in self.jumps:
            if abs(j.t - t) <= tol:
                return j
        return None

    def _segment_ends(self, i):
        """Values at the two ends of segment i (sample i -> i+1)."""
        n = self.curve.n_samples
        start = self._by_index.get(i)
        v0 = start.right if start is not None else self.background[i]
        k = i + 1 if i + 1 < n - 1 else 0
        end = self._by_index.get(k)
        v1 = end.left if end is not None else self.background[i + 1]
        return v0, v1

    def limits(self, t):
        """(a(t-0), a(t+0)); equal at continuity points."""
        j = self.jump_at(t)
        if j is not None:
            return j.left, j.right
        i, f, dist = self.curve.locate(t)
        if dist > self.curve.tolerance:
            raise InputError(f"point {t} is not on the curve")
        v0, v1 = self._segment_ends(i)
        v = (1 - f) * v0 + f * v1
        return v, v

    def at_arclength(self, s_query, at_jump="mid"):
        """Values at arclength positions (periodic); jump positions get the average."""
        s = self.curve.s
        L = s[-1] - s[0]
        q = s[0] + np.mod(np.asarray(s_query, dtype=float) - s[0], L)
        i = np.clip(np.searchsorted(s, q, side="right") - 1, 0, s.size - 2)
        ds = s[i + 1] - s[i]
        f = np.where(ds > 0, (q - s[i]) / np.where(ds > 0, ds, 1.0), 0.0)
        v0 = self.background[i].copy()
        v1 = self.background[i + 1].copy()
        for j in self.jumps:
            v0[i == j.index] = j.right
            end = (i + 1 == j.index) | ((j.index == 0) & (i + 1 == s.size - 1))
            v1[end] = j.left
        out = (1 - f)[:, None, None] * v0 + f[:, None, None] * v1
        if at_jump == "mid":
            for j in self.jumps:
                hit = q == s[j.index]
                out[hit] = 0.5 * (j.left + j.right)
        return out

    def validate(self, rtol=1e-2, n_side=8):
        """Check that the background approaches the declared one-sided limits."""
        n = self.curve.n_samples - 1
        if n < 2 * n_side + 2:
            return
        sv = self.curve.s
        L = sv[-1] - sv[0]
        for j in self.jumps:
            before = [(j.index - k) % n for k in range(1, n_side + 1)]
            after = [(j.index + k) % n for k in range(1, n_side + 1)]
            for side, idx, target in (("left", before, j.left), ("right", after, j.right)):
                pos = np.array([(sv[k] - sv[j.index] + L / 2) % L - L / 2 for k in idx])
                vals = self.background[idx].reshape(len(idx), -1)
                deg = 2 if len(idx) > 4 else 1
                coef = np.polynomial.polynomial.polyfit(pos, vals, deg)
                est = coef[0].reshape(self.N, self.N)
                err = np.max(np.abs(est - target))
                if err > rtol * max(1.0, float(np.max(np.abs(target)))):
                    raise InputError(
                        f"background does not approach the declared {side} limit at jump t={j.t} "
                        f"(extrapolation error {err:.3g})"
                    )

    def map(self, fn):
        """Apply an entrywise/matrix map to background and limits."""
        jumps = [(j.t, fn(j.left), fn(j.right)) for j in self.jumps]
        return PcSymbol(self.curve, fn(self.background), jumps)

    def shift(self, lam):
        """a - lam * I."""
        eye = np.eye(self.N)
        return self.map(lambda m: m - lam * eye)

    def scale(self, c):
        return self.map(lambda m: c * m)

    def is_continuous_at(self, t) -> bool:
        return self.jump_at(t) is None


# ---------------------------------------------------------------------------
# problem instance


class LocalData(NamedTuple):
    t: complex
    inv_p: float
    delta: float
    delta_source: str
    mu: float
    nu: float


@dataclass
class ProblemInstance:
    curve: CurveSpec
    exponent: ExponentSpec
    weight: RadialWeightSpec = field(default_factory=RadialWeightSpec)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.exponent.at_samples(self.curve)
        for node in self.weight.nodes:
            if self.curve.distance_to(node.t) > self.curve.tolerance:
                raise InputError(f"weight node {node.t} is not on the curve")

    def inv_p(self, t) -> float:
        return 1.0 / self.exponent.at(self.curve, t)

    def delta(self, t):
        key = ("delta", complex(t))
        if key not in self._cache:
            d = self.curve.declared_delta(t)
            if d is not None:
                self._cache[key] = (d, "declared")
            else:
                try:
                    self._cache[key] = (spirality_delta(self.curve, t).delta, "estimated")
                except InsufficientScaleError:
                    self._cache[key] = (0.0, "polyline")
        return self._cache[key]

    def indices_at(self, t):
        key = ("mu_nu", complex(t))
        if key not in self._cache:
            self._cache[key] = point_indices(self, t)
        return self._cache[key]

    def local(self, t) -> LocalData:
        t = complex(t)
        d, src = self.delta(t)
        mu, nu = self.indices_at(t)
        return LocalData(t, self.inv_p(t), d, src, mu, nu)

    @property
    def special_points(self):
        return [n.t for n in self.weight.nodes]


def point_indices(problem: ProblemInstance, t):
    """(mu_t, nu_t): index pair of the node profile at a weight node, else (0, 0)."""
    node = problem.weight.node_at(t, problem.curve.tolerance)
    if node is None:
        return 0.0, 0.0
    from .indices import profile_indices

    pair = profile_indices(node.profile, problem.curve.total_length)
    return pair.lower, pair.upper


# ---------------------------------------------------------------------------
# curve conditions


def carleson_constant(curve: CurveSpec, t_grid=None, R_grid=None, n_t=1000, n_R=1000) -> float:
    """max over the grids of |Gamma(t, R)| / R."""
    if t_grid is None:
        t_grid = curve.points[:-1][_subsample(curve.n_samples - 1, n_t)]
    if R_grid is None:
        R_grid = np.geomspace(2 * curve.resolution, curve.diameter, n_R)
    R_grid = np.asarray(R_grid, dtype=float)
    if R_grid.min() < curve.resolution:
        raise InsufficientScaleError(
            f"radius {R_grid.min():.3g} is below the sample resolution {curve.resolution:.3g}"
        )
    best = 0.0
    for t in np.atleast_1d(t_grid):
        lengths = curve.portions(t).measure(R_grid)
        best = max(best, float(np.max(lengths / R_grid)))
    return best


class SpiralityFit(NamedTuple):
    delta: float
    residual: float
    n_samples: int
    decades: float


def spirality_delta(curve: CurveSpec, t, fit_window=None, min_samples=32, min_decades=3.0) -> SpiralityFit:
    """Slope of a continuous branch of arg(tau - t) against -log|tau - t|.

    The branch is unwound along the curve starting next to t, so both arms
    leaving t share one continuous argument; each arm gets its own
    intercept in the least-squares fit. The default window keeps points
    with |tau - t| below a tenth of the curve diameter.
    """
    t = complex(t)
    i, f, dist = curve.locate(t)
    if dist > curve.tolerance:
        raise PreconditionError(f"point {t} is not on the curve")
    pts = curve.points[:-1]
    n = pts.size
    nearest = int(np.argmin(np.abs(pts - t)))
    if abs(pts[nearest] - t) <= curve.tolerance:
        t = complex(pts[nearest])
        order = [(nearest + j) % n for j in range(1, n)]
    else:
        order = [(i + 1 + j) % n for j in range(n)]
    z = pts[order] - t
    ang = np.angle(z)
    steps = np.diff(ang)
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    if np.any(np.abs(steps) > np.pi / 2):
        raise PreconditionError("ambiguous branch unwinding: the curve is under-sampled near t")
    arg = np.concatenate([[ang[0]], ang[0] + np.cumsum(steps)])
    r = np.abs(z)
    lo, hi = fit_window if fit_window is not None else (0.0, 0.1 * curve.diameter)
    sel = (r > lo) & (r <= hi) & (r > 0)
    # arm membership: the first half of the loop leaves t forwards
    arm = np.zeros(r.size, dtype=bool)
    arm[np.argmax(r) :] = True
    if sel.sum() < min_samples:
        raise InsufficientScaleError(f"only {int(sel.sum())} samples in the fit window near {t}")
    decades = float(np.log10(r[sel].max() / r[sel].min()))
    if decades < min_decades:
        raise InsufficientScaleError(f"fit window near {t} spans only {decades:.2f} decades")
    x = -np.log(r[sel])
    A = np.column_stack([x, ~arm[sel], arm[sel]]).astype(float)
    A = A[:, np.any(A != 0, axis=0)]
    coef, *_ = np.linalg.lstsq(A, arg[sel], rcond=None)
    res = arg[sel] - A @ coef
    return SpiralityFit(float(coef[0]), float(np.sqrt(np.mean(res ** 2))), int(sel.sum()), decades)


def jump_exponent(a: PcSymbol, t) -> complex:
    """gamma_t with Re in [0, 1) (defined mod 1) and Im = -log|r| / 2 pi."""
    if not a.scalar:
        raise PreconditionError("the jump exponent is defined for scalar symbols")
    left, right = a.limits(t)
    left, right = complex(left[0, 0]), complex(right[0, 0])
    if left == 0 or right == 0:
        raise ZeroLimitError(t)
    r = left / right
    re = (np.angle(r) / (2 * np.pi)) % 1.0
    if re >= 1.0:  # tiny negative angles round up to 1
        re = 0.0
    return complex(re, -np.log(abs(r)) / (2 * np.pi))
