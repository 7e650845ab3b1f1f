"""Closed polyline curves and the portions Gamma(t, R) = {tau : |tau - t| < R}.

Curves are stored as ordered complex samples with the first point repeated
at the end. Lengths are always accumulated from chord lengths between
consecutive points, never from the stored arclength column, so that graded
samples clustered at a point keep full relative precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class CurveSpec:
    """Sampled closed Jordan curve.

    ``s`` is the arclength column as supplied by the caller. Graded samples
    may repeat an arclength value once it is below floating resolution, so
    only monotonicity is enforced on it.
    """

    s: np.ndarray
    points: np.ndarray
    whirl_points: tuple = ()
    _seg: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        pts = np.asarray(self.points, dtype=complex)
        if pts.ndim != 1 or pts.size < 4:
            raise InputError("a curve needs at least three distinct samples plus the closing point")
        if s.shape != pts.shape:
            raise InputError("arclength and point arrays differ in length")
        if np.any(np.diff(s) < 0) or not s[-1] > s[0]:
            raise InputError("arclength samples must be non-decreasing")
        if not np.all(np.isfinite(pts)):
            raise InputError("curve samples must be finite")
        scale = np.max(np.abs(pts - pts[0]))
        if abs(pts[-1] - pts[0]) > 1e-12 * max(scale, 1.0):
            raise InputError("curve is not closed: first and last samples differ")
        pts = pts.copy()
        pts[-1] = pts[0]
        seg = np.abs(np.diff(pts))
        if np.any(seg == 0):
            raise InputError("curve has repeated consecutive samples")
        whirl = tuple((complex(t), float(d)) for t, d in self.whirl_points)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "whirl_points", whirl)
        object.__setattr__(self, "_seg", seg)
        for t, _ in whirl:
            if self.distance_to(t) > self.tolerance:
                raise InputError(f"declared whirl point {t} is not on the curve")

    @property
    def n_samples(self) -> int:
        return self.points.size

    @property
    def segment_lengths(self) -> np.ndarray:
        return self._seg

    @property
    def total_length(self) -> float:
        return float(self._seg.sum())

    @property
    def resolution(self) -> float:
        """Largest chord between consecutive samples."""
        return float(self._seg.max())

    @property
    def diameter(self) -> float:
        pts = self.points[:-1]
        if pts.size > 4000:
            pts = pts[:: pts.size // 4000 + 1]
        return float(np.max(np.abs(pts[:, None] - pts[None, :])))

    @property
    def tolerance(self) -> float:
        return 1e-9 * max(1.0, float(np.max(np.abs(self.points))))

    def locate(self, t):
        """Nearest point on the polyline: (segment index, fraction, distance)."""
        a = self.points[:-1]
        d = np.diff(self.points)
        f = np.clip(np.real((t - a) * np.conj(d)) / np.abs(d) ** 2, 0.0, 1.0)
        dist = np.abs(a + f * d - t)
        i = int(np.argmin(dist))
        return i, float(f[i]), float(dist[i])

    def distance_to(self, t) -> float:
        return self.locate(t)[2]

    def sample_index(self, t, tol=None) -> int:
        """Index of the sample equal to ``t``; raises when ``t`` is not a sample."""
        tol = self.tolerance if tol is None else tol
        dist = np.abs(self.points[:-1] - t)
        i = int(np.argmin(dist))
        if dist[i] > tol:
            raise InputError(f"point {t} is not a sample of the curve (distance {dist[i]:.3g})")
        return i

    def arclength_at(self, t) -> float:
        i, f, _ = self.locate(t)
        return float(self.s[i] + f * (self.s[i + 1] - self.s[i]))

    def interpolate(self, values, t):
        """Linear interpolation of per-sample ``values`` at the curve point ``t``."""
        i, f, _ = self.locate(t)
        return (1.0 - f) * values[i] + f * values[i + 1]

    def declared_delta(self, t):
        for tw, d in self.whirl_points:
            if abs(tw - t) <= self.tolerance:
                return d
        return None

    def portions(self, t) -> "Portions":
        return Portions(self.points, t)


class Portions:
    """Exact clipping of the polyline against discs centred at ``t``.

    Every quantity is computed from the segment geometry relative to ``t``,
    so radii far below the absolute coordinate scale stay accurate when
    ``t`` itself is small (e.g. a node placed at the origin).
    """

    def __init__(self, points, t):
        self.t = complex(t)
        pts = np.asarray(points, dtype=complex)
        self.a = pts[:-1] - self.t
        self.d = np.diff(pts)
        self.length = np.abs(self.d)
        self.da = np.abs(self.a)
        self.db = np.abs(pts[1:] - self.t)
        f = np.clip(-np.real(self.a * np.conj(self.d)) / self.length ** 2, 0.0, 1.0)
        self.dmin = np.abs(self.a + f * self.d)
        self.dmax = np.maximum(self.da, self.db)
        self._order = np.argsort(self.dmax, kind="stable")
        self._dmax_sorted = self.dmax[self._order]

    def _clip(self, idx, R):
        """Parameter interval [f0, f1] of segment ``idx`` inside |tau - t| < R."""
        a = self.a[idx] / R
        d = self.d[idx] / R
        A = np.abs(d) ** 2
        B = np.real(a * np.conj(d))
        C = np.abs(a) ** 2 - 1.0
        disc = np.maximum(B * B - A * C, 0.0)
        root = np.sqrt(disc)
        f0 = np.clip((-B - root) / A, 0.0, 1.0)
        f1 = np.clip((-B + root) / A, 0.0, 1.0)
        f1 = np.maximum(f1, f0)
        return f0, f1

    def _pairs(self, radii_sorted):
        """(segment, radius-index) pairs for segments cut by the circle |tau-t|=R."""
        lo = np.searchsorted(radii_sorted, self.dmin, side="right")
        hi = np.searchsorted(radii_sorted, self.dmax, side="right")
        counts = np.maximum(hi - lo, 0)
        seg = np.repeat(np.arange(self.dmin.size), counts)
        start = np.repeat(lo - np.cumsum(counts) + counts, counts)
        ridx = np.arange(seg.size) + start
        return seg, ridx

    def measure(self, radii, values=None, fn=None):
        """Length of Gamma(t, R), and the trapezoid integral of a function over it.

        ``values`` are the function values at the curve samples (length
        n_samples) and ``fn`` evaluates the same function at arbitrary
        points; both are needed to integrate. Non-finite endpoint values
        (a singular weight evaluated exactly at its node) are replaced by
        the value at the other end of the segment.
        """
        radii = np.asarray(radii, dtype=float)
        order = np.argsort(radii)
        rs = radii[order]
        nfull = np.searchsorted(self._dmax_sorted, rs, side="left")
        cum_len = np.concatenate([[0.0], np.cumsum(self.length[self._order])])
        lengths = cum_len[nfull].copy()
        integrals = None
        if values is not None:
            va = np.asarray(values[:-1])
            vb = np.asarray(values[1:])
            va, vb = _patch_nonfinite(va, vb)
            trap = 0.5 * (va + vb) * self.length
            cum_int = np.concatenate([[0.0], np.cumsum(trap[self._order])])
            integrals = cum_int[nfull].astype(trap.dtype)
        seg, ridx = self._pairs(rs)
        if seg.size:
            R = rs[ridx]
            f0, f1 = self._clip(seg, R)
            piece = (f1 - f0) * self.length[seg]
            np.add.at(lengths, ridx, piece)
            if values is not None:
                p0 = self.t + self.a[seg] + f0 * self.d[seg]
                p1 = self.t + self.a[seg] + f1 * self.d[seg]
                v0 = np.where(f0 == 0.0, values[seg], fn(p0))
                v1 = np.where(f1 == 1.0, values[seg + 1], fn(p1))
                v0, v1 = _patch_nonfinite(v0, v1)
                np.add.at(integrals, ridx, 0.5 * (v0 + v1) * piece)
        out_len = np.empty_like(lengths)
        out_len[order] = lengths
        if integrals is None:
            return out_len
        out_int = np.empty_like(integrals)
        out_int[order] = integrals
        return out_len, out_int

    def pieces(self, R, r_inner=0.0) -> "Pieces":
        """Polyline pieces with r_inner <= |tau - t| < R, as midpoints and lengths."""
        idx = np.nonzero(self.dmin < R)[0]
        f0, f1 = self._clip(idx, R)
        keep = f1 > f0
        idx, f0, f1 = idx[keep], f0[keep], f1[keep]
        if r_inner > 0.0:
            g0, g1 = self._clip(idx, r_inner)
            inner = g1 > g0
            lo0, hi0 = f0, np.where(inner, np.minimum(f1, g0), f1)
            lo1, hi1 = np.where(inner, np.maximum(f0, g1), f1), f1
            idx = np.concatenate([idx, idx])
            f0 = np.concatenate([lo0, lo1])
            f1 = np.concatenate([hi0, hi1])
            keep = f1 > f0
            idx, f0, f1 = idx[keep], f0[keep], f1[keep]
        fm = 0.5 * (f0 + f1)
        mid = self.t + self.a[idx] + fm * self.d[idx]
        return Pieces(mid, (f1 - f0) * self.length[idx], idx, fm)


class Pieces(NamedTuple):
    points: np.ndarray
    lengths: np.ndarray
    segment: np.ndarray
    fraction: np.ndarray

    def interpolate(self, sample_values):
        v = np.asarray(sample_values)
        return (1 - self.fraction) * v[self.segment] + self.fraction * v[self.segment + 1]


def _patch_nonfinite(v0, v1):
    v0 = np.asarray(v0).copy()
    v1 = np.asarray(v1).copy()
    bad0 = ~np.isfinite(v0)
    bad1 = ~np.isfinite(v1)
    v0[bad0] = v1[bad0]
    v1[bad1] = v0[bad1]
    return v0, v1


# ---------------------------------------------------------------------------
# builders


def from_points(points, whirl_points=()) -> CurveSpec:
    """Close an ordered list of points and attach chord-length arclength."""
    pts = np.asarray(points, dtype=complex)
    if pts[0] != pts[-1]:
        pts = np.append(pts, pts[0])
    s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(pts)))])
    return CurveSpec(s, pts, tuple(whirl_points))


def _graded(h, depth, per_decade):
    """Offsets h*10^-k geometric from ``h`` down to ``depth`` (ascending)."""
    n = max(int(np.ceil(np.log10(h / depth) * per_decade)), 1)
    return np.geomspace(depth, h, n + 1)[:-1]


def unit_circle(n=1024, refine_at=(), depth=1e-9, per_decade=32, whirl_points=()) -> CurveSpec:
    """Counter-clockwise unit circle, optionally graded towards given points.

    Offsets are generated relative to the nearest refinement point so that
    samples close to it are computed without cancellation.
    """
    base = 2 * np.pi * np.arange(n) / n
    centres = [float(np.angle(t)) % (2 * np.pi) for t in refine_at]
    angles = [base]
    for c in centres:
        off = _graded(2 * np.pi / n, depth, per_decade)
        angles += [c + off, c - off, np.array([c])]
    theta = np.unique(np.mod(np.concatenate(angles), 2 * np.pi))
    theta = theta[np.concatenate([[True], np.diff(theta) > 0])]
    pts = np.exp(1j * theta)
    for c in centres:
        # recompute the clustered samples relative to their centre
        rel = (theta - c + np.pi) % (2 * np.pi) - np.pi
        near = np.abs(rel) < 4 * np.pi / n
        pts[near] = np.exp(1j * c) * np.exp(1j * rel[near])
        exact = np.abs(rel) == 0
        pts[exact] = np.exp(1j * c)
    s = np.append(theta, 2 * np.pi)
    pts = np.append(pts, pts[0])
    return CurveSpec(s, pts, tuple(whirl_points))


def node_circle(radius=1.0, n=1024, depth=1e-70, per_decade=32) -> CurveSpec:
    """Circle of the given radius passing through the origin, graded there.

    tau(phi) = 2 r sin(phi/2) e^{i phi/2}; the origin is the first sample.
    Samples on both sides of the origin are computed from their offset, not
    by subtracting from 2*pi.
    """
    h = 2 * np.pi / n
    fine = _graded(h, depth, per_decade)
    coarse = h * np.arange(1, n)
    mid = coarse[coarse <= np.pi]
    phi = np.concatenate([fine, mid])
    near = 2 * radius * np.sin(phi / 2) * np.exp(1j * phi / 2)
    psi = np.concatenate([fine, coarse[coarse < np.pi]])[::-1]
    far = -2 * radius * np.sin(psi / 2) * np.exp(-1j * psi / 2)
    pts = np.concatenate([[0.0], near, far, [0.0]])
    arc = np.concatenate([[0.0], radius * phi, radius * (2 * np.pi - psi), [2 * np.pi * radius]])
    return CurveSpec(arc, pts)


def whirl_curve(delta=1.0, s_min=1e-6, per_decade=64, n_arc=20000) -> CurveSpec:
    """Jordan curve through 0 made of a logarithmic double spiral closed by an arc.

    Near 0 both arms are tau = +-s e^{-i delta ln s}, so arg(tau) = -delta log|tau|
    + const; the arms are joined by the arc |tau| = 1 from -1 back to 1.
    The whirl point 0 is declared with the constructed delta.
    """
    s = np.geomspace(1.0, s_min, int(round(np.log10(1.0 / s_min) * per_decade)) + 1)
    arm = s * np.exp(-1j * delta * np.log(s))
    arc = np.exp(1j * np.linspace(np.pi, 2 * np.pi, n_arc + 1)[1:-1])
    pts = np.concatenate([arm, [0.0], -arm[::-1], arc, [arm[0]]])
    c = from_points(pts)
    return CurveSpec(c.s, c.points, ((0j, float(delta)),))
