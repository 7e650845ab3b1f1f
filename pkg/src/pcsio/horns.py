"""Spiralic horns S(z1, z2; delta; a, b) and their boundary double spirals.

A point u belongs to the horn when the level

    v(u) = (arg w - delta * log|w|) / (2 pi),   w = (u - z1) / (u - z2),

lies in [a, b] modulo integers; the endpoints z1 and z2 always belong.
The level set v = c is the Moebius image of the logarithmic spiral
w(s) = exp(s + i (delta s + 2 pi c)).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InputError, PreconditionError

SHAPES = ("point", "segment", "circular_arc", "horn", "double_spiral", "spiralic_horn")


class BoundaryCurve(NamedTuple):
    points: np.ndarray
    s: np.ndarray
    skipped: np.ndarray  # s values dropped because the curve passes near infinity


class RegionSample(NamedTuple):
    points: np.ndarray
    levels: np.ndarray  # level c of each point; nan for the endpoints


@dataclass(frozen=True)
class SpiralicHorn:
    z1: complex
    z2: complex
    delta: float
    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "z1", complex(self.z1))
        object.__setattr__(self, "z2", complex(self.z2))
        if not (0.0 < self.a <= self.b < 1.0):
            raise InputError(f"horn levels must satisfy 0 < a <= b < 1, got a={self.a}, b={self.b}")

    @property
    def degenerate(self) -> bool:
        return self.z1 == self.z2

    def level(self, u, branch=0):
        """The real level v(u); ``branch`` adds 2 pi k to the argument."""
        u = np.asarray(u, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = (u - self.z1) / (u - self.z2)
            return (np.angle(w) + 2 * np.pi * branch - self.delta * np.log(np.abs(w))) / (2 * np.pi)

    def contains(self, u, branch=0):
        u = np.asarray(u, dtype=complex)
        if self.degenerate:
            return u == self.z1
        v = self.level(u, branch)
        with np.errstate(invalid="ignore"):
            inside = np.mod(v - self.a, 1.0) <= self.b - self.a
        return inside | (u == self.z1) | (u == self.z2)

    def to_dict(self):
        return {
            "z1": [self.z1.real, self.z1.imag],
            "z2": [self.z2.real, self.z2.imag],
            "delta": self.delta,
            "a": self.a,
            "b": self.b,
            "shape": classify(self),
        }


def membership(h: SpiralicHorn, u, branch=0):
    """Boolean (array) membership of ``u`` in the horn."""
    out = h.contains(u, branch)
    return bool(out) if np.ndim(out) == 0 else out


def boundary_curve(h: SpiralicHorn, c, s_range=(-8.0, 8.0), n_points=2048, pole_tol=1e-9) -> BoundaryCurve:
    """Level curve v = c, parametrized through the w-plane spiral."""
    if h.degenerate:
        raise PreconditionError("a horn with z1 == z2 is a single point and has no boundary curve")
    return _level_curve(h, c, np.linspace(s_range[0], s_range[1], n_points), pole_tol)


def _level_curve(h, c, s, pole_tol=1e-9):
    w = np.exp(s) * np.exp(1j * (h.delta * s + 2 * np.pi * c))
    near_pole = np.abs(1 - w) < pole_tol
    w_ok = w[~near_pole]
    u = (h.z1 - h.z2 * w_ok) / (1 - w_ok)
    return BoundaryCurve(u, s[~near_pole], s[near_pole])


def sample_region(h: SpiralicHorn, c_grid_size=64, s_grid=None, clip=None) -> RegionSample:
    """Union of level curves over a uniform c-grid spanning [a, b].

    With ``clip`` set, points farther than clip * |z1 - z2| from the
    midpoint are dropped (used for plotting). z1 and z2 are always appended.
    """
    ends = np.array([h.z1, h.z2])
    if h.degenerate:
        return RegionSample(np.array([h.z1]), np.array([np.nan]))
    s_grid = np.linspace(-8.0, 8.0, 2048) if s_grid is None else np.asarray(s_grid, dtype=float)
    levels = np.array([h.a]) if h.a == h.b else np.linspace(h.a, h.b, c_grid_size)
    pts, cs = [], []
    for c in levels:
        u = _level_curve(h, c, s_grid).points
        pts.append(u)
        cs.append(np.full(u.size, c))
    pts = np.concatenate(pts)
    cs = np.concatenate(cs)
    if clip is not None:
        keep = np.abs(pts - 0.5 * (h.z1 + h.z2)) <= clip * abs(h.z1 - h.z2)
        pts, cs = pts[keep], cs[keep]
    return RegionSample(np.concatenate([pts, ends]), np.concatenate([cs, [np.nan, np.nan]]))


def classify(h: SpiralicHorn) -> str:
    if h.degenerate:
        return "point"
    if h.a == h.b:
        if h.delta != 0.0:
            return "double_spiral"
        return "segment" if h.a == 0.5 else "circular_arc"
    return "horn" if h.delta == 0.0 else "spiralic_horn"
