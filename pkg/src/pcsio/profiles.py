"""Radial weight profiles rho: (0, L] -> (0, inf).

Every profile is evaluated through ``log_rho(log_x)`` so that arguments far
below the floating range of x itself (x = 1e-300 and smaller) remain usable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import InputError


class WeightProfile:
    """Base class; subclasses implement ``log_rho``."""

    #: indices known in closed form, or None when they must be estimated
    exact_indices: tuple[float, float] | None = None

    def log_rho(self, log_x):
        raise NotImplementedError

    def __call__(self, x):
        with np.errstate(divide="ignore"):
            return np.exp(self.log_rho(np.log(np.asarray(x, dtype=float))))

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLaw(WeightProfile):
    """rho(x) = x**gamma."""

    gamma: float

    @property
    def exact_indices(self):
        return (self.gamma, self.gamma)

    def log_rho(self, log_x):
        log_x = np.asarray(log_x, dtype=float)
        if self.gamma == 0.0:
            return np.zeros_like(log_x)
        return self.gamma * log_x

    def to_dict(self):
        return {"type": "power", "gamma": self.gamma}


class PiecewiseLogLinear(WeightProfile):
    """log rho piecewise linear in log x between knots, linear beyond them.

    The slopes used outside the knot range are least-squares slopes over the
    outermost decade of knots on each side.
    """

    def __init__(self, log_x, log_rho):
        lx = np.asarray(log_x, dtype=float)
        lr = np.asarray(log_rho, dtype=float)
        if lx.ndim != 1 or lx.size < 2 or lx.shape != lr.shape:
            raise InputError("a sampled profile needs at least two (x, rho) pairs")
        if not np.all(np.isfinite(lx)) or not np.all(np.isfinite(lr)):
            raise InputError("sampled profile values must be positive and finite")
        if np.any(np.diff(lx) <= 0):
            raise InputError("sampled profile abscissae must be strictly increasing")
        self.knots = lx
        self.values = lr
        self.slope_lo = self._edge_slope(lx, lr, lx[0] + np.log(10.0), low=True)
        self.slope_hi = self._edge_slope(lx, lr, lx[-1] - np.log(10.0), low=False)

    @staticmethod
    def _edge_slope(lx, lr, cut, low):
        sel = lx <= cut if low else lx >= cut
        if sel.sum() < 2:
            sel = slice(0, 2) if low else slice(-2, None)
        x, y = lx[sel], lr[sel]
        return float(np.polyfit(x, y, 1)[0])

    def log_rho(self, log_x):
        lx = np.asarray(log_x, dtype=float)
        out = np.interp(lx, self.knots, self.values)
        with np.errstate(invalid="ignore"):
            lo = lx < self.knots[0]
            out = np.where(lo, self.values[0] + self.slope_lo * (lx - self.knots[0]), out)
            hi = lx > self.knots[-1]
            out = np.where(hi, self.values[-1] + self.slope_hi * (lx - self.knots[-1]), out)
        return out


class Sampled(PiecewiseLogLinear):
    """Profile given as samples (x, rho(x)); interpolated log-log."""

    def __init__(self, x, rho):
        x = np.asarray(x, dtype=float)
        rho = np.asarray(rho, dtype=float)
        if x.shape != rho.shape:
            raise InputError("x and rho sample arrays differ in length")
        if np.any(x <= 0) or np.any(rho <= 0):
            raise InputError("profile samples must be positive")
        super().__init__(np.log(x), np.log(rho))

    @property
    def x(self):
        return np.exp(self.knots)

    @property
    def rho(self):
        return np.exp(self.values)

    def to_dict(self):
        return {"type": "sampled", "x": self.x.tolist(), "rho": self.rho.tolist()}


def alternating_log_knots(low, high, blocks=14, start=0):
    """Knots of the dyadic-block profile: block k spans log x in [-2^(k+1), -2^k]."""
    lx = [0.0]
    lr = [0.0]
    for k in range(start, start + blocks):
        edge = -(2.0 ** (k + 1))
        slope = low if (k - start) % 2 == 0 else high
        lr.append(lr[-1] + slope * (edge - lx[-1]))
        lx.append(edge)
    return np.array(lx[::-1]), np.array(lr[::-1])


class AlternatingPower(PiecewiseLogLinear):
    """Continuous profile with local exponent alternating between two values.

    On the block exp(-2^(k+1)) <= x <= exp(-2^k) the profile behaves like
    x**low for even k and x**high for odd k, matched continuously at the
    block edges; block 0 extends up to x = 1 and beyond. The blocks grow
    without bound in log scale, so every window ratio rho(xy)/rho(y)
    eventually sits inside a single block and the Matuszewska-Orlicz
    indices are exactly (min, max) of the two exponents.
    """

    def __init__(self, low, high, blocks=14):
        lx, lr = alternating_log_knots(low, high, blocks)
        lx = np.append(lx, 1.0)
        lr = np.append(lr, low * 1.0)
        super().__init__(lx, lr)
        self.low, self.high = float(low), float(high)
        # beyond the last block continue with the exponent of the next one
        self.slope_lo = high if blocks % 2 == 1 else low
        self.slope_hi = low

    @property
    def exact_indices(self):
        return (min(self.low, self.high), max(self.low, self.high))

    def to_dict(self):
        return {"type": "alternating", "low": self.low, "high": self.high}


class Indexed(AlternatingPower):
    """Profile prescribed by its index pair (m, M).

    Realized as a power law when m == M, otherwise as the dyadic-block
    alternating profile, whose indices are exactly (m, M).
    """

    def __init__(self, m, M):
        if m > M:
            raise InputError("profile indices must satisfy m <= M")
        super().__init__(m, M)

    def to_dict(self):
        return {"type": "indices", "m": self.low, "M": self.high}


class LogProfile(WeightProfile):
    """Profile defined by a callable on log scale: log_x -> log rho."""

    def __init__(self, func: Callable, label: str = "custom"):
        self.func = func
        self.label = label

    def log_rho(self, log_x):
        return np.asarray(self.func(np.asarray(log_x, dtype=float)), dtype=float)

    def to_dict(self):
        raise InputError(f"profile {self.label!r} has no serialized form")


def slow_oscillation(gamma=0.5, amplitude=0.2) -> LogProfile:
    """x**gamma * exp(amplitude * sin(ln ln(e^e / x)))."""
    e = np.e

    def f(lx):
        return gamma * lx + amplitude * np.sin(np.log(e - lx))

    return LogProfile(f, "slow_oscillation")


def profile_product(*profiles) -> LogProfile:
    return LogProfile(lambda lx: sum(p.log_rho(lx) for p in profiles), "product")


def profile_power(profile, exponent) -> LogProfile:
    return LogProfile(lambda lx: exponent * profile.log_rho(lx), "power")


def profile_from_dict(d: dict) -> WeightProfile:
    kind = d.get("type")
    try:
        if kind == "power":
            return PowerLaw(float(d["gamma"]))
        if kind == "sampled":
            return Sampled(d["x"], d["rho"])
        if kind == "indices":
            return Indexed(float(d["m"]), float(d["M"]))
        if kind == "alternating":
            return AlternatingPower(float(d["low"]), float(d["high"]))
        if kind == "csv":
            return load_csv(d["path"])
    except KeyError as exc:
        raise InputError(f"profile of type {kind!r} is missing field {exc}") from None
    raise InputError(f"unknown profile type {kind!r}")


def load_csv(path) -> Sampled:
    """Read an (x, rho) table; a header row is optional."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                if rows:
                    raise InputError(f"bad row in {path}: {row}") from None
    if not rows:
        raise InputError(f"no samples in {path}")
    x, rho = np.array(rows).T
    return Sampled(x, rho)


def save_csv(path, x, rho):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "rho"])
        for a, b in zip(np.asarray(x), np.asarray(rho)):
            w.writerow([repr(float(a)), repr(float(b))])
