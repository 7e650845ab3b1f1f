"""Finite sections of Toeplitz operators on the unit circle.

For p = 2, w = 1 and a smooth closed circle, aP + Q is Fredholm exactly when
the Toeplitz operator T(a) is, so the smallest singular values of the
sections T_n(a - lambda) give an independent view of the essential spectrum.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg as sla
from scipy.linalg.lapack import ztrtrs
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh
from scipy.spatial import cKDTree

from .errors import InputError, PreconditionError


class ToeplitzSection(NamedTuple):
    n: int
    coefficients: np.ndarray  # hat a_m for m = -(n-1) .. n-1
    fft_size: int

    def coefficient(self, m):
        return self.coefficients[m + self.n - 1]

    @property
    def matrix(self):
        c = self.coefficients
        n = self.n
        col = c[n - 1 :]  # hat a_0 .. hat a_{n-1}
        row = c[n - 1 :: -1]  # hat a_0, hat a_{-1}, ..
        return sla.toeplitz(col, row)


def circle_samples(a, fft_size):
    """Values of a at e^{2 pi i j / fft_size}; jump positions get the midpoint."""
    curve = a.curve
    pts = curve.points
    if np.max(np.abs(np.abs(pts) - 1.0)) > 1e-9:
        raise PreconditionError("the finite-section oracle needs a symbol on the unit circle")
    theta_s = np.unwrap(np.angle(pts))
    theta_s = theta_s - theta_s[0] + np.angle(pts[0])
    if theta_s[-1] < theta_s[0]:
        raise PreconditionError("the unit circle must be oriented counter-clockwise")
    theta = 2 * np.pi * np.arange(fft_size) / fft_size
    rel = np.mod(theta - theta_s[0], 2 * np.pi) + theta_s[0]
    s_query = np.interp(rel, theta_s, curve.s)
    vals = a.at_arclength(s_query, at_jump=None)[:, 0, 0]
    for j in a.jumps:
        phi = np.angle(j.t) % (2 * np.pi)
        hit = np.abs((theta - phi + np.pi) % (2 * np.pi) - np.pi) < 1e-12
        vals[hit] = 0.5 * (j.left[0, 0] + j.right[0, 0])
    return vals


def fourier_toeplitz(a, fft_size=8192, n=512) -> ToeplitzSection:
    """Section T_n(a) with entries hat a_{j-k} from a discrete Fourier transform."""
    if not a.scalar:
        raise PreconditionError("finite sections are built for scalar symbols")
    if n > fft_size // 8:
        raise InputError(f"section size {n} exceeds fft_size/8 = {fft_size // 8}")
    vals = circle_samples(a, fft_size)
    c = np.fft.fft(vals) / fft_size
    m = np.arange(-(n - 1), n)
    return ToeplitzSection(n, c[m % fft_size], fft_size)


class SweepResult(NamedTuple):
    lam: np.ndarray
    sigma_min: np.ndarray
    failures: list  # (lambda, message) for decompositions that failed


def _sigma_min_triangular(R, lam, tol=1e-10):
    """Smallest singular value of the upper-triangular R - lam I via Lanczos on (M^H M)^-1."""
    M = np.asfortranarray(R.copy())
    M[np.diag_indices_from(M)] -= lam
    d = np.abs(np.diag(M))
    if np.min(d) == 0.0:
        return 0.0
    n = M.shape[0]

    def apply(x):
        y, info = ztrtrs(M, x.astype(complex), lower=0, trans=2)
        if info != 0:
            raise np.linalg.LinAlgError(f"triangular solve failed (info={info})")
        z, info = ztrtrs(M, y, lower=0, trans=0)
        if info != 0:
            raise np.linalg.LinAlgError(f"triangular solve failed (info={info})")
        return z

    op = LinearOperator((n, n), matvec=apply, dtype=complex)
    v0 = np.ones(n, dtype=complex)
    top = eigsh(op, k=1, which="LM", tol=tol, ncv=min(20, n - 1), v0=v0, return_eigenvectors=False)
    return float(1.0 / np.sqrt(np.real(top[0])))


def sigma_min_sweep(a, lam_grid, n=512, fft_size=8192, method="schur") -> SweepResult:
    """Smallest singular value of T_n(a - lambda) for each lambda.

    ``method="schur"`` factors T_n(a) once (T = Z R Z^H) and runs a Lanczos
    iteration on each shifted triangular factor; ``method="svd"`` computes
    full singular values per lambda.
    """
    section = a if isinstance(a, ToeplitzSection) else fourier_toeplitz(a, fft_size, n)
    T = section.matrix
    lam = np.asarray(lam_grid, dtype=complex).ravel()
    out = np.empty(lam.size)
    failures = []
    if method == "schur":
        R, _ = sla.schur(T.astype(complex), output="complex")
        small = section.n <= 2
        for k, l in enumerate(lam):
            try:
                if small:
                    out[k] = sla.svdvals(R - l * np.eye(section.n)).min()
                else:
                    out[k] = _sigma_min_triangular(R, l)
            except (np.linalg.LinAlgError, ArpackNoConvergence) as exc:
                out[k] = np.nan
                failures.append((complex(l), str(exc)))
    elif method == "svd":
        eye = np.eye(section.n)
        for k, l in enumerate(lam):
            try:
                out[k] = sla.svdvals(T - l * eye).min()
            except np.linalg.LinAlgError as exc:
                out[k] = np.nan
                failures.append((complex(l), str(exc)))
    else:
        raise InputError(f"unknown method {method!r}")
    return SweepResult(lam, out, failures)


class OracleReport(NamedTuple):
    agreement_rate: float
    n_classified: int
    n_guard: int
    disagreements: list  # (lambda, sigma_min, predicted_member)
    predicted_member: np.ndarray
    distance: np.ndarray

    def to_dict(self):
        return {
            "agreement_rate": self.agreement_rate,
            "n_classified": self.n_classified,
            "n_guard": self.n_guard,
            "disagreements": [
                {"lambda": [l.real, l.imag], "sigma_min": s, "predicted_member": bool(m)}
                for l, s, m in self.disagreements
            ],
        }


def predicted_points(cloud, n_c=16):
    """Point cloud of a predicted spectrum: range samples plus sampled horns."""
    from .horns import sample_region

    parts = [np.asarray(cloud.range_points, dtype=complex)]
    for _, h in cloud.horns:
        parts.append(sample_region(h, n_c).points)
    return np.concatenate(parts)


def cluster_compare(cloud, sweep: SweepResult, threshold=0.05, guard=0.1, include_members=True) -> OracleReport:
    """Agreement between sigma_min classification and predicted membership.

    Points within ``guard`` of the predicted set are not scored, except
    (with ``include_members``) points that lie in the predicted set exactly.
    """
    lam = sweep.lam
    if lam.size == 0:
        raise InputError("empty lambda grid")
    pts = predicted_points(cloud)
    if pts.size == 0:
        raise InputError("empty predicted set")
    tree = cKDTree(np.column_stack([pts.real, pts.imag]))
    dist, _ = tree.query(np.column_stack([lam.real, lam.imag]))
    member = np.asarray(cloud.contains(lam), dtype=bool)
    scored = dist > guard
    if include_members:
        scored |= member
    scored &= np.isfinite(sweep.sigma_min)
    oracle_in = sweep.sigma_min < threshold
    agree = oracle_in == member
    n = int(scored.sum())
    rate = float(agree[scored].mean()) if n else float("nan")
    bad = [(complex(lam[k]), float(sweep.sigma_min[k]), bool(member[k])) for k in np.nonzero(scored & ~agree)[0]]
    return OracleReport(rate, n, int((~scored).sum()), bad, member, dist)
