"""Level-spacing statistics of eigenphase spectra.

Reference densities are the CUE Wigner surmise, the exponential (Poisson)
law, and the spacing law of a direct sum of ``m`` equal-size independent CUE
spectra built from the surmise through its tail integrals ``R`` and ``D``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.integrate
import scipy.interpolate
import scipy.stats

from .errors import EmptySample, InvalidQ, TooFewPhases
from .seeding import derive_rng
from .unitary_engine import EigenphaseSet, haar_unitary, phases_from_eigenvalues

QUAD_TOL = 1e-10
TAIL_Y_MAX = 12.0  # R, D of the surmise are below 1e-80 beyond this
TAIL_STEP = 0.005
CDF_S_MAX = 60.0
CDF_STEP = 0.01


def wigner_cue(s):
    s = np.asarray(s, dtype=float)
    return 32 / np.pi**2 * s**2 * np.exp(-4 * s**2 / np.pi)


def poisson(s):
    return np.exp(-np.asarray(s, dtype=float))


@lru_cache(maxsize=4096)
def _r_scalar(y: float) -> float:
    val, _ = scipy.integrate.quad(lambda x: wigner_cue(x + y), 0, np.inf, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    return val


@lru_cache(maxsize=4096)
def _d_scalar(y: float) -> float:
    val, _ = scipy.integrate.quad(lambda x: x * wigner_cue(x + y), 0, np.inf, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    return val


def r_of(y):
    """``R(y) = int_0^inf P(x + y) dx``, the survival function of the surmise."""
    y = np.asarray(y, dtype=float)
    out = np.vectorize(_r_scalar, otypes=[float])(y)
    return out if out.ndim else float(out)


def d_of(y):
    """``D(y) = int_0^inf x P(x + y) dx``."""
    y = np.asarray(y, dtype=float)
    out = np.vectorize(_d_scalar, otypes=[float])(y)
    return out if out.ndim else float(out)


@lru_cache(maxsize=1)
def _tail_splines():
    # quadrature at the nodes, Hermite interpolation in between (R' = -P, D' = -R)
    y = np.arange(0.0, TAIL_Y_MAX + TAIL_STEP / 2, TAIL_STEP)
    r = r_of(y)
    d = d_of(y)
    r_spline = scipy.interpolate.CubicHermiteSpline(y, r, -wigner_cue(y))
    d_spline = scipy.interpolate.CubicHermiteSpline(y, d, -r)
    return r_spline, d_spline


def _tails(y: np.ndarray):
    r_spline, d_spline = _tail_splines()
    inside = y <= TAIL_Y_MAX
    r = np.zeros_like(y)
    d = np.zeros_like(y)
    r[inside] = r_spline(y[inside])
    d[inside] = d_spline(y[inside])
    return r, d


def p_m(s, m: int):
    """Spacing density of a direct sum of ``m`` independent equal-size CUE spectra.

    ``P_m(s) = D^m(s/m) [P(s/m) / (m D(s/m)) + (1 - 1/m) R^2(s/m) / D^2(s/m)]``,
    evaluated with the powers of ``D`` cleared so the far tail stays finite.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    s = np.asarray(s, dtype=float)
    if m == 1:
        return wigner_cue(s)
    y = np.atleast_1d(s / m)
    r, d = _tails(y)
    dens = wigner_cue(y) * d ** (m - 1) / m + (1 - 1 / m) * r**2 * d ** (m - 2)
    return dens.reshape(s.shape) if s.ndim else float(dens[0])


@dataclass(frozen=True)
class ReferenceCurve:
    kind: str  # "cue", "poisson" or "p_m"
    m: int = 1

    @classmethod
    def cue(cls) -> "ReferenceCurve":
        return cls("cue")

    @classmethod
    def poisson(cls) -> "ReferenceCurve":
        return cls("poisson")

    @classmethod
    def superposition(cls, m: int) -> "ReferenceCurve":
        return cls("p_m", m)

    @property
    def name(self) -> str:
        return {"cue": "CUE_surmise", "poisson": "Poisson"}.get(self.kind, f"P_{self.m}")

    def pdf(self, s):
        if self.kind == "cue":
            return wigner_cue(s)
        if self.kind == "poisson":
            return poisson(s)
        return p_m(s, self.m)

    def cdf(self, s):
        """CDF from cumulative Gauss-Legendre quadrature on a grid, Hermite-interpolated."""
        s = np.asarray(s, dtype=float)
        spline = _cdf_spline(self)
        out = np.where(s <= 0, 0.0, np.where(s >= CDF_S_MAX, 1.0, spline(np.clip(s, 0, CDF_S_MAX))))
        return out if out.ndim else float(out)


@lru_cache(maxsize=64)
def _cdf_spline(curve: ReferenceCurve):
    grid = np.arange(0.0, CDF_S_MAX + CDF_STEP / 2, CDF_STEP)
    nodes, weights = np.polynomial.legendre.leggauss(8)
    half = CDF_STEP / 2
    mids = grid[:-1] + half
    pts = (mids[:, None] + half * nodes[None, :]).ravel()
    vals = np.asarray(curve.pdf(pts)).reshape(mids.size, nodes.size)
    pieces = half * vals @ weights
    cdf = np.concatenate([[0.0], np.cumsum(pieces)])
    return scipy.interpolate.CubicHermiteSpline(grid, cdf, curve.pdf(grid))


@dataclass(eq=False)
class SpacingSample:
    spacings: np.ndarray
    source_dim: int
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.spacings.size)

    @property
    def mean(self) -> float:
        return float(self.spacings.mean())


@dataclass(frozen=True)
class GofReport:
    ks_distance: float
    sample_count: int
    curve: str

    def to_json(self) -> dict:
        return {"ks": self.ks_distance, "n": self.sample_count, "curve": self.curve}


def spacings(phases, metadata: dict | None = None) -> SpacingSample:
    """Normalised nearest-neighbour spacings on the circle, wraparound gap included."""
    ph = np.asarray(getattr(phases, "phases", phases), dtype=float)
    n = ph.size
    if n < 2:
        raise TooFewPhases(f"need at least 2 phases, got {n}")
    gaps = np.diff(ph, append=ph[0] + 2 * np.pi)
    return SpacingSample(gaps * n / (2 * np.pi), n, dict(metadata or {}))


def pool(samples) -> SpacingSample:
    samples = list(samples)
    if not samples:
        raise EmptySample("nothing to pool")
    return SpacingSample(
        np.concatenate([s.spacings for s in samples]),
        sum(s.source_dim for s in samples),
        {"pooled": len(samples)},
    )


def _values(sample) -> np.ndarray:
    return np.asarray(getattr(sample, "spacings", sample), dtype=float)


def ks_distance(sample, curve: ReferenceCurve) -> GofReport:
    x = _values(sample)
    if x.size == 0:
        raise EmptySample("empty spacing sample")
    stat = scipy.stats.kstest(x, curve.cdf).statistic
    return GofReport(float(stat), int(x.size), curve.name)


def ks_two_sample(a, b, label: str = "two_sample") -> GofReport:
    a, b = _values(a), _values(b)
    if a.size == 0 or b.size == 0:
        raise EmptySample("empty spacing sample")
    stat = scipy.stats.ks_2samp(a, b).statistic
    return GofReport(float(stat), int(min(a.size, b.size)), label)


def histogram(samples, bin_count: int = 40, s_max: float = 4.0):
    """Density histogram on ``[0, s_max]``; mass beyond the range still counts in the norm.

    Returns ``(bin_mids, density)``.
    """
    if bin_count < 1 or s_max <= 0:
        raise ValueError("need bin_count >= 1 and s_max > 0")
    x = _values(samples)
    edges = np.linspace(0.0, s_max, bin_count + 1)
    counts, _ = np.histogram(x, bins=edges)
    width = s_max / bin_count
    density = counts / (max(x.size, 1) * width)
    return (edges[:-1] + edges[1:]) / 2, density


def cue_spectrum_sample(dim: int, seed=None) -> EigenphaseSet:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = haar_unitary(dim, rng)
    return phases_from_eigenvalues(np.linalg.eigvals(u))


def rains_block_sizes(dim: int, q: int) -> list[int]:
    return [math.ceil((dim - j) / q) for j in range(q)]


def rains_samples(dim: int, q: int, n_samples: int, seed: int = 0):
    """Pooled spacings of ``M**q`` (Haar ``M``) and of unions of ``q`` smaller Haar spectra.

    Sample ``i`` draws everything from the stream ``derive_rng(seed, i)``.
    """
    if not 1 <= q < dim:
        raise InvalidQ(f"q = {q} must satisfy 1 <= q < dim = {dim}")
    sizes = rains_block_sizes(dim, q)
    power, union = [], []
    for i in range(n_samples):
        rng = derive_rng(seed, i)
        m = haar_unitary(dim, rng)
        lam = np.linalg.eigvals(np.linalg.matrix_power(m, q))
        power.append(spacings(phases_from_eigenvalues(lam)))
        blocks = [np.linalg.eigvals(haar_unitary(size, rng)) for size in sizes]
        union.append(spacings(phases_from_eigenvalues(np.concatenate(blocks))))
    return pool(power), pool(union)


def rains_mc(dim: int, q: int, n_samples: int, seed: int = 0) -> GofReport:
    power, union = rains_samples(dim, q, n_samples, seed)
    return ks_two_sample(power, union, label=f"rains_union_q{q}")
