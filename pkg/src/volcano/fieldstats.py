"""Local-field statistics: moment accumulation, the bimodal radial model,
and the concavity classifier behind the volcano transition.

The radial model h(r) = 2/sqrt(2 pi sigma^2) exp(-(mu^2+r^2)/(2 sigma^2))
cosh(mu r / sigma^2) is concave down at the origin iff gamma = mu^2/sigma^2
< 1, and the 2D moment product M_{+1} M_{-1} pins gamma through a closed
form, so the classifier never fits h directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import special

# Floor applied to r before taking 1/r; a single exact zero would otherwise
# poison the negative-first moment.
RINV_EPS = 1e-30

# Maximum gamma considered when inverting the moment curve.
GAMMA_MAX = 1e3


def momentfit_curve(gamma):
    """Closed form for M_{+1} M_{-1} as a function of gamma = mu^2/sigma^2."""
    g = np.asarray(gamma, dtype=np.float64)
    if np.any(g < 0):
        raise ValueError("gamma must be >= 0")
    d = np.exp(-g / 2.0) + np.sqrt(np.pi * g / 2.0) * special.erf(np.sqrt(g / 2.0))
    out = (np.pi / 2.0) * (1.0 + g) / d**2
    return float(out) if np.isscalar(gamma) else out


# Concavity threshold: the moment product at gamma = 1.
CONCAVITY_THRESHOLD = momentfit_curve(1.0)


def gamma_from_moment_product(value: float) -> float:
    """Invert the (monotone decreasing) moment curve by bisection.

    Values >= pi/2 clamp to gamma = 0; values below the curve's floor clamp
    to GAMMA_MAX ("deep above" the transition).
    """
    if value >= momentfit_curve(0.0):
        return 0.0
    if value <= momentfit_curve(GAMMA_MAX):
        return GAMMA_MAX
    lo, hi = 0.0, GAMMA_MAX
    while hi - lo > 1e-8:
        mid = 0.5 * (lo + hi)
        if momentfit_curve(mid) > value:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bimodal_radial_density(r, mu: float, sigma: float):
    """The 1D magnitude density h(r) of the +-mu Gaussian mixture."""
    r = np.asarray(r, dtype=np.float64)
    s2 = sigma * sigma
    return (2.0 / np.sqrt(2.0 * np.pi * s2)
            * np.exp(-(mu * mu + r * r) / (2.0 * s2))
            * np.cosh(mu * r / s2))


@dataclass(frozen=True)
class BimodalFit:
    mu: float
    sigma: float

    @property
    def gamma(self) -> float:
        return self.mu * self.mu / (self.sigma * self.sigma)


class VolcanoSide(Enum):
    BELOW = "below"  # concave down: J < J_c
    ABOVE = "above"  # concave up: J > J_c
    UNDECIDED = "undecided"


@dataclass
class MomentAccumulator:
    """Streaming sums for M_{+1}, M_{-1} and their spread, mergeable.

    Per-batch partial sums are kept and combined with math.fsum, which is
    exactly rounded, so any merge order of the same batches gives identical
    results (parallel == serial).
    """

    n: int = 0
    merges: int = 0
    _sum_r: list = field(default_factory=list)
    _sum_rinv: list = field(default_factory=list)
    _sum_r2: list = field(default_factory=list)
    _sum_rinv2: list = field(default_factory=list)

    def add(self, r) -> "MomentAccumulator":
        r = np.asarray(r, dtype=np.float64)
        if np.any(r < 0):
            raise ValueError("magnitudes must be >= 0")
        rinv = 1.0 / np.maximum(r, RINV_EPS)
        self.n += r.size
        self._sum_r.append(float(np.sum(r)))
        self._sum_rinv.append(float(np.sum(rinv)))
        self._sum_r2.append(float(np.sum(r * r)))
        self._sum_rinv2.append(float(np.sum(rinv * rinv)))
        return self

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        self.n += other.n
        self.merges += other.merges + 1
        self._sum_r += other._sum_r
        self._sum_rinv += other._sum_rinv
        self._sum_r2 += other._sum_r2
        self._sum_rinv2 += other._sum_rinv2
        return self

    @property
    def sum_r(self) -> float:
        return math.fsum(self._sum_r)

    @property
    def sum_rinv(self) -> float:
        return math.fsum(self._sum_rinv)

    @property
    def sum_r2(self) -> float:
        return math.fsum(self._sum_r2)

    @property
    def sum_rinv2(self) -> float:
        return math.fsum(self._sum_rinv2)

    def m_plus1(self) -> float:
        self._require(1)
        return self.sum_r / self.n

    def m_minus1(self) -> float:
        self._require(1)
        return self.sum_rinv / self.n

    def _require(self, k: int) -> None:
        if self.n < k:
            raise ValueError(f"need at least {k} samples, have {self.n}")


def accumulate_fields(acc: MomentAccumulator, sample) -> MomentAccumulator:
    """Fold one LocalFieldSample (array of magnitudes) into the accumulator."""
    return acc.add(np.abs(np.asarray(sample)))


def moment_product(acc: MomentAccumulator):
    """(M_{+1} M_{-1}, stderr) with the delta-method error, covariance neglected."""
    acc._require(2)
    n = acc.n
    m1 = acc.sum_r / n
    minv = acc.sum_rinv / n
    var_r = max(acc.sum_r2 / n - m1 * m1, 0.0)
    var_rinv = max(acc.sum_rinv2 / n - minv * minv, 0.0)
    stderr = math.sqrt((minv * minv * var_r + m1 * m1 * var_rinv) / n)
    return m1 * minv, stderr


def fit_bimodal(acc: MomentAccumulator) -> BimodalFit:
    """Method-of-moments fit: gamma from the product, scale from M_{+1}.

    For the rotated model M_{+1} = sqrt(pi/2) sigma (1+gamma)/D(gamma) with
    D = exp(-gamma/2) + sqrt(pi gamma/2) erf(sqrt(gamma/2)).
    """
    value, _ = moment_product(acc)
    gamma = gamma_from_moment_product(value)
    d = math.exp(-gamma / 2.0) + math.sqrt(math.pi * gamma / 2.0) * math.erf(
        math.sqrt(gamma / 2.0))
    sigma = acc.m_plus1() * d / ((1.0 + gamma) * math.sqrt(math.pi / 2.0))
    return BimodalFit(mu=sigma * math.sqrt(gamma), sigma=sigma)


def classify_value(value: float, stderr: float, margin: float = 1.5):
    """(side, z-score) given a moment product and its standard error."""
    z = (value - CONCAVITY_THRESHOLD) / stderr if stderr > 0 else math.inf * np.sign(
        value - CONCAVITY_THRESHOLD)
    if value - CONCAVITY_THRESHOLD > margin * stderr:
        return VolcanoSide.BELOW, z
    if CONCAVITY_THRESHOLD - value > margin * stderr:
        return VolcanoSide.ABOVE, z
    return VolcanoSide.UNDECIDED, z


def classify_volcano(acc: MomentAccumulator, margin: float = 1.5):
    value, stderr = moment_product(acc)
    return classify_value(value, stderr, margin)


@dataclass
class RadialHistogram:
    """Weighted histogram of field magnitudes with fixed, mergeable edges."""

    edges: np.ndarray
    counts: np.ndarray

    @classmethod
    def with_edges(cls, edges) -> "RadialHistogram":
        edges = np.asarray(edges, dtype=np.float64)
        if len(edges) < 3 or np.any(np.diff(edges) <= 0) or edges[0] < 0:
            raise ValueError("need >= 2 increasing nonnegative bins")
        return cls(edges=edges, counts=np.zeros(len(edges) - 1))

    @classmethod
    def from_samples(cls, samples, bins: int) -> "RadialHistogram":
        samples = np.asarray(samples, dtype=np.float64).ravel()
        if samples.size == 0:
            raise ValueError("empty sample set")
        if bins < 2:
            raise ValueError("bins must be >= 2")
        hi = float(np.max(samples))
        if hi <= 0:
            hi = 1.0
        h = cls.with_edges(np.linspace(0.0, hi, bins + 1))
        h.add(samples)
        return h

    def add(self, samples) -> "RadialHistogram":
        samples = np.asarray(samples, dtype=np.float64).ravel()
        # overflow clips into the top bin so merged totals stay consistent
        clipped = np.minimum(samples, self.edges[-1])
        counts, _ = np.histogram(clipped, bins=self.edges)
        self.counts += counts
        return self

    def merge(self, other: "RadialHistogram") -> "RadialHistogram":
        if not np.array_equal(self.edges, other.edges):
            raise ValueError("histograms must share bin edges")
        self.counts += other.counts
        return self

    @property
    def total(self) -> float:
        return float(np.sum(self.counts))

    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def density(self) -> np.ndarray:
        widths = np.diff(self.edges)
        total = self.total
        if total == 0:
            raise ValueError("empty histogram")
        return self.counts / (total * widths)

    def profile(self) -> np.ndarray:
        """2D density profile h(r): radial density divided by 2*pi*r.

        This is the quantity whose concavity at the origin distinguishes the
        two phases; the volcano shape is a mode of h away from r = 0.
        """
        return self.density() / (2.0 * np.pi * self.centers())

    def mode_center(self) -> float:
        return float(self.centers()[int(np.argmax(self.profile()))])

    def to_csv(self, path) -> None:
        dens = self.density()
        with open(path, "w") as fh:
            fh.write("bin_center,density\n")
            for c, d in zip(self.centers(), dens):
                fh.write(f"{float(c)!r},{float(d)!r}\n")


def radial_histogram(samples, bins: int) -> RadialHistogram:
    """Equal-width histogram on [0, max r], normalizable to a unit density."""
    return RadialHistogram.from_samples(samples, bins)


@dataclass
class PhaseFieldDensity:
    """2D histogram over (normalized coupling, wrapped theta_j - phi_k)."""

    coupling_edges: np.ndarray
    delta_edges: np.ndarray
    counts: np.ndarray  # (n_coupling_bins, n_delta_bins)

    def slice_density(self) -> np.ndarray:
        """Counts normalized per coupling slice to integrate to 1 over delta."""
        widths = np.diff(self.delta_edges)
        totals = self.counts.sum(axis=1, keepdims=True)
        out = np.zeros_like(self.counts, dtype=np.float64)
        nonzero = totals[:, 0] > 0
        out[nonzero] = self.counts[nonzero] / (totals[nonzero] * widths)
        return out

    def coupling_centers(self) -> np.ndarray:
        return 0.5 * (self.coupling_edges[:-1] + self.coupling_edges[1:])

    def delta_centers(self) -> np.ndarray:
        return 0.5 * (self.delta_edges[:-1] + self.delta_edges[1:])

    def merge(self, other: "PhaseFieldDensity") -> "PhaseFieldDensity":
        if (not np.array_equal(self.coupling_edges, other.coupling_edges)
                or not np.array_equal(self.delta_edges, other.delta_edges)):
            raise ValueError("densities must share bin edges")
        self.counts += other.counts
        return self

    def to_csv(self, path) -> None:
        dens = self.slice_density()
        with open(path, "w") as fh:
            fh.write("coupling_center,delta_center,density\n")
            for i, cc in enumerate(self.coupling_centers()):
                for j, dc in enumerate(self.delta_centers()):
                    fh.write(f"{float(cc)!r},{float(dc)!r},{float(dens[i, j])!r}\n")


def wrap_angle(x):
    """Wrap angles into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x), 2.0 * np.pi)


def phase_field_density(
    coupling,
    snapshots,
    delta_bins: int = 24,
    coupling_edges=None,
) -> PhaseFieldDensity:
    """Bin (J_jk * N/(J*K), theta_j - phi_k) over all ordered pairs j != k.

    `snapshots` is a sequence of (phases, fields) pairs sharing one coupling
    realization; fields are the complex local fields at those phases.
    """
    if coupling.kind != "lowrank":
        raise ValueError("phase-field density needs the low-rank backend")
    if coupling.j == 0:
        raise ValueError("J = 0 leaves the coupling axis unnormalizable")
    n, k = coupling.n, coupling.k
    w = coupling.matrix() * (n / (coupling.j * k))
    offdiag = ~np.eye(n, dtype=bool)
    wflat = w[offdiag]
    if coupling_edges is None:
        # slices centered on the K+1 attainable values -1, -1+2/K, ..., 1
        coupling_edges = np.linspace(-1.0 - 1.0 / k, 1.0 + 1.0 / k, k + 2)
    coupling_edges = np.asarray(coupling_edges, dtype=np.float64)
    delta_edges = np.linspace(-np.pi, np.pi, delta_bins + 1)

    counts = np.zeros((len(coupling_edges) - 1, delta_bins))
    for phases, fields in snapshots:
        phi = np.angle(np.asarray(fields))
        delta = wrap_angle(np.asarray(phases)[:, None] - phi[None, :])
        h, _, _ = np.histogram2d(wflat, delta[offdiag],
                                 bins=(coupling_edges, delta_edges))
        counts += h
    return PhaseFieldDensity(coupling_edges, delta_edges, counts)
