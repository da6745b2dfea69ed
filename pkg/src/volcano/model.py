"""Construction of oscillator systems: frequencies, interaction vectors, couplings.

Couplings come in three flavors: the low-rank signed construction
J_jk = (J/N) * sum_m (-1)^m u_m^(j) u_m^(k) stored as an N x K sign matrix,
a symmetric Gaussian comparison matrix with zero diagonal, and an arbitrary
explicit dense matrix.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

# Clamp margin keeping the inverse-CDF map away from the poles of tan.
UNIFORM_EPS = 2.0 ** -52

# Hard cap on N for operations that materialize N x N or N x N-sign storage.
DENSE_CAP = 4096


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def alternating_signs(k: int) -> np.ndarray:
    """(-1)^m for m = 1..k as a float array."""
    s = np.ones(k)
    s[::2] = -1.0
    return s


def lorentzian_quantile(u):
    """Inverse CDF of the unit Lorentzian, with u clamped away from {0, 1}."""
    u = np.clip(u, UNIFORM_EPS, 1.0 - UNIFORM_EPS)
    return np.tan(np.pi * (u - 0.5))


def sample_frequencies(n: int, seed) -> np.ndarray:
    """n i.i.d. unit-Lorentzian frequencies, deterministic given seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return lorentzian_quantile(_rng(seed).random(n))


def sample_interaction_vectors(n: int, k: int, seed) -> np.ndarray:
    """n random +-1 vectors of even length k, as an (n, k) int8 array."""
    if k < 2 or k % 2 != 0:
        raise ValueError("K must be even and >= 2")
    if n < 1:
        raise ValueError("n must be >= 1")
    bits = _rng(seed).integers(0, 2, size=(n, k), dtype=np.int8)
    return (2 * bits - 1).astype(np.int8)


@dataclass(frozen=True)
class LowRankCoupling:
    """Coupling J_jk = (J/N) sum_m (-1)^m u_m^(j) u_m^(k), rank <= K."""

    j: float
    vectors: np.ndarray  # (n, k), entries +-1

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] % 2 != 0 or v.shape[1] < 2:
            raise ValueError("vectors must be (n, k) with k even and >= 2")
        if not np.all(np.abs(v) == 1.0):
            raise ValueError("vector entries must be +-1")
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "_signed", v * alternating_signs(v.shape[1]))
        self.vectors.flags.writeable = False

    @property
    def kind(self) -> str:
        return "lowrank"

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def k(self) -> int:
        return self.vectors.shape[1]

    def entry(self, a: int, b: int) -> float:
        if not (0 <= a < self.n and 0 <= b < self.n):
            raise IndexError("oscillator index out of range")
        return self.j / self.n * float(np.dot(self._signed[a], self.vectors[b]))

    def local_field_parts(self, cos_theta, sin_theta):
        """Real and imaginary parts of P_j via the K partial sums s_m."""
        tc = self.vectors.T @ cos_theta
        ts = self.vectors.T @ sin_theta
        scale = self.j / self.n
        return scale * (self._signed @ tc), scale * (self._signed @ ts)

    def matrix(self) -> np.ndarray:
        """Materialize the full N x N matrix (validation only)."""
        if self.n > DENSE_CAP:
            raise ValueError(f"refusing to materialize N={self.n} > cap {DENSE_CAP}")
        return (self.j / self.n) * (self._signed @ self.vectors.T)


@dataclass(frozen=True)
class DenseCoupling:
    """Explicit symmetric coupling matrix with zero diagonal."""

    matrix_: np.ndarray
    kind_label: str = "dense"

    def __post_init__(self):
        m = np.asarray(self.matrix_, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("coupling matrix must be square")
        object.__setattr__(self, "matrix_", m)
        self.matrix_.flags.writeable = False

    @property
    def kind(self) -> str:
        return self.kind_label

    @property
    def n(self) -> int:
        return self.matrix_.shape[0]

    def entry(self, a: int, b: int) -> float:
        if not (0 <= a < self.n and 0 <= b < self.n):
            raise IndexError("oscillator index out of range")
        return float(self.matrix_[a, b])

    def local_field_parts(self, cos_theta, sin_theta):
        return self.matrix_ @ cos_theta, self.matrix_ @ sin_theta

    def matrix(self) -> np.ndarray:
        return self.matrix_


def coupling_entry(system, a: int, b: int) -> float:
    return system.coupling.entry(a, b)


def build_gaussian_coupling(n: int, j: float, seed) -> DenseCoupling:
    """Symmetric zero-diagonal matrix, off-diagonal entries ~ N(0, J^2/N)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if j < 0:
        raise ValueError("J must be >= 0")
    rng = _rng(seed)
    m = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    m[iu] = rng.normal(0.0, j / np.sqrt(n), size=len(iu[0]))
    m += m.T
    return DenseCoupling(m, kind_label="gaussian")


def lowrank_limit_check(n: int, j: float, seed, cap: int = DENSE_CAP) -> float:
    """Empirical std of off-diagonal low-rank entries at K = N.

    Converges to J/sqrt(N) for large N.
    """
    if n > cap:
        raise ValueError(f"N={n} exceeds cap {cap} (K = N storage)")
    vectors = sample_interaction_vectors(n, n, seed)
    m = LowRankCoupling(j, vectors).matrix()
    off = m[~np.eye(n, dtype=bool)]
    return float(np.sqrt(np.mean(off**2)))


@dataclass(frozen=True)
class OscillatorSystem:
    """Immutable snapshot of phases, frequencies, and the coupling backend."""

    phases: np.ndarray
    frequencies: np.ndarray
    coupling: LowRankCoupling | DenseCoupling

    def __post_init__(self):
        p = np.asarray(self.phases, dtype=np.float64)
        w = np.asarray(self.frequencies, dtype=np.float64)
        if p.shape != w.shape or p.ndim != 1:
            raise ValueError("phases and frequencies must be equal-length 1D")
        if len(p) != self.coupling.n:
            raise ValueError("coupling size does not match oscillator count")
        if not np.all(np.isfinite(w)):
            raise ValueError("frequencies must be finite")
        object.__setattr__(self, "phases", p)
        object.__setattr__(self, "frequencies", w)
        self.phases.flags.writeable = False
        self.frequencies.flags.writeable = False

    @property
    def n(self) -> int:
        return len(self.phases)

    def with_phases(self, phases) -> "OscillatorSystem":
        return OscillatorSystem(phases, self.frequencies, self.coupling)


@dataclass(frozen=True)
class SystemSpec:
    """JSON-serializable description sufficient to rebuild a system bit-exactly."""

    n: int
    k: int
    j: float
    seed: object  # int or list of ints (SeedSequence entropy)
    coupling: str = "lowrank"  # lowrank | gaussian
    init: str = "uniform"  # uniform | zero

    def __post_init__(self):
        if self.coupling not in ("lowrank", "gaussian"):
            raise ValueError(f"unknown coupling kind {self.coupling!r}")
        if self.init not in ("uniform", "zero"):
            raise ValueError(f"unknown initial condition {self.init!r}")
        if self.coupling == "lowrank" and (self.k % 2 != 0 or self.k < 2):
            raise ValueError("K must be even and >= 2")
        if self.n < 2:
            raise ValueError("N must be >= 2")
        if self.j < 0:
            raise ValueError("J must be >= 0")

    def build(self) -> OscillatorSystem:
        root = np.random.SeedSequence(self.seed)
        freq_ss, coup_ss, phase_ss = root.spawn(3)
        omega = sample_frequencies(self.n, freq_ss)
        if self.coupling == "lowrank":
            vectors = sample_interaction_vectors(self.n, self.k, coup_ss)
            coupling = LowRankCoupling(self.j, vectors)
        else:
            coupling = build_gaussian_coupling(self.n, self.j, coup_ss)
        if self.init == "uniform":
            phases = _rng(phase_ss).random(self.n) * (2.0 * np.pi)
        else:
            phases = np.zeros(self.n)
        return OscillatorSystem(phases, omega, coupling)

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n, "k": self.k, "j": self.j, "seed": self.seed,
             "coupling": self.coupling, "init": self.init})

    @classmethod
    def from_json(cls, text: str) -> "SystemSpec":
        d = json.loads(text)
        return cls(n=d["n"], k=d["k"], j=d["j"], seed=d["seed"],
                   coupling=d["coupling"], init=d["init"])


def dump_matrix_csv(coupling, path) -> None:
    """Dense CSV dump of the coupling matrix, for cross-checks."""
    np.savetxt(path, coupling.matrix(), delimiter=",")
