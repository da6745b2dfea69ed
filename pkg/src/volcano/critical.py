"""Finite-N critical coupling by bisection on the moment product.

Each candidate J is judged by simulating fresh coupling realizations in
batches, tracking the per-realization moment products and their running
standard error, and stopping once the mean is more than `margin` standard
errors from the concavity threshold (or the realization cap is hit).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .fieldstats import CONCAVITY_THRESHOLD, MomentAccumulator
from .integrator import integrate
from .model import SystemSpec
from .util import ordered_map


class Decision(Enum):
    BELOW = "below"  # J below the transition (product above threshold)
    ABOVE = "above"
    EXHAUSTED = "exhausted"  # cap reached: J within resolution of J_c


@dataclass(frozen=True)
class BisectionConfig:
    n: int
    k: int
    j_lo: float = 0.5
    j_hi: float = 6.0
    accuracy: float = 0.02
    batch_size: int = 100  # also the minimum realizations per J
    max_realizations: int = 100_000
    margin: float = 1.5
    coupling: str = "lowrank"
    dt: float = 0.01
    transient: int = 1000
    recorded: int = 2000
    init: str = "zero"
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not self.j_lo < self.j_hi:
            raise ValueError("need j_lo < j_hi")
        if self.accuracy <= 0:
            raise ValueError("accuracy must be positive")
        if self.batch_size < 1 or self.max_realizations < self.batch_size:
            raise ValueError("invalid realization counts")


@dataclass(frozen=True)
class JDecision:
    j: float
    n_realizations: int
    product: float
    stderr: float
    decision: Decision


@dataclass
class CriticalEstimate:
    j_c: float
    j_lo: float
    j_hi: float
    log: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({
            "j_c": self.j_c,
            "bracket": [self.j_lo, self.j_hi],
            "log": [
                {"j": d.j, "n_realizations": d.n_realizations,
                 "product": d.product, "stderr": d.stderr,
                 "decision": d.decision.value}
                for d in self.log
            ],
        })

    def log_to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("j,n_realizations,product,stderr,decision\n")
            for d in self.log:
                fh.write(f"{float(d.j)!r},{d.n_realizations},{float(d.product)!r},"
                         f"{float(d.stderr)!r},{d.decision.value}\n")


def realization_moments(args):
    """(M_{+1}, M_{-1}) of one fresh coupling realization."""
    n, k, j, coupling, seed, dt, transient, recorded, init = args
    spec = SystemSpec(n=n, k=k, j=j, seed=seed, coupling=coupling, init=init)
    acc = MomentAccumulator()
    integrate(spec.build(), dt=dt, transient=transient, recorded=recorded,
              stride=max(1, recorded), moments=acc)
    return acc.m_plus1(), acc.m_minus1()


def decide_at_j(j: float, cfg: BisectionConfig, j_index: int = 0) -> JDecision:
    """Run realization batches at one J until the stopping rule fires.

    The decision value is the product of the moments pooled across
    realizations: within one realization the fields visit only 2^K values
    at a time, so a single realization's product is biased low whenever the
    mode correlation time is long.  Pooling over fresh couplings restores
    the full 2D field distribution.  The running standard deviation of the
    per-realization products supplies the standard error (it matches the
    delta-method error of the pooled product to leading order).
    """
    moments: list = []
    while len(moments) < cfg.max_realizations:
        start = len(moments)
        batch = min(cfg.batch_size, cfg.max_realizations - start)
        args = [
            (cfg.n, cfg.k, j, cfg.coupling, [cfg.seed, j_index, r],
             cfg.dt, cfg.transient, cfg.recorded, cfg.init)
            for r in range(start, start + batch)
        ]
        moments.extend(ordered_map(realization_moments, args, cfg.workers))
        m1s, minvs = np.transpose(moments)
        value = float(np.mean(m1s) * np.mean(minvs))
        if len(moments) >= 2:
            products = m1s * minvs
            stderr = float(np.std(products, ddof=1) / math.sqrt(len(products)))
        else:
            stderr = math.inf
        if abs(value - CONCAVITY_THRESHOLD) > cfg.margin * stderr:
            side = Decision.BELOW if value > CONCAVITY_THRESHOLD else Decision.ABOVE
            return JDecision(j, len(moments), value, stderr, side)
    return JDecision(j, len(moments), value, stderr, Decision.EXHAUSTED)


class InvalidBracket(ValueError):
    def __init__(self, lo: JDecision, hi: JDecision):
        self.lo, self.hi = lo, hi
        super().__init__(
            f"invalid bracket: J={lo.j} -> {lo.decision.value}, "
            f"J={hi.j} -> {hi.decision.value}")


def estimate_jc(cfg: BisectionConfig, decide=None) -> CriticalEstimate:
    """Bisect J until the bracket is narrower than cfg.accuracy.

    `decide` defaults to decide_at_j; tests may inject a synthetic rule.
    An EXHAUSTED verdict means the product is statistically at threshold,
    so the bracket contracts symmetrically around that J.
    """
    decide = decide or decide_at_j
    log: list[JDecision] = []
    j_index = 0

    def run(j):
        nonlocal j_index
        d = decide(j, cfg, j_index)
        j_index += 1
        log.append(d)
        return d

    lo, hi = cfg.j_lo, cfg.j_hi
    d_lo = run(lo)
    d_hi = run(hi)
    if d_lo.decision == Decision.ABOVE or d_hi.decision == Decision.BELOW:
        raise InvalidBracket(d_lo, d_hi)
    if d_lo.decision == Decision.EXHAUSTED:
        return CriticalEstimate(lo, lo, lo, log)
    if d_hi.decision == Decision.EXHAUSTED:
        return CriticalEstimate(hi, hi, hi, log)

    while hi - lo > cfg.accuracy:
        mid = 0.5 * (lo + hi)
        d = run(mid)
        if d.decision == Decision.BELOW:
            lo = mid
        elif d.decision == Decision.ABOVE:
            hi = mid
        else:
            quarter = 0.25 * (hi - lo)
            lo = max(lo, mid - quarter)
            hi = min(hi, mid + quarter)
    return CriticalEstimate(0.5 * (lo + hi), lo, hi, log)
