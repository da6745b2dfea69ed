"""Ensemble experiment drivers shared by the CLI and the acceptance suite."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import fieldstats
from .fieldstats import MomentAccumulator, RadialHistogram, phase_field_density
from .integrator import integrate, local_fields
from .model import SystemSpec
from .util import ordered_map


@dataclass(frozen=True)
class Protocol:
    """Per-realization integration protocol (1000 transient + 2000 recorded steps)."""

    dt: float = 0.01
    transient: int = 1000
    recorded: int = 2000
    stride: int = 1


def _volcano_worker(args):
    n, k, j, coupling, init, seed, proto, edges, hist_stride = args
    spec = SystemSpec(n=n, k=k, j=j, seed=seed, coupling=coupling, init=init)
    acc = MomentAccumulator()
    rec = integrate(spec.build(), dt=proto.dt, transient=proto.transient,
                    recorded=proto.recorded, stride=proto.recorded,
                    moments=acc, record_fields=True, field_stride=hist_stride)
    hist = RadialHistogram.with_edges(edges)
    for row in rec.field_mags:
        hist.add(row)
    return acc, hist


def volcano_ensemble(
    n: int,
    k: int,
    j: float,
    realizations: int,
    seed: int,
    *,
    coupling: str = "lowrank",
    init: str = "uniform",
    proto: Protocol = Protocol(),
    bins: int = 64,
    r_max: float | None = None,
    hist_stride: int = 1,
    workers: int = 1,
):
    """Pool local-field moments and a radial histogram over realizations."""
    if r_max is None:
        # generous cover for both phases: incoherent r ~ J sqrt(K/N), locked r ~ J
        r_max = max(2.0 * j, 6.0 * j * np.sqrt(k / n))
    edges = np.linspace(0.0, r_max, bins + 1)
    args = [(n, k, j, coupling, init, [seed, r], proto, edges, hist_stride)
            for r in range(realizations)]
    results = ordered_map(_volcano_worker, args, workers)
    acc = MomentAccumulator()
    hist = RadialHistogram.with_edges(edges)
    for a, h in results:
        acc.merge(a)
        hist.merge(h)
    return acc, hist


def volcano_summary(acc: MomentAccumulator) -> dict:
    value, stderr = fieldstats.moment_product(acc)
    side, z = fieldstats.classify_value(value, stderr)
    return {
        "n_samples": acc.n,
        "m_plus1": acc.m_plus1(),
        "m_minus1": acc.m_minus1(),
        "product": value,
        "stderr": stderr,
        "gamma": fieldstats.gamma_from_moment_product(value),
        "classification": side.value,
        "z": z,
    }


def _phases_worker(args):
    n, k, j, seed, proto, snapshot_stride, delta_bins = args
    spec = SystemSpec(n=n, k=k, j=j, seed=seed, coupling="lowrank", init="uniform")
    system = spec.build()
    rec = integrate(system, dt=proto.dt, transient=proto.transient,
                    recorded=proto.recorded, stride=proto.recorded,
                    record_phases=True, phase_stride=snapshot_stride)
    pairs = [(p, local_fields(system.with_phases(p)))
             for p in rec.phase_snapshots]
    return phase_field_density(system.coupling, pairs, delta_bins=delta_bins)


def phases_experiment(
    n: int,
    k: int,
    j: float,
    seed: int,
    *,
    realizations: int = 1,
    proto: Protocol = Protocol(),
    snapshot_stride: int = 400,
    delta_bins: int = 24,
    workers: int = 1,
):
    """Phase-vs-local-field density pooled over independent realizations."""
    args = [(n, k, j, [seed, r], proto, snapshot_stride, delta_bins)
            for r in range(realizations)]
    densities = ordered_map(_phases_worker, args, workers)
    out = densities[0]
    for d in densities[1:]:
        out.merge(d)
    return out


def dump_json(obj: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
