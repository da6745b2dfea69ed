"""Command-line entry point: config parsing, orchestration, persistence."""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, oa
from .critical import BisectionConfig, estimate_jc
from .decay import decay_experiment
from .experiments import (Protocol, dump_json, phases_experiment,
                          volcano_ensemble, volcano_summary)
from .integrator import integrate
from .model import SystemSpec

EXPERIMENTS = ("simulate", "volcano", "critical", "oa", "decay", "phases")


@dataclass
class EnsembleConfig:
    """Full experiment description with standard protocol defaults."""

    experiment: str
    n: int = 250
    k: int = 4
    j: list = field(default_factory=lambda: [2.0])
    dt: float = 0.01
    transient_steps: int = 1000
    recorded_steps: int = 2000
    realizations: int = 1
    initial: str = "uniform"  # uniform | zero
    coupling: str = "lowrank"  # lowrank | gaussian
    seed: int = 0
    outdir: str = "out"
    workers: int = 1
    # experiment-specific knobs
    accuracy: float = 0.02
    max_sims: int = 100_000
    j_lo: float = 0.5
    j_hi: float = 6.0
    steps: int = 1000
    baseline: bool = False
    bins: int = 64
    delta_bins: int = 24
    snapshot_stride: int = 400
    stride: int = 1

    def validate(self) -> "EnsembleConfig":
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.coupling == "lowrank" and (self.k % 2 != 0 or self.k < 2):
            raise ValueError("K must be even and >= 2")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if min(self.transient_steps, self.recorded_steps, self.steps) < 0:
            raise ValueError("step counts must be >= 0")
        if self.realizations < 1 or self.workers < 1:
            raise ValueError("realizations and workers must be >= 1")
        if self.initial not in ("uniform", "zero"):
            raise ValueError("initial must be uniform or zero")
        if self.coupling not in ("lowrank", "gaussian"):
            raise ValueError("coupling must be lowrank or gaussian")
        if any(j < 0 for j in self.j):
            raise ValueError("J must be >= 0")
        return self

    @property
    def protocol(self) -> Protocol:
        return Protocol(dt=self.dt, transient=self.transient_steps,
                        recorded=self.recorded_steps, stride=self.stride)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volcano",
        description="Simulate and analyze phase oscillators with low-rank "
                    "binary random couplings.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None,
                       help="JSON config file; flags override its values")
        p.add_argument("--N", dest="n", type=int)
        p.add_argument("--K", dest="k", type=int)
        p.add_argument("--J", dest="j", type=float, nargs="+")
        p.add_argument("--dt", type=float)
        p.add_argument("--transient-steps", dest="transient_steps", type=int)
        p.add_argument("--recorded-steps", dest="recorded_steps", type=int)
        p.add_argument("--realizations", type=int)
        p.add_argument("--initial", choices=("uniform", "zero"))
        p.add_argument("--coupling", choices=("lowrank", "gaussian"))
        p.add_argument("--seed", type=int)
        p.add_argument("--outdir", type=str)
        p.add_argument("--workers", type=int)
        if name == "critical":
            p.add_argument("--accuracy", type=float)
            p.add_argument("--max-sims", dest="max_sims", type=int)
            p.add_argument("--j-lo", dest="j_lo", type=float)
            p.add_argument("--j-hi", dest="j_hi", type=float)
        if name in ("oa", "decay"):
            p.add_argument("--steps", type=int)
        if name == "decay":
            p.add_argument("--baseline", action="store_true", default=None)
        if name == "volcano":
            p.add_argument("--bins", type=int)
        if name == "phases":
            p.add_argument("--delta-bins", dest="delta_bins", type=int)
            p.add_argument("--snapshot-stride", dest="snapshot_stride", type=int)
        if name == "simulate":
            p.add_argument("--stride", type=int)
    return parser


def parse_config(argv) -> EnsembleConfig:
    """Build a validated config from flags and an optional JSON file."""
    ns = _build_parser().parse_args(argv)
    values = {"experiment": ns.experiment}
    valid_keys = set(EnsembleConfig.__dataclass_fields__) - {"experiment"}
    if ns.config:
        with open(ns.config) as fh:
            file_values = json.load(fh)
        unknown = set(file_values) - valid_keys
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(file_values)
    for key in valid_keys:
        flag = getattr(ns, key, None)
        if flag is not None:
            values[key] = flag
    if "j" in values and not isinstance(values["j"], list):
        values["j"] = [values["j"]]
    return EnsembleConfig(**values).validate()


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def run(config: EnsembleConfig) -> dict:
    """Dispatch one experiment and write its artifacts plus a manifest."""
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    start = time.monotonic()
    files = _DISPATCH[config.experiment](config, outdir)
    elapsed = time.monotonic() - start

    manifest = {
        "toolkit_version": __version__,
        "config": asdict(config),
        "elapsed_seconds": elapsed,
        "realization_seeds": [[config.seed, r] for r in range(config.realizations)],
        "files": {f.name: _sha256(f) for f in sorted(files)},
    }
    path = outdir / "manifest.json"
    # the manifest hash list must not depend on timing, so keep timing out
    # of the per-file artifacts and only in the manifest itself
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _run_simulate(cfg: EnsembleConfig, outdir: Path):
    spec = SystemSpec(n=cfg.n, k=cfg.k, j=cfg.j[0], seed=[cfg.seed, 0],
                      coupling=cfg.coupling, init=cfg.initial)
    rec = integrate(spec.build(), dt=cfg.dt, transient=cfg.transient_steps,
                    recorded=cfg.recorded_steps, stride=cfg.stride)
    path = outdir / "trajectory.csv"
    rec.to_csv(path)
    spec_path = outdir / "system.json"
    spec_path.write_text(spec.to_json() + "\n")
    return [path, spec_path]


def _run_volcano(cfg: EnsembleConfig, outdir: Path):
    files = []
    for idx, j in enumerate(cfg.j):
        acc, hist = volcano_ensemble(
            cfg.n, cfg.k, j, cfg.realizations, cfg.seed,
            coupling=cfg.coupling, init=cfg.initial, proto=cfg.protocol,
            bins=cfg.bins, workers=cfg.workers)
        tag = f"J{j:g}"
        hist_path = outdir / f"radial_{tag}.csv"
        hist.to_csv(hist_path)
        summary_path = outdir / f"moments_{tag}.json"
        dump_json(volcano_summary(acc), summary_path)
        files += [hist_path, summary_path]
    return files


def _run_critical(cfg: EnsembleConfig, outdir: Path):
    bis = BisectionConfig(
        n=cfg.n, k=cfg.k, j_lo=cfg.j_lo, j_hi=cfg.j_hi, accuracy=cfg.accuracy,
        batch_size=min(100, cfg.max_sims),
        max_realizations=cfg.max_sims, coupling=cfg.coupling, dt=cfg.dt,
        transient=cfg.transient_steps, recorded=cfg.recorded_steps,
        init="zero", seed=cfg.seed, workers=cfg.workers)
    est = estimate_jc(bis)
    json_path = outdir / "critical.json"
    payload = json.loads(est.to_json())
    payload.update({"n": cfg.n, "k": cfg.k, "accuracy": cfg.accuracy,
                    "coupling": cfg.coupling})
    json_path.write_text(json.dumps(payload, sort_keys=True) + "\n")
    log_path = outdir / "decisions.csv"
    est.log_to_csv(log_path)
    return [json_path, log_path]


def _run_oa(cfg: EnsembleConfig, outdir: Path):
    k = cfg.k
    report = oa.spectrum_analytic(k)
    _, analytic, numeric = oa.jacobian_at_origin(cfg.j[0], k)
    spec_path = outdir / "spectrum.json"
    dump_json({
        "k": k,
        "eigenvalues": {
            "plus": {"value": report.plus_value, "multiplicity": report.plus_multiplicity},
            "minus": {"value": report.minus_value, "multiplicity": report.minus_multiplicity},
            "zero": {"multiplicity": report.zero_multiplicity},
        },
        "eigenvector_residual": report.eigenvector_residual,
        "jacobian_leading_eigenvalue": {"analytic": analytic, "numeric": numeric},
        "critical_coupling": oa.critical_coupling_continuum(),
    }, spec_path)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0]))
    a0 = 0.01 * (rng.standard_normal(2**k) + 1j * rng.standard_normal(2**k))
    traj = oa.oa_integrate(a0, cfg.j[0], k, dt=cfg.dt, steps=cfg.steps,
                           stride=cfg.stride)
    traj_path = outdir / "oa_trajectory.csv"
    traj.to_csv(traj_path)
    return [spec_path, traj_path]


def _run_decay(cfg: EnsembleConfig, outdir: Path):
    files = []
    curve = decay_experiment(cfg.n, cfg.k, cfg.j[0], cfg.realizations, cfg.seed,
                             dt=cfg.dt, steps=cfg.steps, coupling=cfg.coupling,
                             workers=cfg.workers)
    path = outdir / "decay.csv"
    curve.to_csv(path)
    files.append(path)
    if cfg.baseline:
        base = decay_experiment(cfg.n, cfg.k, 0.0, cfg.realizations, cfg.seed + 1,
                                dt=cfg.dt, steps=cfg.steps, coupling=cfg.coupling,
                                workers=cfg.workers)
        bpath = outdir / "decay_baseline.csv"
        base.to_csv(bpath)
        files.append(bpath)
    return files


def _run_phases(cfg: EnsembleConfig, outdir: Path):
    density = phases_experiment(
        cfg.n, cfg.k, cfg.j[0], cfg.seed, realizations=cfg.realizations,
        proto=cfg.protocol, snapshot_stride=cfg.snapshot_stride,
        delta_bins=cfg.delta_bins, workers=cfg.workers)
    path = outdir / "phasemap.csv"
    density.to_csv(path)
    return [path]


_DISPATCH = {
    "simulate": _run_simulate,
    "volcano": _run_volcano,
    "critical": _run_critical,
    "oa": _run_oa,
    "decay": _run_decay,
    "phases": _run_phases,
}


def main(argv=None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        manifest = run(config)
    except Exception as exc:  # noqa: BLE001 - report category, nonzero exit
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({"outdir": config.outdir,
                      "files": sorted(manifest["files"])}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
