"""Command-line runner: ``holodot run|validate|verify-all``.

Exit status is 0 when every check passes, 2 for configuration problems and
3 for numerical failures or failing checks. The output directory comes from
the config's ``output_path`` unless ``HOLODOT_OUTPUT_DIR`` is set.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import ExperimentConfig, load_config
from .errors import ConfigurationError, HolodotError, NumericalError
from .holonomy import compose_loops, phase_distance, single_qubit_gate
from .model import LambdaParams, PulseEnvelope, TwoQubitParams, pauli_vector_matrix
from .noise import (
    NoiseSpec,
    entangler_protocol,
    fidelity_curve,
    fidelity_surface,
    gate_fidelity,
    hadamard_protocol,
    pi8_protocol,
    single_qubit_protocol,
)
from .propagate import IntegratorConfig
from .twoqubit import (
    analytic_gate,
    assemble_gate,
    integrate_protocol,
    solve_for_entangling_power,
    solve_schedule,
    sweep_concurrence,
)
from .verification import Check, at_least, below, flag, run_all

OUTPUT_ENV = "HOLODOT_OUTPUT_DIR"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _integrator(s) -> IntegratorConfig:
    return IntegratorConfig(tolerance=s.tolerance, max_steps=s.max_steps, scheme=s.scheme)


def _envelope(e) -> PulseEnvelope:
    return PulseEnvelope.with_area(e.shape, e.area, e.duration, sigma_frac=e.sigma_frac)


def _noise(n) -> NoiseSpec:
    return NoiseSpec.from_mask(n.gamma, n.mask, n.channel)


# --- experiments ---------------------------------------------------------------
# each returns (checks, written files)

def _single_gate(p, out: Path, seed: int):
    env, cfg = _envelope(p.envelope), _integrator(p.integrator)
    loop = LambdaParams(p.theta, p.phi)
    ev, rep = single_qubit_gate(loop, env, cfg, p.n_grid, p.cyclicity_threshold)
    checks = [
        below("single-gate target distance", rep.target_distance, 1e-7),
        below("single-gate cyclicity defect", rep.cyclicity_defect, p.cyclicity_threshold),
        below("single-gate dynamical phase", rep.dyn_phase_norm, 1e-12),
    ]
    payload = {"theta": p.theta, "phi": p.phi, "axis": list(loop.axis()),
               "holonomy": rep.holonomy, "target": pauli_vector_matrix(loop.axis()),
               "target_distance": rep.target_distance,
               "cyclicity_defect": rep.cyclicity_defect, "dyn_phase_norm": rep.dyn_phase_norm}
    if p.noise is not None:
        f = gate_fidelity(single_qubit_protocol([loop], env), _noise(p.noise), cfg)
        payload["fidelity"] = f
        payload["noise"] = p.noise.model_dump()
    return checks, [io.write_json(out / "gate.json", payload)]


def _compose(p, out: Path, seed: int):
    env, cfg = _envelope(p.envelope), _integrator(p.integrator)
    loops = [LambdaParams(l.theta, l.phi) for l in p.loops]
    numeric = np.eye(2, dtype=complex)
    for loop in loops:
        _, rep = single_qubit_gate(loop, env, cfg)
        numeric = rep.holonomy @ numeric
    closed = compose_loops(loops)
    dist = phase_distance(numeric, closed)
    payload = {"loops": [l.model_dump() for l in p.loops], "holonomy": numeric,
               "composed": closed, "distance": dist}
    if p.noise is not None:
        payload["fidelity"] = gate_fidelity(single_qubit_protocol(loops, env),
                                            _noise(p.noise), cfg)
        payload["noise"] = p.noise.model_dump()
    return [below("composed gate vs product of loops", dist, 1e-7)], \
        [io.write_json(out / "gate.json", payload)]


def _two_qubit(p, out: Path, seed: int):
    q = TwoQubitParams(alpha=p.alpha, delta=p.delta, amp1=p.amp1, amp2=p.amp2,
                       n1=p.n1, n2=p.n2, gap=p.gap)
    if p.target_concurrence is not None:
        q = solve_for_entangling_power(p.target_concurrence, q, free=p.free)
    s = solve_schedule(q)
    rep = assemble_gate(s)
    numeric = integrate_protocol(s, _integrator(p.integrator))
    analytic = analytic_gate(s)
    sin2 = abs(math.sin(2 * s.varphi_rot))
    checks = [
        below("two-qubit off-block mass", rep.off_block, 1e-9),
        below("two-qubit assembled vs analytic", np.max(np.abs(rep.unitary - analytic)), 1e-9),
        below("two-qubit integrated vs assembled", np.max(np.abs(numeric - rep.unitary)), 1e-8),
        below("two-qubit concurrence vs |sin 2 phi|", abs(rep.concurrence - sin2), 1e-8),
    ]
    payload = {"params": {k: getattr(q, k) for k in
                          ("alpha", "delta", "amp1", "amp2", "n1", "n2", "gap")},
               "tau1": s.tau1, "tau2_start": s.tau2_start, "tau2_end": s.tau2_end,
               "omega": s.omega, "omega_t": s.omega_t, "varphi_rot": s.varphi_rot,
               "concurrence": rep.concurrence, "unitary": rep.unitary,
               "block_plus": rep.block_plus, "block_minus": rep.block_minus}
    if p.noise is not None:
        payload["fidelity"] = gate_fidelity(entangler_protocol(s), _noise(p.noise),
                                            _integrator(p.integrator))
        payload["noise"] = p.noise.model_dump()
    return checks, [io.write_json(out / "gate.json", payload)]


def _sweep(p, out: Path, seed: int):
    rows, cross = sweep_concurrence(p.phi_ratio, p.alpha_ratio, p.points, p.crosscheck,
                                    np.random.default_rng(seed))
    checks = []
    if cross:
        worst = max(abs(f - d) for _, _, f, d in cross)
        checks.append(below("sweep formula vs decomposition", worst, 1e-8,
                            f"{len(cross)} points"))
    diagonal = np.isclose(rows[:, 0], 1.0, rtol=0, atol=1e-12)
    if diagonal.any():
        checks.append(below("sweep C on phi_ratio = 1", np.max(rows[diagonal, 2]), 1e-15))
    written = [io.write_csv(out / "concurrence.csv", io.SWEEP_HEADER, rows)]
    meta = {"columns": list(io.SWEEP_HEADER), "phi_ratio": list(p.phi_ratio),
            "alpha_ratio": list(p.alpha_ratio), "points": list(p.points),
            "conventions": "amp2 = delta = 1; phi_ratio = amp1/amp2; "
                           "alpha_ratio = alpha/(amp2 delta); C = |sin 2 phi|",
            "bounds_note": "grid bounds are a reproduction choice",
            "max_concurrence": float(rows[:, 2].max()), "crosscheck_points": len(cross),
            "seed": seed}
    written.append(io.write_json(out / "concurrence.json", meta))
    return checks, written


def _fidelity(p, out: Path, seed: int):
    cfg = _integrator(p.integrator)
    ratios = np.logspace(math.log10(p.ratios.start), math.log10(p.ratios.stop), p.ratios.num)
    checks, written = [], []
    for mask in p.masks:
        template = NoiseSpec.from_mask(0.0, mask, p.channel)
        stem = f"fidelity_{p.gate}_{mask}"
        if p.gate == "entangler":
            rows = fidelity_surface(p.tau_ratios, ratios, template, p.varphi, cfg)
            written.append(io.write_csv(out / f"{stem}.csv", io.SURFACE_HEADER, rows))
            for r in p.tau_ratios:
                f = rows[rows[:, 0] == r][:, 2]
                checks.append(flag(f"{stem} non-decreasing in 1/(gamma tau) at tau_ratio={r:g}",
                                   bool(np.all(np.diff(f) >= -1e-12))))
            meta = {"gate": "entangler R(varphi)+R(-varphi)", "varphi": p.varphi,
                    "columns": list(io.SURFACE_HEADER), "ensemble": "axial-36"}
        else:
            protocol = (hadamard_protocol if p.gate == "hadamard" else pi8_protocol)(
                _envelope(p.envelope))
            curve = fidelity_curve(protocol, template, ratios, cfg)
            written.append(io.write_csv(out / f"{stem}.csv", io.CURVE_HEADER, curve.points))
            checks.append(flag(f"{stem} monotone in gamma", curve.is_monotone()))
            top_ratio, top_f = curve.points[-1]
            if top_ratio >= 1e4:
                checks.append(below(f"{stem} 1 - F at ratio {top_ratio:g}", 1 - top_f, 1e-3))
            meta = dict(curve.metadata, columns=list(io.CURVE_HEADER))
        meta.update(mask=mask, channel=p.channel)
        written.append(io.write_json(out / f"{stem}.json", meta))
    return checks, written


def _verify(p, out: Path, seed: int):
    return run_all(p.tolerance, seed, log=print), []


EXPERIMENT_RUNNERS = {
    "single-gate": _single_gate,
    "compose": _compose,
    "two-qubit": _two_qubit,
    "concurrence-sweep": _sweep,
    "fidelity-curve": _fidelity,
    "verify-all": _verify,
}


def output_dir(cfg: ExperimentConfig) -> Path:
    return Path(os.environ.get(OUTPUT_ENV) or cfg.output_path)


def run_experiment(cfg: ExperimentConfig) -> tuple[int, list[Check]]:
    """Execute ``cfg``, write its artifacts and ``report.json``; return (status, checks)."""
    out = output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    try:
        checks, written = EXPERIMENT_RUNNERS[cfg.experiment](cfg.parameters, out, cfg.seed)
        error = None
    except ConfigurationError:
        raise
    except NumericalError as exc:
        checks, written = [], []
        error = f"{type(exc).__name__}: {exc}"
        checks.append(Check(cfg.experiment, getattr(exc, "defect", float("nan")),
                            float("nan"), False, "raised", error))
    passed = all(c.passed for c in checks)
    report = {"experiment": cfg.experiment, "config": cfg.normalized(),
              "checks": [c.as_dict() for c in checks], "passed": passed,
              "outputs": sorted(Path(w).name for w in written), "error": error}
    io.write_json(out / "report.json", report)
    return (EXIT_OK if passed else EXIT_NUMERICAL), checks


# --- argument handling ---------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="holodot", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiment described by a config file")
    r.add_argument("config")
    v = sub.add_parser("validate", help="check a config and print it with defaults filled")
    v.add_argument("config")
    a = sub.add_parser("verify-all", help="run every acceptance and invariant check")
    a.add_argument("--tolerance", type=float, default=1e-10)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--output", default="results", help="report directory")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "verify-all":
            if not (args.tolerance > 0 and math.isfinite(args.tolerance)):
                raise ConfigurationError("--tolerance must be a positive finite number")
            cfg = ExperimentConfig(experiment="verify-all", output_path=args.output,
                                   seed=args.seed)
            from .config import VerifyParams
            cfg = cfg.model_copy(update={"parameters": VerifyParams(tolerance=args.tolerance)})
        else:
            cfg = load_config(args.config)
        if args.command == "validate":
            print(json.dumps(cfg.normalized(), indent=2, sort_keys=True))
            return EXIT_OK
        status, checks = run_experiment(cfg)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HolodotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    failed = [c for c in checks if not c.passed]
    if cfg.experiment != "verify-all":
        for c in checks:
            print(c.line())
    for c in failed:
        print(f"failed: {c.name} {c.detail}".rstrip(), file=sys.stderr)
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed; "
          f"report in {output_dir(cfg) / 'report.json'}")
    return status


if __name__ == "__main__":
    sys.exit(main())
