"""Command-line driver for the constrained-minimization experiments.

Each subcommand reads a JSON configuration (defaults apply when omitted),
runs one experiment and writes CSV tables, a ``key=value`` summary and a
``manifest.json`` into ``--out``.  Artifacts are deterministic: re-running
the same configuration reproduces them byte for byte.

Exit codes: 0 when the run's internal checks pass, 1 when a check fails
(non-convergence, violated bound, wrong prediction), 2 for configuration or
usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .basis import BasisError, RadialSpec, SphereSpec, TorusSpec, to_grid
from .experiments import (
    AnisotropicCase,
    anisotropic_identities,
    gn_ratio_invariance,
    gn_scan,
    interpolation_exponent,
    negative_energy_construction,
    perturbation_study,
    scaling_sweep,
    two_nonlinearity_constant_witness,
    two_nonlinearity_study,
)
from .harmonic import semidefinite_scan
from .minimize import (
    DispersiveEnergyProblem,
    FormMinimumProblem,
    MinimizeOptions,
    NonConvergedError,
    ParameterRegimeError,
    TwoNonlinearityProblem,
    WaveEnergyProblem,
    find_minimizer,
)
from .operators import (
    OperatorError,
    RadialCrossSectionFlow,
    SphereRotation,
    TorusTranslation,
)
from .radial import archetype_catalog, cc_classify, check_vanish_criteria
from .reporting import (
    config_hash,
    write_csv,
    write_manifest,
    write_summary,
)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


def _merge_config(defaults: Mapping, supplied: Optional[Mapping]) -> Dict:
    cfg = json.loads(json.dumps(defaults))  # deep copy via round trip
    if supplied is None:
        return cfg
    unknown = sorted(set(supplied) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    for key, value in supplied.items():
        if isinstance(value, Mapping) and isinstance(cfg.get(key), Mapping):
            sub = dict(cfg[key])
            sub.update(value)
            cfg[key] = sub
        else:
            cfg[key] = value
    return cfg


_WEIGHT_FUNCTIONS: Dict[str, Callable] = {
    "constant": lambda r: np.ones_like(r),
    "quadratic": lambda r: 1.0 + r**2,
    "exponential-fifth": lambda r: np.exp(r / 5.0),
    "linear": lambda r: 1.0 + r,
}


def build_spec(cfg: Mapping):
    kind = cfg.get("type")
    if kind == "torus":
        return TorusSpec(
            n=int(cfg.get("n", 1)),
            period=float(cfg.get("period", 2.0 * math.pi)),
            grid_points=int(cfg.get("grid_points", 64)),
            metric_scale=float(cfg.get("metric_scale", 1.0)),
        )
    if kind == "sphere":
        return SphereSpec.for_degree(
            n=int(cfg.get("n", 2)),
            max_degree=int(cfg.get("max_degree", 8)),
            p_max=int(cfg.get("p_max", 3)),
            metric_scale=float(cfg.get("metric_scale", 1.0)),
        )
    if kind == "radial":
        weight = cfg.get("weight", "constant")
        if weight not in _WEIGHT_FUNCTIONS:
            raise ConfigError(
                f"unknown weight {weight!r}; choose from "
                f"{sorted(_WEIGHT_FUNCTIONS)}"
            )
        return RadialSpec.uniform(
            r_max=float(cfg.get("r_max", 30.0)),
            nodes=int(cfg.get("nodes", 128)),
            weight_fn=_WEIGHT_FUNCTIONS[weight],
            cross_section_volume=float(cfg.get("cross_section_volume", 1.0)),
            dimension=int(cfg.get("dimension", 1)),
        )
    raise ConfigError(f"unknown manifold type: {kind!r}")


def build_killing(spec, cfg: Mapping):
    if isinstance(spec, TorusSpec):
        velocity = tuple(float(v) for v in cfg.get("velocity", [0.0] * spec.n))
        return TorusTranslation(velocity=velocity)
    if isinstance(spec, SphereSpec):
        plane = tuple(int(v) for v in cfg.get("plane", [1, 2]))
        return SphereRotation(speed=float(cfg.get("speed", 0.0)), plane=plane)
    return RadialCrossSectionFlow(speed=float(cfg.get("speed", 0.0)))


def build_problem(cfg: Mapping):
    kind = cfg.get("kind")
    if kind == "energy":
        return DispersiveEnergyProblem(
            power=float(cfg.get("power", 3.0)),
            mass_target=float(cfg.get("mass_target", 1.0)),
            coupling=float(cfg.get("coupling", 1.0)),
        )
    if kind == "wave-energy":
        return WaveEnergyProblem(
            power=float(cfg.get("power", 3.0)),
            mass_target=float(cfg.get("mass_target", 1.0)),
            frequency=float(cfg.get("frequency", 0.0)),
            coupling=float(cfg.get("coupling", 1.0)),
        )
    if kind == "form":
        return FormMinimumProblem(
            form=str(cfg.get("form", "schroedinger")),
            power=float(cfg.get("power", 3.0)),
            power_target=float(cfg.get("power_target", 1.0)),
            frequency=float(cfg.get("frequency", 0.0)),
            mass_param=float(cfg.get("mass_param", 1.0)),
        )
    if kind == "two-nonlinearity":
        return TwoNonlinearityProblem(
            power_main=float(cfg.get("power", 3.0)),
            power_second=float(cfg.get("power_second", 2.0)),
            frequency=float(cfg.get("frequency", 0.0)),
            second_target=float(cfg.get("second_target", 1.0)),
        )
    raise ConfigError(f"unknown problem kind: {kind!r}")


# ---------------------------------------------------------------------------
# Subcommand implementations.  Each returns (exit_code, files_written).
# ---------------------------------------------------------------------------


def run_verify_spectrum(cfg: Dict, out: Path, tag: str) -> Tuple[int, List[Path]]:
    reports = semidefinite_scan(
        sphere_dims=[int(d) for d in cfg["sphere_dims"]],
        max_degree=int(cfg["max_degree"]),
        couplings=[float(c) for c in cfg["couplings"]],
    )
    rows = [
        (
            r.sphere_dim,
            r.degree,
            r.coupling,
            r.min_eig,
            r.predicted_min,
            r.kernel_dim,
            r.semidefinite,
            r.agreement(),
        )
        for r in reports
    ]
    table = out / f"spectrum-scan.{tag}.csv"
    write_csv(
        table,
        ["dim", "degree", "coupling", "min_eig", "predicted_min", "kernel_dim",
         "semidefinite", "agreement"],
        rows,
    )
    worst = max(r.agreement() for r in reports)
    summary = out / f"summary.{tag}.txt"
    write_summary(
        summary,
        {
            "rows": len(rows),
            "worst_agreement": worst,
            "all_match": worst <= 1e-8,
        },
    )
    return (EXIT_OK if worst <= 1e-8 else EXIT_CHECK_FAILED), [table, summary]


def run_minimize(cfg: Dict, out: Path, tag: str) -> Tuple[int, List[Path]]:
    spec = build_spec(cfg["manifold"])
    X = build_killing(spec, cfg["killing"])
    problem = build_problem(cfg["problem"])
    mu = cfg.get("subspace_mu")
    options = MinimizeOptions(
        max_iter=int(cfg["max_iter"]),
        n_random_starts=int(cfg["random_starts"]),
        seed=int(cfg["seed"]),
        threads=int(cfg["threads"]),
        subspace_mu=None if mu is None else float(mu),
    )
    summary_path = out / f"summary.{tag}.txt"
    table = out / f"solution.{tag}.csv"
    try:
        rep = find_minimizer(problem, spec, X, options)
    except (NonConvergedError, ParameterRegimeError, OperatorError, BasisError) as exc:
        write_summary(summary_path, {"converged": False, "error": str(exc)})
        return EXIT_CHECK_FAILED, [summary_path]
    coeffs = rep.field.coeffs
    write_csv(
        table,
        ["index", "re", "im"],
        [(i, float(c.real), float(c.imag)) for i, c in enumerate(coeffs)],
    )
    write_summary(
        summary_path,
        {
            "converged": rep.converged,
            "objective": rep.objective,
            "grad_norm": rep.grad_norm,
            "iterations": rep.iterations,
            "start_label": rep.start_label,
            "classification": rep.classification,
            "multiplier": rep.multiplier,
            "multiplier_imag": rep.multiplier_imag,
            "pde_residual": rep.pde_residual,
            "constraint_value": rep.constraint_value,
            "drift_norm": rep.drift_norm,
            "subspace_gap": "" if rep.subspace_gap is None else rep.subspace_gap,
        },
    )
    return EXIT_OK, [table, summary_path]


def run_scale_experiment(cfg: Dict, out: Path, tag: str) -> Tuple[int, List[Path]]:
    res = scaling_sweep(
        scales=[int(k) for k in cfg["scales"]],
        power=float(cfg["power"]),
        power_target=float(cfg["power_target"]),
        mass_param=float(cfg["mass_param"]),
        frequency=float(cfg["frequency"]),
        velocity=float(cfg["velocity"]),
        base_period=float(cfg["base_period"]),
        points_per_scale=int(cfg["points_per_scale"]),
        seed=int(cfg["seed"]),
    )
    table = out / f"sweep.{tag}.csv"
    write_csv(
        table,
        ["scale", "volume", "reported_bound", "constant_objective",
         "constant_assembled", "minimum", "margin", "classification",
         "pde_residual"],
        [
            (r.scale, r.volume, r.reported_bound, r.constant_objective,
             r.constant_assembled, r.minimum, r.margin, r.classification,
             r.pde_residual)
            for r in res.rows
        ],
    )
    gap = max(abs(r.constant_assembled - r.constant_objective) for r in res.rows)
    min_margin = min(r.margin for r in res.rows)
    nonconstant = all(r.classification != "constant" for r in res.rows)
    ok = (
        gap <= 1e-10
        and min_margin > 1e-8
        and nonconstant
        and abs(res.slope_reported - res.reported_slope_prediction()) <= 1e-3
    )
    summary = out / f"summary.{tag}.txt"
    write_summary(
        summary,
        {
            "slope_reported": res.slope_reported,
            "slope_reported_predicted": res.reported_slope_prediction(),
            "slope_constant": res.slope_constant,
            "slope_constant_predicted": res.constant_slope_prediction(),
            "max_assembly_gap": gap,
            "min_margin": min_margin,
            "all_nonconstant": nonconstant,
            "ok": ok,
        },
    )
    return (EXIT_OK if ok else EXIT_CHECK_FAILED), [table, summary]


def run_perturb(cfg: Dict, out: Path, tag: str) -> Tuple[int, List[Path]]:
    spec = TorusSpec(n=1, period=float(cfg["period"]),
                     grid_points=int(cfg["grid_points"]))
    X = TorusTranslation(velocity=(float(cfg["velocity"]),))
    direction = TorusTranslation(velocity=(float(cfg["direction"]),))
    rep = perturbation_study(
        spec,
        X,
        direction,
        lam=float(cfg["lam"]),
        eps_values=[float(e) for e in cfg["eps_values"]],
        power=float(cfg["power"]),
        power_target=float(cfg["power_target"]),
        seed=int(cfg["seed"]),
        n_fields=int(cfg["n_fields"]),
    )
    table = out / f"bounds.{tag}.csv"
    write_csv(
        table,
        ["field", "eps", "form_difference", "bound", "satisfied"],
        [
            (r.field_label, r.eps, r.form_difference, r.bound, r.satisfied)
            for r in rep.bound_rows
        ],
    )
    diffs = out / f"minimizer-diffs.{tag}.csv"
    write_csv(
        diffs,
        ["eps", "sup_diff"],
        list(zip(rep.eps_values, rep.minimizer_sup_diffs)),
    )
    ok = rep.violations == 0 and rep.diffs_monotone
    summary = out / f"summary.{tag}.txt"
    write_summary(
        summary,
        {
            "bound_rows": len(rep.bound_rows),
            "violations": rep.violations,
            "diffs_monotone": rep.diffs_monotone,
            "ok": ok,
        },
    )
    return (EXIT_OK if ok else EXIT_CHECK_FAILED), [table, diffs, summary]


def run_two_nonlinearity(cfg: Dict, out: Path, tag: str) -> Tuple[int, List[Path]]:
    spec = TorusSpec(n=1, period=float(cfg["period"]),
                     grid_points=int(cfg["grid_points"]))
    X = TorusTranslation(velocity=(float(cfg["velocity"]),))
    p, q = float(cfg["power"]), float(cfg["power_second"])
    theta, residual = two_nonlinearity_constant_witness(
        spec, X, float(cfg["witness_lam"]), p, q
    )
    rows = two_nonlinearity_study(
        spec,
        X,
        lam=float(cfg["lam"]),
        p=p,
        q=q,
        targets=[float(t) for t in cfg["targets"]],
        seed=int(cfg["seed"]),
    )
    table = out / f"two-nonlinearity.{tag}.csv"
    write_csv(
        table,
        ["second_target", "objective", "second_coupling", "pde_residual",
         "classification", "interpolation_slack"],
        [
            (r.second_target, r.objective, r.second_coupling, r.pde_residual,
             r.classification, r.interpolation_slack)
            for r in rows
        ],
    )
    slack_ok = all(r.interpolation_slack >= -1e-12 for r in rows)
    ok = residual <= 1e-12 and slack_ok
    lo, hi = sorted((p, q))
    summary = out / f"summary.{tag}.txt"
    write_summary(
        summary,
        {
            "witness_second_coupling": theta,
            "witness_residual": residual,
            "interpolation_exponent": str(interpolation_exponent(lo, hi)),
            "interpolation_slack_ok": slack_ok,
            "ok": ok,
        },
    )
    return (EXIT_OK if ok else EXIT_CHECK_FAILED), [table, summary]


def run_negative_energy(cfg: Dict, out: Path, tag: str) -> Tuple[int, List[Path]]:
    rows, ok = [], True
    for case in cfg["cases"]:
        rep = negative_energy_construction(
            dim=int(case["dim"]),
            power=float(case["power"]),
            mass=float(case.get("mass", 0.02)),
            width=float(cfg["width"]),
            box=float(cfg["box"]),
            grid_points=int(cfg["grid_points"]),
        )
        for t, e_a, e_n, m_err in zip(
            rep.sample_dilations,
            rep.analytic_energies,
            rep.numeric_energies,
            rep.mass_errors,
        ):
            rows.append((rep.dim, rep.power, rep.mass, t, e_a, e_n, m_err))
        ok = ok and rep.reached_negative and max(rep.mass_errors) <= 1e-10
    table = out / f"negative-energy.{tag}.csv"
    write_csv(
        table,
        ["dim", "power", "mass", "dilation", "analytic_energy",
         "numeric_energy", "mass_error"],
        rows,
    )
    summary = out / f"summary.{tag}.txt"
    write_summary(summary, {"cases": len(cfg["cases"]), "ok": ok})
    return (EXIT_OK if ok else EXIT_CHECK_FAILED), [table, summary]


def run_cc_diagnose(cfg: Dict, out: Path, tag: str) -> Tuple[int, List[Path]]:
    spec = build_spec(
        {
            "type": "radial",
            "r_max": cfg["r_max"],
            "nodes": cfg["nodes"],
            "weight": cfg["weight"],
            "dimension": cfg["dimension"],
        }
    )
    adm = check_vanish_criteria(spec)
    catalog = archetype_catalog(
        spec,
        per_class=int(cfg["per_class"]),
        n_elements=int(cfg["n_elements"]),
        seed=int(cfg["seed"]),
    )
    rows = []
    correct = 0
    for expected, label, seq in catalog:
        verdict = cc_classify(spec, seq).verdict
        good = verdict == expected
        correct += good
        rows.append((label, expected, verdict, good))
    table = out / f"verdicts.{tag}.csv"
    write_csv(table, ["label", "expected", "verdict", "correct"], rows)
    accuracy = correct / len(catalog)
    ok = accuracy == 1.0 and adm.admissible
    summary = out / f"summary.{tag}.txt"
    write_summary(
        summary,
        {
            "sequences": len(catalog),
            "accuracy": accuracy,
            "weight_admissible": adm.admissible,
            "escape_integrable": adm.escape_integrable,
            "doubling_ratio": adm.doubling_ratio,
            "ok": ok,
        },
    )
    return (EXIT_OK if ok else EXIT_CHECK_FAILED), [table, summary]


def run_gn_scan(cfg: Dict, out: Path, tag: str) -> Tuple[int, List[Path]]:
    rows = gn_scan(
        dims=[int(d) for d in cfg["dims"]],
        powers=[Fraction(str(p)) for p in cfg["powers"]],
    )
    table = out / f"gn-scan.{tag}.csv"
    write_csv(
        table,
        ["dim", "power", "gamma", "gamma_float", "subcritical", "equivalent"],
        [
            (r.dim, str(r.power), str(r.gamma), r.gamma_float, r.subcritical,
             r.inequality_equivalent)
            for r in rows
        ],
    )
    deviations = []
    for case in cfg["invariance_cases"]:
        deviations.append(
            gn_ratio_invariance(
                dim=int(case["dim"]),
                power=float(case["power"]),
                dilations=[float(t) for t in case.get("dilations", [1.0, 2.0, 4.0])],
                period=float(case.get("period", 40.0)),
                grid_points=int(case.get("grid_points", 512)),
            )
        )
    worst = max(deviations) if deviations else 0.0
    ok = all(r.inequality_equivalent for r in rows) and worst <= 1e-10
    summary = out / f"summary.{tag}.txt"
    write_summary(
        summary,
        {
            "rows": len(rows),
            "all_equivalent": all(r.inequality_equivalent for r in rows),
            "worst_invariance_deviation": worst,
            "ok": ok,
        },
    )
    return (EXIT_OK if ok else EXIT_CHECK_FAILED), [table, summary]


def run_scaling_identities(cfg: Dict, out: Path, tag: str) -> Tuple[int, List[Path]]:
    cases = [AnisotropicCase(*[int(v) for v in c]) for c in cfg["cases"]]
    fine = anisotropic_identities(
        cases, grid_points=int(cfg["grid_points"]),
        width_fraction=float(cfg["width_fraction"]),
    )
    coarse = anisotropic_identities(
        cases, grid_points=int(cfg["coarse_points"]),
        width_fraction=float(cfg["width_fraction"]),
    )
    rows = []
    for case, err in zip(fine.cases, fine.errors):
        for law, value in err.items():
            rows.append((case.ratio, case.sigma, case.a, case.b, law, value))
    table = out / f"identity-errors.{tag}.csv"
    write_csv(table, ["ratio", "sigma", "a", "b", "law", "relative_error"], rows)
    ratio = coarse.worst_error / max(fine.worst_error, 1e-300)
    ok = fine.worst_error <= 1e-6 and ratio >= 4.0
    summary = out / f"summary.{tag}.txt"
    write_summary(
        summary,
        {
            "worst_error_fine": fine.worst_error,
            "worst_error_coarse": coarse.worst_error,
            "refinement_gain": ratio,
            "mass_invariance_error": fine.mass_invariance_error,
            "gradient_law_error": fine.gradient_law_error,
            "ok": ok,
        },
    )
    return (EXIT_OK if ok else EXIT_CHECK_FAILED), [table, summary]


# ---------------------------------------------------------------------------
# Dispatch table with per-command defaults
# ---------------------------------------------------------------------------

_COMMANDS: Dict[str, Tuple[Callable, Dict]] = {
    "verify-spectrum": (
        run_verify_spectrum,
        {"sphere_dims": [2, 3], "max_degree": 6,
         "couplings": [0.0, 0.5, 1.0, 2.0]},
    ),
    "minimize": (
        run_minimize,
        {
            "manifold": {"type": "torus", "n": 1,
                         "period": 2.0 * math.pi, "grid_points": 64},
            "killing": {"velocity": [0.3]},
            "problem": {"kind": "form", "form": "schroedinger", "power": 3.0,
                        "power_target": 1.0, "frequency": 5.0},
            "subspace_mu": None,
            "max_iter": 10000,
            "random_starts": 3,
            "seed": 0,
            "threads": 1,
        },
    ),
    "scale-experiment": (
        run_scale_experiment,
        {"scales": [1, 2, 4, 8, 16, 32, 64], "power": 3.0, "power_target": 1.0,
         "mass_param": 1.0, "frequency": 0.0, "velocity": 0.3,
         "base_period": 2.0 * math.pi, "points_per_scale": 32, "seed": 0},
    ),
    "perturb": (
        run_perturb,
        {"period": 2.0 * math.pi, "grid_points": 64, "velocity": 0.3,
         "direction": 1.0, "lam": 5.0, "eps_values": [1e-1, 1e-2, 1e-3],
         "power": 3.0, "power_target": 1.0, "n_fields": 4, "seed": 0},
    ),
    "two-nonlinearity": (
        run_two_nonlinearity,
        {"period": 2.0 * math.pi, "grid_points": 64, "velocity": 0.3,
         "lam": 2.0, "witness_lam": 2.0, "power": 3.0, "power_second": 2.0,
         "targets": [0.25, 0.5, 1.0], "seed": 0},
    ),
    "negative-energy": (
        run_negative_energy,
        {"cases": [{"dim": 1, "power": 2.0, "mass": 0.02},
                   {"dim": 2, "power": 2.0, "mass": 1.0}],
         "width": 2.0, "box": 128.0, "grid_points": 256},
    ),
    "cc-diagnose": (
        run_cc_diagnose,
        {"r_max": 40.0, "nodes": 256, "weight": "quadratic", "dimension": 3,
         "per_class": 10, "n_elements": 6, "seed": 0},
    ),
    "gn-scan": (
        run_gn_scan,
        {"dims": [1, 2, 3, 4], "powers": ["3/2", "2", "7/3", "3", "4", "5"],
         "invariance_cases": [
             {"dim": 1, "power": 3.0, "grid_points": 512,
              "dilations": [1.0, 2.0, 4.0], "period": 40.0},
             {"dim": 2, "power": 2.0, "grid_points": 256,
              "dilations": [1.0, 1.5, 2.0], "period": 40.0},
         ]},
    ),
    "scaling-identities": (
        run_scaling_identities,
        {"grid_points": 1024, "coarse_points": 512,
         "width_fraction": 1.0 / 32.0,
         "cases": [[2, 1, 4, 2], [4, 1, 2, 1], [8, 1, 1, 1]]},
    ),
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="travwave",
        description="constrained travelling-wave minimization experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", type=Path, default=None,
                         help="JSON configuration file")
        cmd.add_argument("--out", type=Path, required=True,
                         help="output directory for artifacts")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the configured random seed")
        cmd.add_argument("--threads", type=int, default=None,
                         help="override the configured worker count")
    args = parser.parse_args(argv)

    handler, defaults = _COMMANDS[args.command]
    try:
        supplied = None
        if args.config is not None:
            try:
                supplied = json.loads(Path(args.config).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
            if not isinstance(supplied, dict):
                raise ConfigError("config must be a JSON object")
        cfg = _merge_config(defaults, supplied)
        # flag overrides apply only where the command has the matching knob
        if args.seed is not None and "seed" in cfg:
            cfg["seed"] = args.seed
        if args.threads is not None and "threads" in cfg:
            cfg["threads"] = args.threads
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tag = config_hash(cfg)
    try:
        code, files = handler(cfg, out, tag)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    write_manifest(out, args.command, cfg, files)
    return code


if __name__ == "__main__":
    sys.exit(main())
