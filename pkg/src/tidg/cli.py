"""Command-line front end: single solves, parameter sweeps, verification.

Configuration comes from a JSON file with a versioned ``schema`` key;
command-line flags override file values.  All output files are written
atomically (temp file + rename) and numbers use shortest round-trip
formatting, so repeated serial runs of the same sweep are byte-identical.
"""

import argparse
import json
import math
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__, bench
from .analysis import fmt_float
from .assembly import StabilizationParams
from .errors import (ConfigError, InvalidStabilizationError,
                     StabilityViolationError, TidgError)
from .material import EngineeringConstants, stability_check

SCHEMA_VERSION = 1

_COMMON_KEYS = {"schema", "benchmark", "nu", "q", "stab", "tol", "out",
                "serial"}
_SOLVE_KEYS = _COMMON_KEYS | {"method", "underintegrate", "p", "angle",
                              "refine", "field_dump"}
_SWEEP_KEYS = _COMMON_KEYS | {"methods", "p_values", "angles", "levels", "n"}

_STAB_KEYS = {"k_mu", "k_lambda", "k_alpha", "k_beta", "k_gamma"}

_DEFAULTS = {
    "benchmark": "beam",
    "nu": 0.49995,
    "q": 1.0,
    "out": "tidg-out",
    "serial": True,
    "underintegrate": False,
    "field_dump": False,
}


def _tol_kwargs(cfg):
    """Explicit tolerance override, else the benchmark driver's default."""
    return {"tol": float(cfg["tol"])} if "tol" in cfg else {}


def _load_config(path, allowed):
    if path is None:
        cfg = {"schema": SCHEMA_VERSION}
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as err:
            raise ConfigError(f"cannot read config {path}: {err}") from err
        except json.JSONDecodeError as err:
            raise ConfigError(f"config {path} is not valid JSON: {err}") from err
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    if cfg.get("schema") != SCHEMA_VERSION:
        raise ConfigError(
            f"config schema must be {SCHEMA_VERSION}, got {cfg.get('schema')!r}")
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "stab" in cfg:
        bad = set(cfg["stab"]) - _STAB_KEYS
        if bad:
            raise ConfigError(f"unknown stabilization keys: {sorted(bad)}")
    return cfg


def _merge_flags(cfg, args, names):
    for name in names:
        value = getattr(args, name, None)
        if value is not None:
            cfg[name] = value
    return cfg


def _stab_from(cfg):
    try:
        return StabilizationParams(**cfg.get("stab", {}))
    except (TypeError, InvalidStabilizationError) as err:
        raise ConfigError(f"bad stabilization block: {err}") from err


def _method_label(cfg):
    method = cfg.get("method")
    if method is None:
        raise ConfigError("solve needs a method")
    label = str(method)
    if cfg.get("underintegrate") and not label.endswith("_UI"):
        label += "_UI"
    base = label[:-3] if label.endswith("_UI") else label
    if base not in ("CG1", "CG2", "NIPG", "SIPG", "IIPG"):
        raise ConfigError(f"unknown method {method!r}")
    if label.endswith("_UI") and base.startswith("CG"):
        raise ConfigError("under-integration applies to the DG methods only")
    return label


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_csv(path, write_fn):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    os.close(fd)
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _check_stability(cfg, p):
    ec = EngineeringConstants(E_t=1.0, p=p, q=cfg["q"], nu_t=cfg["nu"],
                              nu_l=cfg["nu"])
    report = stability_check(ec)
    if not report.ok:
        raise StabilityViolationError(
            f"material p={p}, q={cfg['q']}, nu={cfg['nu']} fails the "
            f"pointwise stability conditions")


def cmd_solve(cfg):
    label = _method_label(cfg)
    stab = _stab_from(cfg)
    benchmark = cfg["benchmark"]
    p = float(cfg.get("p", 1.0))
    angle = float(cfg.get("angle", 0.0))
    refine = int(cfg.get("refine", 0))
    started = time.perf_counter()
    _check_stability(cfg, p)

    tol = _tol_kwargs(cfg)
    if benchmark == "beam":
        bc = bench.BeamConfig(p_values=(p,), angles=(angle,), methods=(label,),
                              levels=(refine,), nu=cfg["nu"], q=cfg["q"],
                              stab=stab, **tol)
        results = bench.run_beam(bc)
        record = results.records[0]
    elif benchmark == "cook":
        n = refine if refine > 0 else 32
        cc = bench.CookConfig(p_values=(p,), angles=(angle,), methods=(label,),
                              n=n, nu=cfg["nu"], q=cfg["q"], stab=stab, **tol)
        record = bench.run_cook(cc)[0]
    elif benchmark == "patch":
        record = bench.run_patch(methods=(label,), levels=(refine,), p=p,
                                 angle=angle, nu=cfg["nu"], q=cfg["q"],
                                 stab=stab, **tol)[0]
    else:
        raise ConfigError(f"unknown benchmark {benchmark!r}")

    outdir = cfg["out"]
    summary = {
        "schema": SCHEMA_VERSION,
        "version": __version__,
        "config": _echo_config(cfg, _SOLVE_KEYS),
        "record": _record_dict(record),
        "elapsed_s": time.perf_counter() - started,
    }
    outputs = [os.path.join(outdir, "solution.json")]
    if cfg["field_dump"]:
        case_kwargs = {"level": refine}
        if benchmark == "cook":
            case_kwargs = {"n": refine if refine > 0 else 32}
        mesh, params, fiber, loads = bench.benchmark_case(
            benchmark, p=p, angle=angle, nu=cfg["nu"], q=cfg["q"],
            **case_kwargs)
        fld = bench.solve_case(mesh, params, fiber, label, stab, loads,
                               **(_tol_kwargs(cfg) or {"tol": 1e-6}))
        lines = ["dof,value"]
        lines += [f"{i},{fmt_float(v)}" for i, v in enumerate(fld.coeffs)]
        field_path = os.path.join(outdir, "field.csv")
        _atomic_write(field_path, "\n".join(lines) + "\n")
        outputs.append(field_path)
        summary["outputs"] = [os.path.basename(p) for p in outputs]
    _atomic_write(outputs[0], json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(outputs[0])
    return 0


def _record_dict(record):
    out = {}
    for key in ("benchmark", "method", "p", "angle", "nu", "level", "h",
                "ndof", "tip_uy", "dg_err", "h1_rel_err", "l2_err", "status"):
        value = getattr(record, key)
        if isinstance(value, float) and math.isnan(value):
            value = None
        out[key] = value
    return out


def _echo_config(cfg, allowed):
    echo = {key: cfg[key] for key in sorted(cfg) if key in allowed}
    echo["schema"] = SCHEMA_VERSION
    return echo


def cmd_sweep(cfg):
    stab = _stab_from(cfg)
    benchmark = cfg["benchmark"]
    started = time.perf_counter()
    tol = _tol_kwargs(cfg)

    def grid(key, default):
        values = tuple(cfg.get(key, default))
        if not values:
            raise ConfigError(f"sweep grid is empty: {key} has no entries")
        return values

    if benchmark == "beam":
        bc = bench.BeamConfig(
            p_values=grid("p_values", bench.BeamConfig.p_values),
            angles=grid("angles", bench.BeamConfig.angles),
            methods=grid("methods", bench.BeamConfig.methods),
            levels=grid("levels", bench.BeamConfig.levels),
            nu=cfg["nu"], q=cfg["q"], stab=stab, **tol)
        records = bench.run_beam(bc).records
    elif benchmark == "cook":
        cc = bench.CookConfig(
            p_values=grid("p_values", bench.CookConfig.p_values),
            angles=grid("angles", bench.CookConfig.angles),
            methods=grid("methods", bench.CookConfig.methods),
            n=int(cfg.get("n", 32)),
            nu=cfg["nu"], q=cfg["q"], stab=stab, **tol)
        records = bench.run_cook(cc)
    elif benchmark == "patch":
        records = bench.run_patch(
            methods=grid("methods", ("CG1", "CG2", "NIPG", "SIPG", "IIPG")),
            levels=grid("levels", (0, 1)),
            nu=cfg["nu"], q=cfg["q"], stab=stab, **tol)
    else:
        raise ConfigError(f"unknown benchmark {benchmark!r}")

    outdir = cfg["out"]
    csv_path = os.path.join(outdir, f"{benchmark}_records.csv")
    _atomic_csv(csv_path, lambda tmp: bench.write_records_csv(records, tmp))
    manifest = {
        "schema": SCHEMA_VERSION,
        "version": __version__,
        "config": _echo_config(cfg, _SWEEP_KEYS),
        "outputs": [os.path.basename(csv_path)],
        "record_count": len(records),
        "failures": sum(1 for r in records if r.status != "ok"),
        "elapsed_s": time.perf_counter() - started,
    }
    _atomic_write(os.path.join(outdir, "manifest.json"),
                  json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(csv_path)
    return 0


def cmd_verify():
    """Run the built-in property suite on small meshes; 0 iff all pass."""
    from .analysis import (AnalyticField, broken_h1_error,
                           interpolant_properties_check, linear_field)
    from .assembly import (DEFAULT_STABILIZATION, InvalidStabilizationError,
                           LoadSpec, MethodConfig, assemble_dg,
                           numeric_coercivity)
    from .femspace import FunctionSpace
    from .material import (FiberDirection, MaterialParams,
                           derive_params_special)
    from .mesh import classify_edges, rect_mesh
    from .solver import solve
    from ._isodg import assemble_isotropic_ipdg

    checks = []

    def record(name, fn):
        try:
            ok, detail = fn()
        except Exception as err:  # surface, don't abort the table
            ok, detail = False, f"{type(err).__name__}: {err}"
        checks.append((name, ok, detail))

    mesh = classify_edges(rect_mesh(1.0, 1.0, 2, 2), dirichlet=lambda x: True)
    exact = linear_field(np.array([[0.1, 0.2], [0.3, -0.1]]),
                         np.array([0.01, -0.02]))
    params = derive_params_special(1.0, 3.0, 0.3)
    fiber = FiberDirection(math.pi / 5.0)
    loads = LoadSpec(dirichlet=exact.value)

    def patch_all():
        worst = 0.0
        for label in ("CG1", "CG2", "NIPG", "SIPG", "IIPG",
                      "NIPG_UI", "SIPG_UI", "IIPG_UI"):
            fld = bench.solve_case(mesh, params, fiber, label,
                                   DEFAULT_STABILIZATION, loads)
            worst = max(worst, broken_h1_error(fld, exact).full)
        return worst <= 1e-9, f"max error {worst:.2e}"

    record("affine reproduction, all methods", patch_all)

    def iso_equiv():
        iso = derive_params_special(1.0, 1.0, 0.3)
        space = FunctionSpace(mesh, "DG1")
        worst = 0.0
        for method in ("NIPG", "SIPG", "IIPG"):
            config = MethodConfig(method=method)
            A = assemble_dg(space, iso, fiber, config, loads=None).matrix
            B = assemble_isotropic_ipdg(
                space, iso.lam, iso.mu_t, config.theta,
                config.stab.k_lambda, config.stab.k_mu)
            scale = max(abs(A).max(), 1e-300)
            worst = max(worst, abs(A - B).max() / scale)
        return worst <= 1e-13, f"max relative entry difference {worst:.2e}"

    record("isotropic-limit equivalence", iso_equiv)

    def ui_beta_zero():
        mat = MaterialParams(lam=1.0, mu_t=1.0, mu_l=1.5, alpha=0.3,
                             beta=0.0, gamma=1.0)
        space = FunctionSpace(mesh, "DG1")
        full = assemble_dg(space, mat, fiber,
                           MethodConfig("NIPG"), None).matrix
        ui = assemble_dg(space, mat, fiber,
                         MethodConfig("NIPG", under_integrate_beta=True),
                         None).matrix
        diff = abs(full - ui).max() / max(abs(full).max(), 1e-300)
        return diff <= 1e-13, f"relative difference {diff:.2e}"

    record("under-integration inert at beta=0", ui_beta_zero)

    def coercive():
        iso = derive_params_special(1.0, 1.0, 0.3)
        space = FunctionSpace(classify_edges(rect_mesh(1.0, 1.0, 4, 4),
                                             dirichlet=lambda x: True), "DG1")
        config = MethodConfig("NIPG", stab=StabilizationParams.uniform(10.0))
        K = numeric_coercivity(space, iso, fiber, config)
        return K > 0.0, f"estimate {K:.3e}"

    record("spectral coercivity, NIPG", coercive)

    def interp_props():
        def value(pts):
            x, y = pts[..., 0], pts[..., 1]
            return np.stack([x * x + 0.5 * x * y, y * y - x * y], axis=-1)

        def grad(pts):
            x, y = pts[..., 0], pts[..., 1]
            g = np.empty(pts.shape[:-1] + (2, 2))
            g[..., 0, 0] = 2 * x + 0.5 * y
            g[..., 0, 1] = 0.5 * x
            g[..., 1, 0] = -y
            g[..., 1, 1] = 2 * y - x
            return g

        quad = AnalyticField(value, grad)
        report = interpolant_properties_check(
            quad, rect_mesh(1.0, 1.0, 4, 4), fiber)
        worst = max(report.edge_mean, report.edge_mean_normal,
                    report.volume_divergence, report.volume_fiber_strain)
        return report.ok, f"max residual {worst:.2e}"

    record("edge-average interpolant identities", interp_props)

    def bad_stab():
        try:
            StabilizationParams(k_beta=-1.0)
        except InvalidStabilizationError:
            return True, "negative parameter rejected"
        return False, "negative parameter was accepted"

    record("stabilization validation", bad_stab)

    width = max(len(name) for name, _, _ in checks)
    all_ok = True
    for name, ok, detail in checks:
        flag = "PASS" if ok else "FAIL"
        all_ok &= ok
        print(f"{flag}  {name:<{width}}  {detail}")
    return 0 if all_ok else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tidg",
        description="Plane-strain FEM benchmarks for fibre-reinforced "
                    "elasticity (conforming and interior-penalty methods).",
        epilog="Defaults: nu = 0.49995 (near-incompressible), q = 1, "
               "stabilization k_mu = k_alpha = k_gamma = 10 and "
               "k_lambda = k_beta = 100 (override via the config file's "
               "'stab' block), solver tolerance per benchmark driver.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file (schema 1)")
        p.add_argument("--nu", type=float, help="Poisson ratio "
                       "(default 0.49995, near-incompressible)")
        p.add_argument("--tol", type=float, help="solver residual tolerance")
        p.add_argument("--out", help="output directory")
        p.add_argument("--serial", action="store_const", const=True,
                       help="force serial execution (runs are serial and "
                       "deterministic in this build; flag kept for config "
                       "compatibility)")

    ps = sub.add_parser("solve", help="run one benchmark cell")
    add_common(ps)
    ps.add_argument("--method", help="CG1, CG2, NIPG, SIPG or IIPG")
    ps.add_argument("--p", type=float, help="fibre/transverse stiffness ratio")
    ps.add_argument("--angle", type=float, help="fibre angle in radians")
    ps.add_argument("--refine", type=int,
                    help="refinement level (beam/patch) or grid count (cook)")
    ps.add_argument("--underintegrate", action="store_const", const=True,
                    help="under-integrate the extensional jump penalty")

    pw = sub.add_parser("sweep", help="run a full parameter sweep")
    add_common(pw)

    sub.add_parser("verify", help="run the built-in property suite")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify()
        allowed = _SOLVE_KEYS if args.command == "solve" else _SWEEP_KEYS
        cfg = _load_config(args.config, allowed)
        flag_names = ["nu", "tol", "out", "serial"]
        if args.command == "solve":
            flag_names += ["method", "p", "angle", "refine", "underintegrate"]
        cfg = _merge_flags(cfg, args, flag_names)
        for key, value in _DEFAULTS.items():
            cfg.setdefault(key, value)
        if args.command == "solve":
            return cmd_solve(cfg)
        return cmd_sweep(cfg)
    except ConfigError as err:
        print(json.dumps({"error": "ConfigError", "message": str(err)}))
        return 2
    except StabilityViolationError as err:
        print(json.dumps({"error": "StabilityViolation", "message": str(err)}))
        return 3
    except TidgError as err:
        print(json.dumps({"error": type(err).__name__, "message": str(err)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
