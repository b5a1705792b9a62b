"""Command-line front end.

Subcommands: eval, gamma, check, compare, jacobian, sei, sweep.  Each run
reads one JSON config document, validates it strictly (unknown keys are
rejected), writes its outputs atomically under --out, and emits a manifest
echoing the fully-resolved config.  Repeated runs with the same config are
byte-identical except for the manifest timestamp.

Exit codes: 0 ok, 1 check failure, 2 config error, 3 numerical failure.
The environment variable DEFORCE_THREADS caps internal parallelism.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import sys

from . import __version__, analysis, checks, engine, kernels, profiles
from .analysis import AnalysisError
from .engine import EngineError
from .kernels import KernelError
from .profiles import ProfileError
from .quadrature import QuadratureError, QuadratureSpec

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


# -- config validation ------------------------------------------------------------

_PROFILE_KEYS = {
    "sphere": {"a", "R", "rho_max", "base_dim"},
    "cylinder": {"a", "R", "x_max"},
    "paraboloid": {"a", "sigma", "rho_max", "base_dim"},
    "constant": {"a", "rho_max", "base_dim", "bounds"},
    "gaussian-bump": {"a", "amplitude", "width", "rho_max", "base_dim"},
    "grid": {"csv"},
}

_KERNEL_KEYS = {
    "casimir_scalar": {"bc"},
    "casimir_em": set(),
    "electrostatic": {"V0", "epsilon0"},
    "highT_dirichlet": {"beta", "n"},
    "power_law": {"v0", "z0", "p", "c0", "base_dim"},
    "patch": {"V_rms", "ell", "epsilon0", "g", "g_csv", "normalize"},
}

_TOP_KEYS = {
    "profile", "kernel", "quad", "gamma", "jacobian", "sei", "sweep",
    "compare", "check", "output",
}


def _reject_unknown(block, allowed, where):
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where} "
                          f"(allowed: {sorted(allowed)})")


def _require(block, keys, where):
    missing = [k for k in keys if k not in block]
    if missing:
        raise ConfigError(f"missing required key(s) {missing} in {where}")


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    if "config" in doc and isinstance(doc["config"], dict):
        doc = doc["config"]  # manifest round-trip
    _reject_unknown(doc, _TOP_KEYS, "config")
    return doc


def build_profile(block, rho_m_frac=None):
    if not isinstance(block, dict):
        raise ConfigError("profile block must be an object")
    if "kind" not in block:
        raise ConfigError("profile block needs a 'kind'")
    kind = block["kind"]
    if kind not in _PROFILE_KEYS:
        raise ConfigError(f"unknown profile kind {kind!r} "
                          f"(known: {sorted(_PROFILE_KEYS)})")
    _reject_unknown(set(block) - {"kind"}, _PROFILE_KEYS[kind], f"profile[{kind}]")
    args = {k: v for k, v in block.items() if k != "kind"}
    try:
        if kind == "sphere":
            if rho_m_frac is not None:
                args["rho_max"] = rho_m_frac * args["R"]
            return profiles.make_sphere(**args)
        if kind == "cylinder":
            if rho_m_frac is not None:
                args["x_max"] = rho_m_frac * args["R"]
            return profiles.make_cylinder(**args)
        if kind == "paraboloid":
            args["rho_max"] = args.get("rho_max", math.inf)
            return profiles.make_paraboloid(**args)
        if kind == "constant":
            return profiles.make_constant(**args)
        if kind == "gaussian-bump":
            args["rho_max"] = args.get("rho_max", math.inf)
            return profiles.make_gaussian_bump(**args)
        if kind == "grid":
            return profiles.load_grid_csv(args["csv"])
    except TypeError as exc:
        raise ConfigError(f"bad profile parameters for kind {kind!r}: {exc}") from exc
    raise ConfigError(f"unhandled profile kind {kind!r}")


def build_kernel(block):
    if not isinstance(block, dict):
        raise ConfigError("kernel block must be an object")
    if "name" not in block:
        raise ConfigError("kernel block needs a 'name'")
    name = block["name"]
    if name not in _KERNEL_KEYS:
        raise ConfigError(f"unknown kernel {name!r} (known: {sorted(_KERNEL_KEYS)})")
    _reject_unknown(set(block) - {"name"}, _KERNEL_KEYS[name], f"kernel[{name}]")
    args = {k: v for k, v in block.items() if k != "name"}
    try:
        if name == "casimir_scalar":
            return kernels.kernel_casimir_scalar(args.get("bc", "dirichlet"))
        if name == "casimir_em":
            return kernels.kernel_casimir_em()
        if name == "electrostatic":
            return kernels.kernel_electrostatic(args["V0"], args.get("epsilon0", 1.0))
        if name == "highT_dirichlet":
            return kernels.kernel_highT_dirichlet(args["beta"], args.get("n", 2))
        if name == "power_law":
            return kernels.kernel_power_law(
                args["v0"], args["z0"], args["p"],
                c0=args.get("c0"), base_dim=args.get("base_dim", 2),
            )
        if name == "patch":
            if "g_csv" in args:
                corr = kernels.correlation_from_csv(args["g_csv"])
            else:
                g_name = args.get("g", "gaussian")
                if g_name == "gaussian":
                    corr = kernels.gaussian_correlation()
                elif g_name == "exponential":
                    corr = kernels.exponential_correlation()
                else:
                    raise ConfigError(f"unknown correlation {g_name!r}; "
                                      "use gaussian, exponential or g_csv")
            if args.get("normalize"):
                corr = corr.normalized()
            return kernels.kernel_patch(
                corr, args["V_rms"], args["ell"], args.get("epsilon0", 1.0)
            )
    except KeyError as exc:
        raise ConfigError(f"kernel {name!r} is missing parameter {exc}") from exc
    raise ConfigError(f"unhandled kernel {name!r}")


def build_spec(block, quad_tol=None):
    block = dict(block or {})
    _reject_unknown(block, {"rel_tol", "max_subdiv"}, "quad")
    rel = quad_tol if quad_tol is not None else block.get("rel_tol", 1e-9)
    try:
        return QuadratureSpec(rel_tol=rel, max_subdivisions=block.get("max_subdiv", 500))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# -- deterministic output ------------------------------------------------------------


def _dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_atomic(path, text):
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    write_atomic(path, "\n".join(lines) + "\n")


def _emit(out_dir, command, config, artifacts):
    """Write artifacts {name: text} plus the manifest; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    for name, text in artifacts.items():
        write_atomic(os.path.join(out_dir, name), text)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "outputs": sorted(artifacts),
        "package_version": __version__,
        "timestamp_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    write_atomic(os.path.join(out_dir, "manifest.json"), _dump_json(manifest))


def _resolved(config, args):
    resolved = json.loads(json.dumps(config))  # deep copy
    quad = dict(resolved.get("quad", {}))
    if args.quad_tol is not None:
        quad["rel_tol"] = args.quad_tol
    quad.setdefault("rel_tol", 1e-9)
    quad.setdefault("max_subdiv", 500)
    resolved["quad"] = quad
    if args.rho_m_frac is not None and "profile" in resolved:
        resolved["profile"] = dict(resolved["profile"])
        if resolved["profile"].get("kind") in ("sphere", "cylinder"):
            key = "rho_max" if resolved["profile"]["kind"] == "sphere" else "x_max"
            resolved["profile"][key] = args.rho_m_frac * resolved["profile"]["R"]
    return resolved


# -- subcommands ------------------------------------------------------------


def cmd_eval(args):
    config = load_config(args.config)
    _require(config, ["profile", "kernel"], "eval config")
    resolved = _resolved(config, args)
    spec = build_spec(resolved["quad"], args.quad_tol)
    profile = build_profile(resolved["profile"])
    kernel = build_kernel(resolved["kernel"])

    result = engine.eval_de2(kernel, profile, spec)
    if kernel.c is not None and profile.has_hessian:
        f4, f4_err = engine.eval_de4_term(kernel.c, profile, spec)
        result.f4, result.f4_err = f4, f4_err
        result.metadata["fourth_order"] = "partial (gradient^4 + Hessian^2 structure only)"
    _emit(args.out, "eval", resolved, {"result.json": _dump_json(result.to_dict())})
    print(f"eval: F0={result.f0:.9g} F2={result.f2:.9g} total={result.total:.9g}")
    return 0


def cmd_gamma(args):
    config = load_config(args.config)
    _require(config, ["kernel", "gamma"], "gamma config")
    resolved = _resolved(config, args)
    block = dict(resolved["gamma"])
    _reject_unknown(block, {"family", "R", "ladder", "model", "reference",
                            "rho_m_frac", "rho_m_alt", "fit_tol"}, "gamma")
    _require(block, ["family", "R"], "gamma block")
    spec = build_spec(resolved["quad"], args.quad_tol)
    kernel = build_kernel(resolved["kernel"])
    ladder = block.get("ladder")
    if ladder is not None and len(ladder) < 4:
        raise ConfigError("gamma ladder needs at least 4 rungs")
    try:
        report = analysis.gamma_fit(
            kernel,
            block["family"],
            block["R"],
            ladder=ladder,
            model=block.get("model", "linear"),
            spec=spec,
            rho_m_frac=args.rho_m_frac or block.get("rho_m_frac", profiles.DEFAULT_RHO_FRACTION),
            rho_m_alt=block.get("rho_m_alt", profiles.ALT_RHO_FRACTION),
            reference=block.get("reference"),
            fit_tol=block.get("fit_tol", 0.05),
        )
    except AnalysisError as exc:
        raise ConfigError(str(exc)) from exc
    rows = list(zip(report.ladder, report.ratios))
    _emit(args.out, "gamma", resolved, {
        "fit_report.json": _dump_json(report.to_dict()),
        "ratios.csv": "a_over_R[-],ratio[-]\n" + "".join(
            f"{_fmt(x)},{_fmt(r)}\n" for x, r in rows
        ),
    })
    extra = "" if report.gamma_log is None else f" gamma_log={report.gamma_log:.6g}"
    print(f"gamma: {report.gamma:.6g} +- {report.uncertainty:.2g}{extra}")
    return 0


def cmd_check(args):
    config = load_config(args.config) if args.config else {}
    if config:
        _reject_unknown(config, _TOP_KEYS, "config")
    block = dict(config.get("check", {}))
    _reject_unknown(block, {"suite", "em_kernels"}, "check")
    suites = None
    if args.suite:
        suites = [args.suite]
    elif block.get("suite"):
        suites = [block["suite"]]
    em_kernels = None
    if "em_kernels" in block:
        trio = block["em_kernels"]
        _reject_unknown(trio, {"dirichlet", "neumann", "em"}, "check.em_kernels")
        _require(trio, ["dirichlet", "neumann", "em"], "check.em_kernels")
        em_kernels = tuple(build_kernel(trio[k]) for k in ("dirichlet", "neumann", "em"))
    try:
        ok, results = checks.run_checks(suites, em_kernels=em_kernels)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    for res in results:
        print(f"check {res['suite']}: {'PASS' if res['passed'] else 'FAIL'}")
    _emit(args.out, "check", config,
          {"check.json": _dump_json({"passed": ok, "results": results})})
    if not ok:
        failed = [r["suite"] for r in results if not r["passed"]]
        print(f"FAILED suites: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def cmd_compare(args):
    config = load_config(args.config)
    _require(config, ["profile", "kernel"], "compare config")
    resolved = _resolved(config, args)
    block = dict(resolved.get("compare", {}))
    _reject_unknown(block, {"sheet2"}, "compare")
    spec = build_spec(resolved["quad"], args.quad_tol)
    profile = build_profile(resolved["profile"])
    kernel = build_kernel(resolved["kernel"])
    sheet2 = build_profile(block["sheet2"]) if "sheet2" in block else None
    table = engine.compare_methods(kernel, profile, spec, sheet2=sheet2)
    rows = [(r["method"], r["value"], r["err"]) for r in table["rows"]]
    _emit(args.out, "compare", resolved, {
        "compare.json": _dump_json(table),
        "compare.csv": "method,value[nat],err[nat]\n" + "".join(
            f"{m},{_fmt(v)},{_fmt(e)}\n" for m, v, e in rows
        ),
    })
    for m, v, _ in rows:
        print(f"compare {m}: {v:.9g}")
    return 0


def cmd_jacobian(args):
    config = load_config(args.config)
    _require(config, ["profile"], "jacobian config")
    resolved = _resolved(config, args)
    block = dict(resolved.get("jacobian", {}))
    _reject_unknown(block, {"h_bins", "window"}, "jacobian")
    spec = build_spec(resolved["quad"], args.quad_tol)
    profile = build_profile(resolved["profile"])
    jac = engine.compute_jacobian(
        profile, block.get("h_bins", 32), window=block.get("window"), spec=spec
    )
    payload = jac.to_dict()
    if "kernel" in resolved and not jac.degenerate:
        kernel = build_kernel(resolved["kernel"])
        payload["blocki_force"] = engine.eval_blocki_force(kernel, jac, jac.d, spec)
        payload["kernel"] = kernel.name
    _emit(args.out, "jacobian", resolved, {
        "jacobian.json": _dump_json(payload),
        "jacobian.csv": "h[length],J[area/length]\n" + "".join(
            f"{_fmt(h)},{_fmt(j)}\n" for h, j in zip(jac.h, jac.j)
        ),
    })
    if jac.degenerate:
        print("jacobian: degenerate (constant gap)")
    else:
        print(f"jacobian: J0={jac.j0:.9g} J1={jac.j1:.9g}")
    return 0


def cmd_sei(args):
    config = load_config(args.config)
    _require(config, ["profile", "sei"], "sei config")
    resolved = _resolved(config, args)
    block = dict(resolved["sei"])
    _reject_unknown(block, {"sheet2", "lambda_R"}, "sei")
    _require(block, ["sheet2", "lambda_R"], "sei block")
    spec = build_spec(resolved["quad"], args.quad_tol)
    near = build_profile(resolved["profile"])
    far = build_profile(block["sheet2"])
    lam = float(block["lambda_R"])

    def plate(h):
        return lam / (32.0 * math.pi ** 2 * h)

    sei_val, sei_err = engine.eval_sei(plate, near, far, spec)
    oracle_val, oracle_err = engine.dilute_oracle(lam, near, far, spec)
    combined = sei_err + oracle_err + 1e-13 * abs(oracle_val)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "sei": sei_val,
        "sei_err": sei_err,
        "dilute_oracle": oracle_val,
        "oracle_err": oracle_err,
        "abs_difference": abs(sei_val - oracle_val),
        "combined_budget": combined,
        "agrees": abs(sei_val - oracle_val) <= combined,
    }
    _emit(args.out, "sei", resolved, {"sei.json": _dump_json(payload)})
    print(f"sei: {sei_val:.9g} oracle: {oracle_val:.9g} "
          f"{'OK' if payload['agrees'] else 'MISMATCH'}")
    return 0 if payload["agrees"] else 1


def cmd_sweep(args):
    config = load_config(args.config)
    _require(config, ["kernel", "sweep"], "sweep config")
    resolved = _resolved(config, args)
    block = dict(resolved["sweep"])
    _reject_unknown(block, {"family", "R", "ladder", "rho_m_frac"}, "sweep")
    _require(block, ["family", "R", "ladder"], "sweep block")
    spec = build_spec(resolved["quad"], args.quad_tol)
    kernel = build_kernel(resolved["kernel"])
    radius = block["R"]
    frac = args.rho_m_frac or block.get("rho_m_frac", profiles.DEFAULT_RHO_FRACTION)

    rows = []
    for x in block["ladder"]:
        a = x * radius
        profile = analysis._family_profile(block["family"], kernel, radius, a, frac)
        res = engine.eval_de2(kernel, profile, spec)
        try:
            lead = analysis.analytic_lead(kernel, profile.base_dim, radius, a)
            ratio = res.total / lead
        except AnalysisError:
            ratio = math.nan
        rows.append((x, res.f0, res.f2, res.total, res.total_err, ratio))

    _emit(args.out, "sweep", resolved, {
        "sweep.csv": "a_over_R,F0,F2,total,err,ratio_to_lead\n" + "".join(
            ",".join(_fmt(v) for v in row) + "\n" for row in rows
        ),
    })
    print(f"sweep: {len(rows)} rungs written")
    return 0


_COMMANDS = {
    "eval": cmd_eval,
    "gamma": cmd_gamma,
    "check": cmd_check,
    "compare": cmd_compare,
    "jacobian": cmd_jacobian,
    "sei": cmd_sei,
    "sweep": cmd_sweep,
}


def _parser():
    parser = argparse.ArgumentParser(
        prog="deforce",
        description="Plane vs. curved-surface interactions: derivative expansion, "
                    "Derjaguin/PFA, Blocki Jacobian and surface element integration.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, required=name != "check",
                       help="JSON run config (or a manifest)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--quad-tol", type=float, default=None, dest="quad_tol",
                       help="override quad.rel_tol")
        p.add_argument("--rho-m-frac", type=float, default=None, dest="rho_m_frac",
                       help="override the compact-object planform fraction rho_max/R")
        if name == "check":
            p.add_argument("--suite", default=None, help="run a single named suite")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ProfileError, KernelError, AnalysisError, EngineError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except QuadratureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
