"""Command-line front end.

Subcommands: integrate, degree, sigma, verify-index, branch.  Every command
reads a single JSON config (--config), writes its artifacts under --out,
and embeds the resolved config in each JSON report.  Exit codes: 0 success,
2 config/validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import expr as dsl
from .config import (
    _check_keys,
    _number,
    _parse_box,
    _parse_exprs,
    _require,
    load_config,
    load_problem,
    parse_numerics,
    _BRANCH_KEYS,
    _DEGREE_KEYS,
    _INTEGRATE_KEYS,
    _VERIFY_KEYS,
)
from .continuation import ContinuationConfig, branch_to_pairs, continue_branch
from .degree import degree_1d, degree_2d_winding, degree_auto, degree_nd_jacobian
from .errors import ConfigError, DdeBranchError, ExprError
from .fields import nu_field
from .integrator import integrate
from .lienard import sigma_transform
from .poincare import TranslationConfig, verify_index_identity
from .problem import History

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _emit_error(exc: Exception, quiet: bool):
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    offset = getattr(exc, "offset", None)
    if offset is not None:
        payload["error"]["offset"] = offset
    print(json.dumps(payload), file=sys.stderr)


def _write_json(path: Path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, allow_nan=False)
        fh.write("\n")


def cmd_integrate(config: dict, out: Path, args) -> int:
    block = _require(config, "integrate", "config")
    _check_keys(block, _INTEGRATE_KEYS, "integrate")
    lam = _number(block, "lambda", "integrate", default=0.0)
    mu = _number(block, "mu", "integrate", default=1.0)
    t_end = _number(block, "t_end", "integrate", positive=True)
    resolution = int(_number(block, "resolution", "integrate", default=400, positive=True))
    loaded = load_problem(config)
    problem = loaded.coupled
    num = parse_numerics(config)
    init_spec = block.get("init", 0.0)
    if isinstance(init_spec, (int, float)):
        point = np.full(problem.dim, float(init_spec))
    else:
        point = np.asarray(init_spec, dtype=float)
        if point.size != problem.dim:
            raise ConfigError(
                f"integrate.init: expected {problem.dim} value(s), got {point.size}"
            )
    init = History.constant(point, problem.delay, m=num.m)
    traj = integrate(problem, lam, mu, init, t_end, steps_per_delay=num.steps_per_delay)
    csv_path = out / "trajectory.csv"
    traj.to_csv(csv_path, resolution=resolution)
    if not args.quiet:
        print(f"wrote {csv_path}")
    return EXIT_OK


def _degree_field(config: dict, block: dict):
    kind = block.get("field", "expr")
    if kind == "nu":
        loaded = load_problem(config)
        field = nu_field(loaded.coupled)
        return field, field.dim
    if kind != "expr":
        raise ConfigError(f"degree.field: expected 'nu' or 'expr', got {kind!r}")
    var_names = _require(block, "vars", "degree")
    if not isinstance(var_names, list) or not all(isinstance(v, str) for v in var_names):
        raise ConfigError("degree.vars: expected a list of variable names")
    exprs = _parse_exprs(_require(block, "exprs", "degree"), set(var_names), "degree.exprs")
    if len(exprs) != len(var_names):
        raise ConfigError(
            f"degree: field has {len(exprs)} component(s) but {len(var_names)} variable(s)"
        )

    def fn(z, _exprs=exprs, _names=var_names):
        b = {name: float(v) for name, v in zip(_names, np.atleast_1d(z))}
        return np.array([dsl.evaluate(e, b) for e in _exprs])

    return fn, len(var_names)


def cmd_degree(config: dict, out: Path, args) -> int:
    block = _require(config, "degree", "config")
    _check_keys(block, _DEGREE_KEYS, "degree")
    fn, dim = _degree_field(config, block)
    box = _parse_box(_require(block, "box", "degree"), "degree.box")
    if box.dim != dim:
        raise ConfigError(f"degree.box: dimension {box.dim} does not match field dimension {dim}")
    if block.get("negate", False):
        base = fn
        fn = lambda z: -np.atleast_1d(np.asarray(base(z), dtype=float))
    method = block.get("method", "auto")
    kwargs = {}
    if args.seed_grid is not None:
        if method in ("auto", "jacobian-nd") and dim > 2:
            kwargs["grid_per_axis"] = args.seed_grid
        elif dim == 1:
            kwargs["n_check"] = args.seed_grid
    if method == "auto":
        report = degree_auto(fn, box, **kwargs)
    elif method == "sign-1d":
        report = degree_1d(fn, (box.lower[0], box.upper[0]), **kwargs)
    elif method == "winding-2d":
        report = degree_2d_winding(fn, box)
    elif method == "jacobian-nd":
        report = degree_nd_jacobian(fn, box, **kwargs)
    else:
        raise ConfigError(f"degree.method: unknown method {method!r}")
    payload = json.loads(report.to_json())
    payload["config"] = config
    path = out / "degree.json"
    _write_json(path, payload)
    if not args.quiet:
        print(f"degree = {report.degree} ({report.method}); wrote {path}")
    return EXIT_OK


def cmd_sigma(config: dict, out: Path, args) -> int:
    block = config.get("sigma", {})
    _check_keys(block, set(), "sigma")
    loaded = load_problem(config)
    if loaded.sigma is not None:
        result = loaded.sigma
    else:
        if loaded.a is None:
            raise ConfigError("sigma: the problem block must provide a coefficient a")
        result = sigma_transform(loaded.a)
    csv_path = out / "sigma.csv"
    result.to_csv(csv_path)
    payload = {
        "c0": result.c0,
        "sign": result.sign,
        "avg_sigma": result.avg_sigma,
        "config": config,
    }
    json_path = out / "sigma.json"
    _write_json(json_path, payload)
    if not args.quiet:
        print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def cmd_verify_index(config: dict, out: Path, args) -> int:
    block = _require(config, "verify_index", "config")
    _check_keys(block, _VERIFY_KEYS, "verify_index")
    lam = _number(block, "lambda", "verify_index", positive=True)
    box = _parse_box(_require(block, "box", "verify_index"), "verify_index.box")
    loaded = load_problem(config)
    num = parse_numerics(config)
    cfg = TranslationConfig(
        m=num.m, steps_per_delay=num.steps_per_delay,
        newton_tol=num.newton_tol, fd_step=num.fd_step,
    )
    report = verify_index_identity(loaded.coupled, lam, box, cfg, n_quad=num.n_quad)
    report["config"] = config
    path = out / "index_identity.json"
    _write_json(path, report)
    if not args.quiet:
        status = "PASS" if report["pass"] else "FAIL"
        print(f"index identity {status}: lhs={report['lhs_sum']} rhs={report['rhs']}; wrote {path}")
    return EXIT_OK


def cmd_branch(config: dict, out: Path, args) -> int:
    block = _require(config, "branch", "config")
    _check_keys(block, _BRANCH_KEYS, "branch")
    loaded = load_problem(config)
    problem = loaded.coupled
    num = parse_numerics(config)
    origin = np.asarray(_require(block, "origin", "branch"), dtype=float)
    lambda_max = _number(block, "lambda_max", "branch")
    domain = None
    if "domain" in block:
        domain = _parse_box(block["domain"], "branch.domain")
    ccfg = ContinuationConfig(
        h0=_number(block, "h0", "branch", default=0.05, positive=True),
        h_min=_number(block, "h_min", "branch", default=1e-6, positive=True),
        h_max=_number(block, "h_max", "branch", default=0.25, positive=True),
        newton_tol=num.newton_tol,
        max_points=int(_number(block, "max_points", "branch", default=200, positive=True)),
        m=num.m,
        steps_per_delay=num.steps_per_delay,
        fd_step=num.fd_step,
        domain=domain,
    )
    branch = continue_branch(problem, origin, lambda_max, ccfg)
    csv_path = out / "branch.csv"
    branch.to_csv(csv_path)
    payload = branch.to_json_dict()
    payload["config"] = config
    json_path = out / "branch.json"
    _write_json(json_path, payload)
    if not args.quiet:
        print(
            f"branch: {len(branch.points)} point(s), termination={branch.termination}; "
            f"wrote {csv_path} and {json_path}"
        )
    return EXIT_OK


_COMMANDS = {
    "integrate": cmd_integrate,
    "degree": cmd_degree,
    "sigma": cmd_sigma,
    "verify-index": cmd_verify_index,
    "branch": cmd_branch,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddebranch",
        description="Periodic solutions of periodically perturbed coupled delay "
        "differential equations: integration, degree, sigma transform, index "
        "identity checks, and branch continuation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--out", default=".", help="output directory (default: cwd)")
        p.add_argument("--seed-grid", type=int, default=None,
                       help="seed/sample grid size for degree and index commands")
        p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](config, out, args)
    except (ConfigError, ExprError) as exc:
        _emit_error(exc, args.quiet)
        return EXIT_CONFIG
    except DdeBranchError as exc:
        _emit_error(exc, args.quiet)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
