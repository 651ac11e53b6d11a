"""Run-configuration loading and validation for the command-line front end.

Configs are single JSON documents.  Validation is strict: unknown keys are
hard errors, and every expression is parsed against the variable set legal
for its slot before any computation starts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import expr as dsl
from .errors import ConfigError, ExprError
from .lienard import ScalarDelayProblem, SigmaResult
from .problem import Box, CoupledProblem, PeriodicFn1D

_TOP_KEYS = {"problem", "numerics", "integrate", "degree", "sigma", "verify_index", "branch"}
_PROBLEM_KEYS = {"preset", "a", "phi", "alpha", "beta", "T", "r", "dims", "f", "g", "h"}
_NUMERICS_KEYS = {"n_quad", "steps_per_delay", "m", "newton_tol", "fd_step"}
_INTEGRATE_KEYS = {"lambda", "mu", "t_end", "init", "resolution"}
_DEGREE_KEYS = {"field", "exprs", "vars", "box", "method", "negate"}
_VERIFY_KEYS = {"lambda", "box"}
_BRANCH_KEYS = {"origin", "lambda_max", "h0", "h_min", "h_max", "max_points", "domain", "component"}
_BOX_KEYS = {"lower", "upper"}


def _check_keys(obj, allowed, path):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}")


def _require(obj, key, path):
    if key not in obj:
        raise ConfigError(f"{path}: missing required key '{key}'")
    return obj[key]


def _number(obj, key, path, default=None, positive=False):
    if key not in obj:
        if default is None:
            raise ConfigError(f"{path}: missing required key '{key}'")
        return default
    v = obj[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(f"{path}.{key}: expected a number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{path}.{key}: must be positive, got {v}")
    return float(v)


def _parse_box(obj, path) -> Box:
    _check_keys(obj, _BOX_KEYS, path)
    lower = _require(obj, "lower", path)
    upper = _require(obj, "upper", path)
    try:
        return Box(lower=np.asarray(lower, dtype=float), upper=np.asarray(upper, dtype=float))
    except Exception as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_exprs(sources, allowed, path):
    if isinstance(sources, str):
        sources = [sources]
    if not isinstance(sources, list) or not all(isinstance(s, str) for s in sources):
        raise ConfigError(f"{path}: expected an expression string or list of strings")
    out = []
    for i, src in enumerate(sources):
        try:
            out.append(dsl.parse(src, allowed))
        except ExprError as exc:
            raise ConfigError(f"{path}[{i}]: {exc}") from exc
    return out


def _state_vars(k, s, with_time=True, with_delays=True):
    names = set()
    if with_time:
        names.add("t")
    names |= {f"x{i+1}" for i in range(k)}
    names |= {f"y{j+1}" for j in range(s)}
    if with_delays:
        names |= {f"xd{i+1}" for i in range(k)}
        names |= {f"yd{j+1}" for j in range(s)}
    return names


def _bindings(t, x, y, xd, yd):
    b = {"t": t}
    for i, v in enumerate(x):
        b[f"x{i+1}"] = v
    for j, v in enumerate(y):
        b[f"y{j+1}"] = v
    for i, v in enumerate(xd):
        b[f"xd{i+1}"] = v
    for j, v in enumerate(yd):
        b[f"yd{j+1}"] = v
    return b


def _vector_field_from_exprs(exprs, kind):
    if kind == "f_or_h":
        def fn(t, x, y, xd, yd, _exprs=exprs):
            b = _bindings(t, x, y, xd, yd)
            return np.array([dsl.evaluate(e, b) for e in _exprs])
        return fn
    # g(x, y)
    def gn(x, y, _exprs=exprs):
        b = _bindings(0.0, x, y, x, y)
        del b["t"]
        return np.array([dsl.evaluate(e, b) for e in _exprs])
    return gn


@dataclass(frozen=True)
class NumericsConfig:
    n_quad: int = 1024
    steps_per_delay: int = 32
    m: int = 32
    newton_tol: float = 1e-9
    fd_step: float = 1e-6


@dataclass(frozen=True)
class LoadedProblem:
    """A problem resolved from config: the coupled system, plus the scalar
    equation and sigma transform when it came from a sunflower preset."""

    coupled: CoupledProblem
    scalar: Optional[ScalarDelayProblem] = None
    sigma: Optional[SigmaResult] = None
    a: Optional[PeriodicFn1D] = None
    default_lambda: Optional[float] = None


def parse_numerics(config: dict) -> NumericsConfig:
    block = config.get("numerics", {})
    _check_keys(block, _NUMERICS_KEYS, "numerics")
    n_quad = int(_number(block, "n_quad", "numerics", default=1024))
    spd = int(_number(block, "steps_per_delay", "numerics", default=32))
    m = int(_number(block, "m", "numerics", default=32))
    tol = _number(block, "newton_tol", "numerics", default=1e-9, positive=True)
    fd = _number(block, "fd_step", "numerics", default=1e-6, positive=True)
    return NumericsConfig(n_quad=n_quad, steps_per_delay=spd, m=m, newton_tol=tol, fd_step=fd)


def _load_periodic_expr(source: str, period: float, path: str) -> PeriodicFn1D:
    (e,) = _parse_exprs(source, {"t"}, path)

    def ev(t, _e=e):
        if np.ndim(t) > 0:
            return np.array([dsl.evaluate(_e, {"t": float(ti)}) for ti in np.asarray(t).ravel()])
        return dsl.evaluate(_e, {"t": float(t)})

    return PeriodicFn1D(eval=ev, period=period)


def load_problem(config: dict) -> LoadedProblem:
    block = _require(config, "problem", "config")
    _check_keys(block, _PROBLEM_KEYS, "problem")
    preset = block.get("preset")
    if preset is not None and preset not in ("sunflower", "classic-sunflower"):
        raise ConfigError(f"problem.preset: unknown preset {preset!r}")

    if preset == "classic-sunflower":
        for key in ("a", "phi", "dims", "f", "g", "h"):
            if key in block:
                raise ConfigError(f"problem.{key}: not allowed with the classic-sunflower preset")
        T = _number(block, "T", "problem", default=2.0 * math.pi, positive=True)
        r = _number(block, "r", "problem", positive=True)
        alpha = _number(block, "alpha", "problem")
        beta = _number(block, "beta", "problem")
        from .presets import classic_sunflower_setup

        try:
            setup, lam = classic_sunflower_setup(alpha, beta, r, T)
        except Exception as exc:
            raise ConfigError(f"problem: {exc}") from exc
        return LoadedProblem(
            coupled=setup.coupled, scalar=setup.scalar, sigma=setup.sigma,
            a=setup.scalar.a, default_lambda=lam,
        )

    if preset == "sunflower":
        for key in ("dims", "f", "g", "h", "alpha", "beta"):
            if key in block:
                raise ConfigError(f"problem.{key}: not allowed with the sunflower preset")
        T = _number(block, "T", "problem", default=2.0 * math.pi, positive=True)
        r = _number(block, "r", "problem", default=1.0, positive=True)
        a_src = block.get("a", "-1 + 0.5*sin(t)")
        phi_src = block.get("phi", "sin(yd1)")
        a = _load_periodic_expr(a_src, T, "problem.a")
        (phi_e,) = _parse_exprs(phi_src, {"y1", "yd1"}, "problem.phi")

        def phi(y, yd, _e=phi_e):
            return dsl.evaluate(_e, {"y1": float(y), "yd1": float(yd)})

        from .presets import sunflower_setup

        try:
            setup = sunflower_setup(a, phi, T, r)
        except Exception as exc:
            raise ConfigError(f"problem: {exc}") from exc
        return LoadedProblem(
            coupled=setup.coupled, scalar=setup.scalar, sigma=setup.sigma, a=a,
        )

    # Explicit coupled problem.
    dims = _require(block, "dims", "problem")
    _check_keys(dims, {"k", "s"}, "problem.dims")
    k = int(_number(dims, "k", "problem.dims"))
    s = int(_number(dims, "s", "problem.dims"))
    T = _number(block, "T", "problem", positive=True)
    r = _number(block, "r", "problem", positive=True)
    a = _load_periodic_expr(_require(block, "a", "problem"), T, "problem.a")

    g_exprs = _parse_exprs(_require(block, "g", "problem"), _state_vars(k, s, with_time=False, with_delays=False), "problem.g")
    if len(g_exprs) != s:
        raise ConfigError(f"problem.g: expected {s} component(s), got {len(g_exprs)}")
    g = _vector_field_from_exprs(g_exprs, "g")

    f = None
    if k > 0:
        f_exprs = _parse_exprs(_require(block, "f", "problem"), _state_vars(k, s), "problem.f")
        if len(f_exprs) != k:
            raise ConfigError(f"problem.f: expected {k} component(s), got {len(f_exprs)}")
        f = _vector_field_from_exprs(f_exprs, "f_or_h")
    elif "f" in block:
        raise ConfigError("problem.f: not allowed when k = 0")

    h = None
    if "h" in block:
        h_exprs = _parse_exprs(block["h"], _state_vars(k, s), "problem.h")
        if len(h_exprs) != s:
            raise ConfigError(f"problem.h: expected {s} component(s), got {len(h_exprs)}")
        h = _vector_field_from_exprs(h_exprs, "f_or_h")

    try:
        coupled = CoupledProblem(dim_x=k, dim_y=s, f=f, g=g, h=h, a=a, period=T, delay=r)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"problem: {exc}") from exc
    return LoadedProblem(coupled=coupled, a=a)


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            config = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    _check_keys(config, _TOP_KEYS, "config")
    return config
