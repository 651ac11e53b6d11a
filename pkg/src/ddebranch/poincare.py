"""Discretized Poincare-type translation operator, its fixed points, and the
numerical verification of the index identity.

The translation operator maps an initial history on [-r, 0] to the solution
history on [T - r, T].  On the (m+1)-node discretization its fixed points
are found by damped Newton on R(u) = translate(u) - u, and each hyperbolic
fixed point carries the discrete index sign(det(I - DQ)), the
finite-dimensional stand-in for the fixed point index of the compact
operator.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .degree import degree_auto
from .errors import (
    BlowupError,
    DegeneracyError,
    DomainEscapeError,
    InvalidParameterError,
    TranslationUndefinedError,
)
from .fields import make_wf, nu_field
from .integrator import integrate
from .problem import Box, CoupledProblem, History


@dataclass(frozen=True)
class TranslationConfig:
    """Discretization and Newton parameters for the translation operator."""

    m: int = 32
    steps_per_delay: int = 32
    newton_tol: float = 1e-9
    newton_max_iter: int = 25
    fd_step: float = 1e-6

    def __post_init__(self):
        if self.m < 8:
            raise InvalidParameterError(f"m must be >= 8, got {self.m}")
        if self.newton_tol <= 0:
            raise InvalidParameterError("newton_tol must be positive")


@dataclass(frozen=True)
class FixedPointRecord:
    """A converged fixed point of the discretized translation operator."""

    history: History
    residual: float
    index: Optional[int]
    eigen_margin: float

    @property
    def degenerate(self) -> bool:
        return self.index is None


def translate(
    problem: CoupledProblem,
    lam: float,
    mu: float,
    init: History,
    cfg: TranslationConfig,
    domain: Optional[Box] = None,
    wf=None,
) -> History:
    """Apply the translation operator: integrate to T and resample the
    solution on [T - r, T] onto the m-node history grid.

    Integrator failures (blowup, domain escape) surface as
    TranslationUndefinedError: the input lies outside the operator domain.
    """
    T = problem.period
    r = problem.delay
    try:
        traj = integrate(
            problem, lam, mu, init, T,
            steps_per_delay=cfg.steps_per_delay, domain=domain, wf=wf,
        )
    except (BlowupError, DomainEscapeError) as exc:
        raise TranslationUndefinedError(str(exc)) from exc
    ts = T + np.linspace(-r, 0.0, cfg.m + 1)
    values = np.array([traj.eval(t) for t in ts])
    derivs = np.array([traj.deriv(t) for t in ts])
    return History(delay=r, values=values, derivs=derivs)


def _translate_values(problem, lam, mu, u_flat, cfg, domain, wf, dim):
    m = cfg.m
    init = History.from_values(u_flat.reshape(m + 1, dim), problem.delay)
    out = translate(problem, lam, mu, init, cfg, domain=domain, wf=wf)
    return out.values.ravel()


def _newton_fixed_point(problem, lam, mu, u0, cfg, domain=None, wf=None,
                        need_jacobian=True):
    """Damped Newton on R(u) = translate(u) - u.

    Returns (u, residual_norm, J_R) on convergence, None on failure.  The
    Jacobian is forward-difference and reused across iterations until the
    residual stops contracting; when need_jacobian is False and convergence
    happened without ever forming one, J_R is returned as None.
    """
    dim = problem.dim
    n = u0.size
    u = u0.copy()

    def residual(vec):
        return _translate_values(problem, lam, mu, vec, cfg, domain, wf, dim) - vec

    def jacobian(vec, r0):
        J = np.empty((n, n))
        for j in range(n):
            vp = vec.copy()
            vp[j] += cfg.fd_step
            J[:, j] = (
                _translate_values(problem, lam, mu, vp, cfg, domain, wf, dim) - vp - r0
            ) / cfg.fd_step
        return J

    try:
        res = residual(u)
    except TranslationUndefinedError:
        return None
    J = None
    for _ in range(cfg.newton_max_iter):
        rnorm = float(np.linalg.norm(res, ord=np.inf))
        if rnorm <= cfg.newton_tol:
            if J is None and need_jacobian:
                J = jacobian(u, res)
            return u, rnorm, J
        try:
            if J is None:
                J = jacobian(u, res)
            step = np.linalg.solve(J, -res)
        except (TranslationUndefinedError, np.linalg.LinAlgError):
            return None
        accepted = False
        alpha = 1.0
        for _ in range(10):
            try:
                res_new = residual(u + alpha * step)
            except TranslationUndefinedError:
                alpha *= 0.5
                continue
            if np.linalg.norm(res_new, ord=np.inf) < rnorm:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            if J is not None and alpha < 1.0:
                # Retry once with a fresh Jacobian before giving up.
                try:
                    J = jacobian(u, res)
                    step = np.linalg.solve(J, -res)
                    res_new = residual(u + step)
                except (TranslationUndefinedError, np.linalg.LinAlgError):
                    return None
                if np.linalg.norm(res_new, ord=np.inf) >= rnorm:
                    return None
                alpha = 1.0
            else:
                return None
        u = u + alpha * step
        res = res_new
        # Reuse the Jacobian while contraction is strong; refresh otherwise.
        if np.linalg.norm(res, ord=np.inf) > 0.1 * rnorm:
            J = None
    rnorm = float(np.linalg.norm(res, ord=np.inf))
    if rnorm <= cfg.newton_tol:
        if J is None and need_jacobian:
            J = jacobian(u, res)
        return u, rnorm, J
    return None


def _record_from_solution(problem, u, rnorm, J_R, cfg) -> FixedPointRecord:
    dim = problem.dim
    DQ = J_R + np.eye(u.size)
    det = float(np.linalg.det(np.eye(u.size) - DQ))
    eigs = np.linalg.eigvals(DQ)
    eigen_margin = float(np.min(np.abs(1.0 - eigs)))
    hist = History.from_values(u.reshape(cfg.m + 1, dim), problem.delay)
    # A forward-difference Jacobian at a non-hyperbolic fixed point reports
    # a spurious margin of order fd_step * |quadratic term|, not roundoff,
    # so the cutoffs sit well above fd_step^2.
    if abs(det) < 1e-8 or eigen_margin < 1e-4:
        return FixedPointRecord(history=hist, residual=rnorm, index=None, eigen_margin=eigen_margin)
    return FixedPointRecord(
        history=hist, residual=rnorm, index=int(np.sign(det)), eigen_margin=eigen_margin
    )


def find_fixed_points(
    problem: CoupledProblem,
    lam: float,
    seeds: List[History],
    cfg: TranslationConfig,
    mu: float = 1.0,
    domain: Optional[Box] = None,
) -> List[FixedPointRecord]:
    """Newton-refine each seed history into a fixed point of the translation
    operator; deduplicate and return records sorted deterministically."""
    wf = make_wf(problem) if (mu < 1.0 and problem.dim_x > 0) else None
    solutions = []
    for seed in seeds:
        if seed.m != cfg.m:
            raise InvalidParameterError(
                f"seed discretization m={seed.m} does not match cfg.m={cfg.m}"
            )
        out = _newton_fixed_point(problem, lam, mu, seed.values.ravel(), cfg, domain=domain, wf=wf)
        if out is None:
            continue
        solutions.append(out)

    # Deterministic order, then dedupe by sup distance of node values.
    solutions.sort(key=lambda s: tuple(np.round(s[0], 10)))
    records: List[FixedPointRecord] = []
    kept: List[np.ndarray] = []
    for u, rnorm, J in solutions:
        if any(float(np.max(np.abs(u - v))) < 1e-5 for v in kept):
            continue
        kept.append(u)
        records.append(_record_from_solution(problem, u, rnorm, J, cfg))
    return records


def _lattice_points(box: Box, per_axis: int = 3) -> List[np.ndarray]:
    axes = [
        np.linspace(box.lower[i], box.upper[i], per_axis + 2)[1:-1]
        for i in range(box.dim)
    ]
    return [np.array(point) for point in itertools.product(*axes)]


def verify_index_identity(
    problem: CoupledProblem,
    lam: float,
    box: Box,
    cfg: TranslationConfig,
    n_quad: int = None,
) -> dict:
    """Check ind(Q_T^lam, V) = sign(<a>)^s * deg(-nu, V) on the box V.

    The left side sums discrete indices over fixed points found from a seed
    grid (refined zeros of nu plus a 3-per-axis lattice); the right side
    comes from the degree module.  lam must be chosen small by the caller.
    """
    if box.dim != problem.dim:
        raise InvalidParameterError(
            f"box dimension {box.dim} does not match problem dimension {problem.dim}"
        )
    nu = nu_field(problem, n_quad)
    deg_report = degree_auto(nu.negated(), box)
    rhs = int(np.sign(problem.abar)) ** problem.dim_y * deg_report.degree

    seeds = []
    if deg_report.zeros:
        for z in deg_report.zeros:
            seeds.append(History.constant(np.array(z["point"]), problem.delay, m=cfg.m))
    for point in _lattice_points(box):
        seeds.append(History.constant(point, problem.delay, m=cfg.m))

    records = find_fixed_points(problem, lam, seeds, cfg, domain=None)
    inside = [
        rec for rec in records
        if all(box.contains(v) for v in rec.history.values)
    ]
    if any(rec.degenerate for rec in inside):
        raise DegeneracyError(
            "a fixed point in V is non-hyperbolic on this discretization; "
            "the discrete index sum is undefined"
        )
    lhs = int(sum(rec.index for rec in inside))
    return {
        "lhs_sum": lhs,
        "rhs": int(rhs),
        "pass": lhs == rhs,
        "degree": int(deg_report.degree),
        "sign_abar": int(np.sign(problem.abar)),
        "n_fixed_points": len(inside),
        "fixed_point_residuals": [rec.residual for rec in inside],
    }


def index_report_json(report: dict) -> str:
    return json.dumps(report, allow_nan=False)
