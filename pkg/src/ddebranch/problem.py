"""Problem data model: periodic coefficients, coupled delay systems, histories.

The coupled system integrated throughout the package is

    x'(t) = lambda * f(t, x(t), y(t), x(t-r), y(t-r)),
    y'(t) = a(t) * g(x(t), y(t)) + lambda * h(t, x(t), y(t), x(t-r), y(t-r)),

with x in R^k (k >= 0 allowed), y in R^s, a T-periodic coefficient a, and
delay r normalized into (0, T] at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidParameterError, ZeroAverageError

DEFAULT_N_QUAD = 1024

#: Number of sample points for the construction-time periodicity spot check.
_PERIODICITY_SAMPLES = 17
_PERIODICITY_TOL = 1e-9


def normalize_delay(r: float, T: float) -> float:
    """Reduce the delay modulo the period into the interval (0, T].

    T-periodic solution sets are unchanged when r is replaced by r - n*T
    for the unique integer n >= 0 with 0 < r - n*T <= T.
    """
    if r <= 0:
        raise InvalidParameterError(f"delay must be positive, got {r}")
    if T <= 0:
        raise InvalidParameterError(f"period must be positive, got {T}")
    if r <= T:
        return r
    n = math.ceil(r / T) - 1
    out = r - n * T
    # Guard against roundoff pushing an exact multiple to 0.
    if out <= 0:
        out += T
    return out


@dataclass(frozen=True)
class PeriodicFn1D:
    """A real-valued T-periodic function of time."""

    eval: Callable[[float], float]
    period: float

    def __post_init__(self):
        if self.period <= 0:
            raise InvalidParameterError(f"period must be positive, got {self.period}")

    def __call__(self, t):
        return self.eval(t)

    @classmethod
    def constant(cls, value: float, period: float) -> "PeriodicFn1D":
        return cls(eval=lambda t, _v=float(value): _v * np.ones_like(np.asarray(t, dtype=float)) if np.ndim(t) else _v, period=period)

    @classmethod
    def from_samples(cls, grid: np.ndarray, values: np.ndarray) -> "PeriodicFn1D":
        """Periodic cubic-spline interpolant through samples on [0, T].

        grid must cover one full period with grid[0] = 0 and grid[-1] = T;
        values[0] and values[-1] must agree (periodic closure).
        """
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        T = grid[-1] - grid[0]
        vals = values.copy()
        vals[-1] = vals[0]
        spline = CubicSpline(grid, vals, bc_type="periodic")

        def _eval(t, _spline=spline, _t0=grid[0], _T=T):
            return _spline(_t0 + np.mod(np.asarray(t, dtype=float) - _t0, _T))

        return cls(eval=lambda t: float(_eval(t)) if np.ndim(t) == 0 else _eval(t), period=T)


def _sample_periodic(fn, T: float, n: int) -> np.ndarray:
    """Evaluate a scalar function of time on the Simpson grid, vectorizing
    when the callable supports it."""
    ts = np.linspace(0.0, T, n + 1)
    try:
        out = np.asarray(fn(ts), dtype=float)
        if out.shape == ts.shape:
            return out
    except Exception:
        pass
    return np.array([float(fn(t)) for t in ts])


def simpson_weights(n: int) -> np.ndarray:
    """Composite Simpson weights on n+1 equispaced nodes (n even)."""
    if n % 2 != 0 or n < 8:
        raise InvalidParameterError(f"n_quad must be even and >= 8, got {n}")
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / 3.0


def average_scalar(fn: PeriodicFn1D, n_quad: int = DEFAULT_N_QUAD) -> float:
    """Average of a periodic function over one period by composite Simpson."""
    T = fn.period
    w = simpson_weights(n_quad)
    vals = _sample_periodic(fn, T, n_quad)
    h = T / n_quad
    return float(np.dot(w, vals) * h / T)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box, the computational stand-in for open working sets."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise InvalidParameterError("box bounds must be 1-d arrays of equal length")
        if not np.all(lower < upper):
            raise InvalidParameterError("box requires lower < upper componentwise")

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def scale(self) -> float:
        return float(np.max(self.upper - self.lower))

    def contains(self, point, tol: float = 0.0) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(p >= self.lower - tol) and np.all(p <= self.upper + tol))

    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)


def _hermite_eval(u, dt, y0, d0, y1, d1):
    """Cubic Hermite value on one segment; u in [0,1], dt segment length."""
    u2 = u * u
    u3 = u2 * u
    h00 = 2.0 * u3 - 3.0 * u2 + 1.0
    h10 = u3 - 2.0 * u2 + u
    h01 = -2.0 * u3 + 3.0 * u2
    h11 = u3 - u2
    return y0 * h00 + d0 * (dt * h10) + y1 * h01 + d1 * (dt * h11)


def _hermite_deriv(u, dt, y0, d0, y1, d1):
    u2 = u * u
    dh00 = (6.0 * u2 - 6.0 * u) / dt
    dh10 = 3.0 * u2 - 4.0 * u + 1.0
    dh01 = (-6.0 * u2 + 6.0 * u) / dt
    dh11 = 3.0 * u2 - 2.0 * u
    return y0 * dh00 + d0 * dh10 + y1 * dh01 + d1 * dh11


@dataclass(frozen=True)
class History:
    """A sampled function on [-r, 0] with cubic Hermite interpolation.

    values and derivs have shape (m+1, d); node j sits at -r + j*r/m.
    """

    delay: float
    values: np.ndarray
    derivs: np.ndarray

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        derivs = np.atleast_2d(np.asarray(self.derivs, dtype=float))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "derivs", derivs)
        if self.delay <= 0:
            raise InvalidParameterError(f"delay must be positive, got {self.delay}")
        if values.shape != derivs.shape:
            raise InvalidParameterError("values and derivs must have the same shape")
        if values.shape[0] < 9:
            raise InvalidParameterError("history needs at least m = 8 (9 nodes)")

    @property
    def m(self) -> int:
        return self.values.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(-self.delay, 0.0, self.m + 1)

    @classmethod
    def constant(cls, point, delay: float, m: int = 32) -> "History":
        point = np.atleast_1d(np.asarray(point, dtype=float))
        values = np.tile(point, (m + 1, 1))
        return cls(delay=delay, values=values, derivs=np.zeros_like(values))

    @classmethod
    def from_values(cls, values: np.ndarray, delay: float) -> "History":
        """Build a history from node values alone; node slopes come from a
        not-a-knot cubic spline through the values (deterministic, so the
        discretized translation operator is a function of the values only).
        """
        values = np.atleast_2d(np.asarray(values, dtype=float))
        m = values.shape[0] - 1
        grid = np.linspace(-delay, 0.0, m + 1)
        spline = CubicSpline(grid, values, axis=0)
        derivs = spline(grid, 1)
        return cls(delay=delay, values=values, derivs=derivs)

    def eval(self, theta):
        """Interpolated value(s) at theta in [-r, 0]; exact at node points."""
        theta = np.asarray(theta, dtype=float)
        scalar = theta.ndim == 0
        th = np.atleast_1d(theta)
        dg = self.delay / self.m
        s = (th + self.delay) / dg
        # Snap queries that are a node point up to roundoff, so node values
        # are reproduced exactly.
        near = np.abs(s - np.round(s)) < 1e-9
        s = np.where(near, np.round(s), s)
        i = np.clip(np.floor(s).astype(int), 0, self.m - 1)
        u = s - i
        y = _hermite_eval(
            u[:, None], dg, self.values[i], self.derivs[i],
            self.values[i + 1], self.derivs[i + 1],
        )
        return y[0] if scalar else y

    def terminal(self) -> np.ndarray:
        """Value at theta = 0."""
        return self.values[-1].copy()

    def sup_distance(self, other: "History") -> float:
        return float(np.max(np.abs(self.values - other.values)))


@dataclass(frozen=True)
class CoupledProblem:
    """The full parametrized delay system (fields, coefficient, period, delay).

    The delay is normalized into (0, T] at construction.  f and h may be
    None when absent (k = 0, or no delayed perturbation of y).
    """

    dim_x: int
    dim_y: int
    g: Callable
    a: PeriodicFn1D
    period: float
    delay: float
    f: Optional[Callable] = None
    h: Optional[Callable] = None
    abar: float = field(init=False)
    n_quad: int = DEFAULT_N_QUAD

    def __post_init__(self):
        k, s = self.dim_x, self.dim_y
        if not (isinstance(k, int) and k >= 0):
            raise InvalidParameterError(f"dim_x must be an integer >= 0, got {k}")
        if not (isinstance(s, int) and s >= 1):
            raise InvalidParameterError(f"dim_y must be an integer >= 1, got {s}")
        if self.period <= 0:
            raise InvalidParameterError(f"period must be positive, got {self.period}")
        if k > 0 and self.f is None:
            raise InvalidParameterError("f is required when dim_x > 0")
        if abs(self.a.period - self.period) > 1e-12 * max(1.0, self.period):
            raise InvalidParameterError(
                f"coefficient period {self.a.period} does not match system period {self.period}"
            )
        object.__setattr__(self, "delay", normalize_delay(self.delay, self.period))
        abar = average_scalar(self.a, self.n_quad)
        if abs(abar) < 1e-12:
            raise ZeroAverageError(
                "the coefficient a has zero average over one period; "
                "the methods of this package require <a> != 0"
            )
        object.__setattr__(self, "abar", abar)
        self._check_time_periodicity()

    def _check_time_periodicity(self):
        """Cheap construction-time guard: spot-check that f, h and a are
        T-periodic in t at a fixed probe state.  Not a proof."""
        T = self.period
        ts = np.linspace(0.0, T, _PERIODICITY_SAMPLES, endpoint=False)
        xp = 0.5 * np.ones(self.dim_x)
        yp = 0.5 * np.ones(self.dim_y)
        for t in ts:
            if abs(float(self.a(t + T)) - float(self.a(t))) > _PERIODICITY_TOL:
                raise InvalidParameterError(
                    f"coefficient a is not {T}-periodic (mismatch at t={t:.4g})"
                )
            for name, fn in (("f", self.f), ("h", self.h)):
                if fn is None:
                    continue
                v0 = np.atleast_1d(np.asarray(fn(t, xp, yp, xp, yp), dtype=float))
                v1 = np.atleast_1d(np.asarray(fn(t + T, xp, yp, xp, yp), dtype=float))
                if np.max(np.abs(v1 - v0)) > _PERIODICITY_TOL:
                    raise InvalidParameterError(
                        f"field {name} is not {T}-periodic in t (mismatch at t={t:.4g})"
                    )

    @property
    def dim(self) -> int:
        return self.dim_x + self.dim_y

    def eval_f(self, t, x, y, xd, yd) -> np.ndarray:
        if self.f is None:
            return np.zeros(0)
        return np.atleast_1d(np.asarray(self.f(t, x, y, xd, yd), dtype=float))

    def eval_g(self, x, y) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.g(x, y), dtype=float))

    def eval_h(self, t, x, y, xd, yd) -> np.ndarray:
        if self.h is None:
            return np.zeros(self.dim_y)
        return np.atleast_1d(np.asarray(self.h(t, x, y, xd, yd), dtype=float))

    def split(self, state: np.ndarray):
        return state[: self.dim_x], state[self.dim_x:]
