"""Fixed-step RK4 integration of the coupled delay system by the method of
steps, with cubic Hermite dense output.

The step is h = r / steps_per_delay, so every delayed read lands inside an
already-completed segment (or the initial history) and every multiple of r
is a segment boundary, keeping the derivative discontinuities of the
solution aligned with segment joints.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import BlowupError, DomainEscapeError, InvalidParameterError
from .fields import make_wf
from .problem import Box, CoupledProblem, History, _hermite_deriv, _hermite_eval

BLOWUP_THRESHOLD = 1e9


@dataclass(frozen=True)
class Trajectory:
    """Dense piecewise-cubic solution on [-r, t_end].

    On [-r, 0] evaluation delegates to the initial history, reproducing its
    interpolant exactly; on [0, t_end] nodes carry the RK4 states and the
    right-hand-side slopes, interpolated by cubic Hermite polynomials.
    """

    init: History
    times: np.ndarray
    states: np.ndarray
    slopes: np.ndarray
    dim_x: int

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def _locate(self, t: float):
        times = self.times
        i = int(np.searchsorted(times, t, side="right")) - 1
        i = min(max(i, 0), len(times) - 2)
        dt = times[i + 1] - times[i]
        u = (t - times[i]) / dt
        if abs(u) < 1e-12:
            u = 0.0
        elif abs(u - 1.0) < 1e-12:
            u = 1.0
        return i, u, dt

    def eval(self, t):
        """Solution value at time t (scalar or array), t in [-r, t_end]."""
        if np.ndim(t) > 0:
            return np.array([self.eval(float(ti)) for ti in np.asarray(t).ravel()])
        t = float(t)
        if t < -self.init.delay - 1e-12:
            raise InvalidParameterError(f"time {t} precedes the history interval")
        if t <= 0.0:
            return self.init.eval(max(t, -self.init.delay))
        t = min(t, self.t_end)
        i, u, dt = self._locate(t)
        return _hermite_eval(
            u, dt, self.states[i], self.slopes[i], self.states[i + 1], self.slopes[i + 1]
        )

    def deriv(self, t):
        """Time derivative of the interpolant at t."""
        if np.ndim(t) > 0:
            return np.array([self.deriv(float(ti)) for ti in np.asarray(t).ravel()])
        t = float(t)
        if t <= 0.0:
            # One-sided: the history carries its own slopes.
            h = self.init
            dg = h.delay / h.m
            s = (t + h.delay) / dg
            i = int(min(max(np.floor(s + 1e-12), 0), h.m - 1))
            u = s - i
            return _hermite_deriv(u, dg, h.values[i], h.derivs[i], h.values[i + 1], h.derivs[i + 1])
        t = min(t, self.t_end)
        i, u, dt = self._locate(t)
        return _hermite_deriv(
            u, dt, self.states[i], self.slopes[i], self.states[i + 1], self.slopes[i + 1]
        )

    def to_csv(self, path, resolution: int = 400):
        """Write t, x1..xk, y1..ys samples at the requested resolution."""
        k = self.dim_x
        s = self.dim - k
        header = ["t"] + [f"x{i+1}" for i in range(k)] + [f"y{j+1}" for j in range(s)]
        ts = np.linspace(-self.init.delay, self.t_end, resolution + 1)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for t in ts:
                writer.writerow([f"{t:.12g}"] + [f"{v:.15g}" for v in self.eval(t)])


def _check_state(t: float, state: np.ndarray, domain: Optional[Box]):
    norm = float(np.max(np.abs(state))) if state.size else 0.0
    if not np.all(np.isfinite(state)) or norm > BLOWUP_THRESHOLD:
        raise BlowupError(t, norm, BLOWUP_THRESHOLD)
    if domain is not None and not domain.contains(state):
        raise DomainEscapeError(t, state.copy())


def _make_rhs(problem: CoupledProblem, lam: float, mu: float, wf=None) -> Callable:
    k = problem.dim_x
    a = problem.a
    abar = problem.abar
    if mu < 1.0 and k > 0 and wf is None:
        wf = make_wf(problem)

    def rhs(t, state, delayed):
        x, y = state[:k], state[k:]
        at = float(a(t))
        dy = at * problem.eval_g(x, y)
        if lam != 0.0:
            xd, yd = delayed[:k], delayed[k:]
            if mu >= 1.0:
                dx = lam * problem.eval_f(t, x, y, xd, yd)
                dy = dy + lam * problem.eval_h(t, x, y, xd, yd)
            else:
                drive = (1.0 - mu) * (at / abar) * wf(x, y) if k > 0 else np.zeros(0)
                if mu > 0.0:
                    drive = mu * problem.eval_f(t, x, y, xd, yd) + drive
                    dy = dy + lam * mu * problem.eval_h(t, x, y, xd, yd)
                dx = lam * drive
        else:
            dx = np.zeros(k)
        return np.concatenate([dx, dy])

    return rhs


def integrate(
    problem: CoupledProblem,
    lam: float,
    mu: float,
    init: History,
    t_end: float,
    steps_per_delay: int = 32,
    domain: Optional[Box] = None,
    wf=None,
) -> Trajectory:
    """Integrate the coupled system forward from a history by RK4 steps.

    Fixed step h = r / steps_per_delay; the final step is shortened to land
    exactly on t_end.  When mu < 1 the averaged drive w_f enters the
    x-equation; pass a memoized wf (see fields.make_wf) to share its cache
    across repeated integrations.
    """
    if lam < 0:
        raise InvalidParameterError(f"lambda must be >= 0, got {lam}")
    if not 0.0 <= mu <= 1.0:
        raise InvalidParameterError(f"mu must be in [0, 1], got {mu}")
    if t_end <= 0:
        raise InvalidParameterError(f"t_end must be positive, got {t_end}")
    if steps_per_delay < 8:
        raise InvalidParameterError(f"steps_per_delay must be >= 8, got {steps_per_delay}")
    r = problem.delay
    if abs(init.delay - r) > 1e-12 * max(1.0, r):
        raise InvalidParameterError(
            f"history covers [-{init.delay}, 0] but the problem delay is {r}"
        )
    h = r / steps_per_delay
    rhs = _make_rhs(problem, lam, mu, wf=wf)

    n_full = int(np.floor(t_end / h + 1e-9))
    partial = t_end - n_full * h
    has_partial = partial > 1e-12 * max(1.0, t_end)

    n_nodes = n_full + 1 + (1 if has_partial else 0)
    times = np.empty(n_nodes)
    times[: n_full + 1] = np.arange(n_full + 1) * h
    if has_partial:
        times[-1] = t_end
    d = problem.dim
    states = np.empty((n_nodes, d))
    slopes = np.empty((n_nodes, d))

    filled = 0  # nodes with completed state/slope

    def past(tau: float) -> np.ndarray:
        if tau <= 1e-14:
            return init.eval(max(tau, -r))
        s = tau / h
        i = int(np.floor(s + 1e-9))
        i = min(i, filled - 1)
        u = s - i
        if u < 1e-9:
            return states[i]
        return _hermite_eval(u, h, states[i], slopes[i], states[i + 1], slopes[i + 1])

    state = init.terminal()
    _check_state(0.0, state, domain)
    states[0] = state
    slopes[0] = rhs(0.0, state, init.eval(-r))
    filled = 1

    for j in range(n_nodes - 1):
        t0 = times[j]
        dt = times[j + 1] - t0
        y0 = states[j]
        k1 = slopes[j]
        delayed_half = past(t0 + 0.5 * dt - r)
        k2 = rhs(t0 + 0.5 * dt, y0 + 0.5 * dt * k1, delayed_half)
        k3 = rhs(t0 + 0.5 * dt, y0 + 0.5 * dt * k2, delayed_half)
        k4 = rhs(t0 + dt, y0 + dt * k3, past(t0 + dt - r))
        y1 = y0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t1 = times[j + 1]
        _check_state(t1, y1, domain)
        states[j + 1] = y1
        slopes[j + 1] = rhs(t1, y1, past(t1 - r))
        filled = j + 2

    return Trajectory(init=init, times=times, states=states, slopes=slopes, dim_x=problem.dim_x)


def _flow(problem: CoupledProblem, point, t: float, coeff, n_steps: int) -> np.ndarray:
    k = problem.dim_x
    state = np.atleast_1d(np.asarray(point, dtype=float)).copy()
    if t == 0.0:
        return state
    dt = t / n_steps

    def rhs(tt, z):
        x, y = z[:k], z[k:]
        return np.concatenate([np.zeros(k), coeff(tt) * problem.eval_g(x, y)])

    tt = 0.0
    for _ in range(n_steps):
        k1 = rhs(tt, state)
        k2 = rhs(tt + 0.5 * dt, state + 0.5 * dt * k1)
        k3 = rhs(tt + 0.5 * dt, state + 0.5 * dt * k2)
        k4 = rhs(tt + dt, state + dt * k3)
        state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        tt += dt
        _check_state(tt, state, None)
    return state


def flow_unperturbed(problem: CoupledProblem, point, t: float, n_steps: int = 2048) -> np.ndarray:
    """Flow of x' = 0, y' = a(t) g(x, y) from a constant initial point."""
    return _flow(problem, point, t, lambda tt: float(problem.a(tt)), n_steps)


def flow_averaged(problem: CoupledProblem, point, t: float, n_steps: int = 2048) -> np.ndarray:
    """Flow of x' = 0, y' = <a> g(x, y); coincides with flow_unperturbed at t = T."""
    abar = problem.abar
    return _flow(problem, point, t, lambda tt: abar, n_steps)
