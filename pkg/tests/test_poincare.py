"""Translation operator, fixed points, discrete index, index identity."""

import json
import math

import numpy as np
import pytest

from ddebranch import (
    Box,
    CoupledProblem,
    History,
    PeriodicFn1D,
    TranslationConfig,
    find_fixed_points,
    translate,
    verify_index_identity,
)
from ddebranch.errors import DegeneracyError, InvalidParameterError, TranslationUndefinedError
from ddebranch.poincare import index_report_json

from conftest import TWO_PI, periodic, scalar_problem

CFG = TranslationConfig(m=16, steps_per_delay=16)


def cubic_problem():
    # y' = a(t)(y - y^3) with <a> = -1; equilibria at 0 and +-1.
    return scalar_problem(lambda y: y - y ** 3)


class TestTranslate:
    def test_zero_field_holds_terminal_value(self):
        prob = scalar_problem(lambda y: 0.0)
        init = History.constant([0.6], 1.0, m=16)
        out = translate(prob, 0.0, 1.0, init, CFG)
        assert np.max(np.abs(out.values - 0.6)) < 1e-12

    def test_equilibrium_is_fixed(self):
        prob = cubic_problem()
        init = History.constant([1.0], 1.0, m=16)
        out = translate(prob, 0.0, 1.0, init, CFG)
        assert init.sup_distance(out) < 1e-10

    def test_mu_endpoints_coincide_for_autonomous_f(self):
        # With f independent of t and a constant, the homotopy endpoints
        # mu = 0 and mu = 1 have identical right-hand sides.
        prob = CoupledProblem(
            dim_x=1, dim_y=1,
            f=lambda t, x, y, xd, yd: np.array([math.sin(y[0])]),
            g=lambda x, y: np.array([x[0] - y[0]]),
            a=PeriodicFn1D.constant(-1.0, TWO_PI),
            period=TWO_PI, delay=1.0,
        )
        init = History.constant([0.2, 0.4], 1.0, m=16)
        out0 = translate(prob, 0.1, 0.0, init, CFG)
        out1 = translate(prob, 0.1, 1.0, init, CFG)
        assert out0.sup_distance(out1) < 1e-10

    def test_blowup_surfaces_as_undefined(self):
        prob = scalar_problem(lambda y: y * y, a_fn=lambda t: 1.0)
        init = History.constant([5.0], 1.0, m=16)
        with pytest.raises(TranslationUndefinedError):
            translate(prob, 0.0, 1.0, init, CFG)


class TestFindFixedPoints:
    def test_constant_histories_at_nu_zeros(self):
        prob = cubic_problem()
        seeds = [History.constant([p], 1.0, m=16) for p in (0.0, 1.0, -1.0)]
        records = find_fixed_points(prob, 0.0, seeds, CFG)
        assert len(records) == 3
        for rec in records:
            assert rec.residual <= 1e-10
            assert not rec.degenerate
            assert rec.eigen_margin > 0

    def test_indices_of_cubic_equilibria(self):
        # With <a> = -1 < 0 the middle equilibrium is stable (index +1)
        # and the outer two are unstable with one multiplier above 1.
        prob = cubic_problem()
        cfg = TranslationConfig(m=16, steps_per_delay=16, fd_step=1e-7)
        seeds = [History.constant([p], 1.0, m=16) for p in (0.0, 1.0, -1.0)]
        records = find_fixed_points(prob, 1e-3, seeds, cfg)
        by_value = {round(float(rec.history.values[0, 0])): rec.index for rec in records}
        assert by_value[0] == 1
        assert by_value[1] == -1
        assert by_value[-1] == -1

    def test_empty_seed_list(self):
        prob = cubic_problem()
        assert find_fixed_points(prob, 0.0, [], CFG) == []

    def test_seed_resolution_mismatch(self):
        prob = cubic_problem()
        seeds = [History.constant([0.0], 1.0, m=32)]
        with pytest.raises(InvalidParameterError):
            find_fixed_points(prob, 0.0, seeds, CFG)

    def test_deduplication(self):
        prob = cubic_problem()
        seeds = [History.constant([p], 1.0, m=16) for p in (0.0, 1e-7, -1e-7)]
        records = find_fixed_points(prob, 0.0, seeds, CFG)
        assert len(records) == 1

    def test_fixed_point_distance_shrinks_with_lambda(self):
        # With a perturbation h the fixed point moves off the nu-zero by
        # an O(lambda) amount.
        prob = scalar_problem(
            lambda y: y - y ** 3,
            h=lambda t, x, y, xd, yd: np.array([math.cos(t)]),
        )
        trivial = History.constant([0.0], 1.0, m=16)
        dists = []
        for lam in (1e-2, 1e-3, 1e-4):
            records = find_fixed_points(prob, lam, [trivial], CFG)
            assert len(records) == 1
            dists.append(records[0].history.sup_distance(trivial))
        assert dists[0] > dists[1] > dists[2] > 0


class TestMuHomotopy:
    def test_fixed_points_stay_in_window(self, sunflower):
        prob = sunflower.coupled
        seed = History.constant([0.0, 0.0], prob.delay, m=16)
        window = Box(lower=[-0.5, -0.5], upper=[0.5, 0.5])
        for mu in (0.0, 0.25, 0.5, 0.75, 1.0):
            records = find_fixed_points(prob, 1e-3, [seed], CFG, mu=mu)
            assert len(records) == 1
            assert all(window.contains(v) for v in records[0].history.values)


class TestIndexIdentity:
    def test_cubic_identity(self):
        prob = cubic_problem()
        cfg = TranslationConfig(m=16, steps_per_delay=16, fd_step=1e-7)
        report = verify_index_identity(prob, 1e-3, Box(lower=[-2.0], upper=[2.0]), cfg)
        assert report["pass"]
        assert report["lhs_sum"] == report["rhs"] == -1
        assert report["n_fixed_points"] == 3
        assert report["sign_abar"] == -1

    def test_lambda_zero_smoke_case(self):
        prob = cubic_problem()
        report = verify_index_identity(prob, 0.0, Box(lower=[-2.0], upper=[2.0]), CFG)
        assert report["pass"]

    def test_degenerate_fixed_point_rejected(self):
        prob = scalar_problem(lambda y: y * y)
        with pytest.raises(DegeneracyError):
            verify_index_identity(prob, 0.0, Box(lower=[-1.0], upper=[1.0]), CFG)

    def test_box_dimension_checked(self):
        prob = cubic_problem()
        with pytest.raises(InvalidParameterError):
            verify_index_identity(prob, 1e-3, Box(lower=[-1, -1], upper=[1, 1]), CFG)

    def test_report_serializes(self):
        prob = cubic_problem()
        report = verify_index_identity(prob, 0.0, Box(lower=[-2.0], upper=[2.0]), CFG)
        payload = json.loads(index_report_json(report))
        assert payload["lhs_sum"] == payload["rhs"]


class TestConfigValidation:
    def test_minimum_resolution(self):
        with pytest.raises(InvalidParameterError):
            TranslationConfig(m=4)

    def test_tolerance_positive(self):
        with pytest.raises(InvalidParameterError):
            TranslationConfig(newton_tol=0.0)
