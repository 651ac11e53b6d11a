"""Brouwer degree computations: all three methods and their cross-checks."""

import json
import math

import numpy as np
import pytest

from ddebranch import (
    Box,
    degree_1d,
    degree_2d_winding,
    degree_auto,
    degree_nd_jacobian,
    nu_field,
    v_lambda_field,
)
from ddebranch.errors import AdmissibilityError, DegeneracyError, InvalidParameterError
from ddebranch.problem import CoupledProblem, PeriodicFn1D

from conftest import SUITE_FIELDS, TWO_PI, box


class TestDegree1D:
    def test_sine_through_zero(self):
        report = degree_1d(math.sin, (-1.0, 1.0))
        assert report.degree == 1
        assert report.method == "sign-1d"

    def test_sine_no_sign_change(self):
        assert degree_1d(math.sin, (1.0, 2.0)).degree == 0

    def test_decreasing_line(self):
        assert degree_1d(lambda p: -p, (-1.0, 1.0)).degree == -1

    def test_vector_valued_input_accepted(self):
        fn = lambda z: np.array([z[0] - 0.25])
        assert degree_1d(fn, (-1.0, 1.0)).degree == 1

    def test_endpoint_zero_rejected(self):
        with pytest.raises(AdmissibilityError):
            degree_1d(lambda p: p - 1.0, (-1.0, 1.0))

    def test_invalid_interval(self):
        with pytest.raises(InvalidParameterError):
            degree_1d(math.sin, (1.0, -1.0))

    def test_zeros_located_with_slopes(self):
        report = degree_1d(lambda p: p - p ** 3, (-2.0, 2.0))
        assert report.degree == -1
        pts = sorted(z["point"][0] for z in report.zeros)
        assert np.allclose(pts, [-1.0, 0.0, 1.0], atol=1e-9)
        signs = {round(z["point"][0]): z["jacobian_sign"] for z in report.zeros}
        assert signs[0] == 1 and signs[1] == -1 and signs[-1] == -1


class TestDegree2DWinding:
    def test_identity(self):
        report = degree_2d_winding(lambda z: z, box([-1, -1], [1, 1]))
        assert report.degree == 1
        assert report.admissibility_margin > 0

    def test_averaged_coupling_field(self):
        fn = lambda z: np.array([z[1] / math.sqrt(3.0), z[0] - z[1]])
        assert degree_2d_winding(fn, box([-1, -1], [1, 1])).degree == -1

    def test_complex_squaring(self):
        fn = lambda z: np.array([z[0] ** 2 - z[1] ** 2, 2 * z[0] * z[1]])
        assert degree_2d_winding(fn, box([-1, -1], [1, 1])).degree == 2

    def test_boundary_zero_rejected(self):
        fn = lambda z: np.array([z[0] - 1.0, z[1]])
        with pytest.raises(AdmissibilityError):
            degree_2d_winding(fn, box([-1, -1], [1, 1]))

    def test_small_boundary_count_rejected(self):
        with pytest.raises(InvalidParameterError):
            degree_2d_winding(lambda z: z, box([-1, -1], [1, 1]), n_boundary=64)

    def test_wrong_dimension(self):
        with pytest.raises(InvalidParameterError):
            degree_2d_winding(lambda z: z, box([-1], [1]))


class TestDegreeNdJacobian:
    def test_identity_3d(self):
        report = degree_nd_jacobian(lambda z: z, box([-1, -1, -1], [1, 1, 1]))
        assert report.degree == 1
        assert len(report.zeros) == 1
        assert np.max(np.abs(report.zeros[0]["point"])) < 1e-9

    def test_negated_identity_3d(self):
        assert degree_nd_jacobian(lambda z: -z, box([-1, -1, -1], [1, 1, 1])).degree == -1

    def test_sine_coupled_matches_winding(self):
        fn = lambda z: np.array([math.sin(z[1]) / math.sqrt(3.0), z[0] - z[1]])
        b = box([-1, -1], [1, 1])
        assert degree_nd_jacobian(fn, b).degree == -1
        assert degree_2d_winding(fn, b).degree == -1

    def test_degenerate_zero_rejected(self):
        fn = lambda z: np.array([z[0] ** 3, z[1]])
        with pytest.raises(DegeneracyError):
            degree_nd_jacobian(fn, box([-1, -1], [1, 1]))

    def test_small_grid_rejected(self):
        with pytest.raises(InvalidParameterError):
            degree_nd_jacobian(lambda z: z, box([-1, -1], [1, 1]), grid_per_axis=4)


class TestCrossMethod:
    def test_method_agreement_on_suite(self):
        for name, fn, b, expected in SUITE_FIELDS:
            winding = degree_2d_winding(fn, b).degree
            jacobian = degree_nd_jacobian(fn, b).degree
            assert winding == expected, name
            assert jacobian == expected, name

    def test_auto_dispatch(self):
        assert degree_auto(math.sin, box([-1], [1])).method == "sign-1d"
        assert degree_auto(lambda z: z, box([-1, -1], [1, 1])).method == "winding-2d"
        assert degree_auto(lambda z: z, box([-1, -1, -1], [1, 1, 1])).method == "jacobian-nd"

    def test_excision(self):
        fn = lambda z: np.array([z[1] / math.sqrt(3.0), z[0] - z[1]])
        whole = degree_2d_winding(fn, box([-1, -1], [1, 1])).degree
        left = degree_2d_winding(fn, box([-1, -1], [0.3, 1])).degree
        right = degree_2d_winding(fn, box([0.3, -1], [1, 1])).degree
        assert whole == left + right

    def test_product_sign_law(self):
        # For nu(p, q) = (c*w(q), p - q) with scalar w:
        #   deg(nu, box) = -sign(c) * deg(w, interval).
        w_deg = degree_1d(math.sin, (-1.0, 1.0)).degree
        for c in (1.0 / math.sqrt(3.0), -0.7):
            fn = lambda z, c=c: np.array([c * math.sin(z[1]), z[0] - z[1]])
            got = degree_2d_winding(fn, box([-1, -1], [1, 1])).degree
            assert got == -int(np.sign(c)) * w_deg


class TestVLambdaInvariance:
    def _problem(self):
        return CoupledProblem(
            dim_x=1, dim_y=1,
            f=lambda t, x, y, xd, yd: np.array([y[0]]),
            g=lambda x, y: np.array([x[0] - y[0]]),
            a=PeriodicFn1D.constant(-1.0, TWO_PI),
            period=TWO_PI, delay=1.0,
        )

    def test_scaling_invariance(self):
        prob = self._problem()
        b = box([-1, -1], [1, 1])
        degs = [
            degree_2d_winding(v_lambda_field(prob, lam, n_quad=16).negated(), b).degree
            for lam in (0.1, 1.0, 10.0)
        ]
        assert degs[0] == degs[1] == degs[2]

    def test_sign_relation_to_nu(self):
        prob = self._problem()
        b = box([-1, -1], [1, 1])
        deg_v1 = degree_2d_winding(v_lambda_field(prob, 1.0, n_quad=16).negated(), b).degree
        deg_nu = degree_2d_winding(nu_field(prob, n_quad=16).negated(), b).degree
        # deg(-v_1) = sign(<a>)^k * deg(-nu) with k = 1 and <a> = -1 here.
        assert deg_v1 == int(np.sign(prob.abar)) ** prob.dim_x * deg_nu


class TestReportSerialization:
    def test_json_round_trip(self):
        report = degree_1d(lambda p: p - p ** 3, (-2.0, 2.0))
        payload = json.loads(report.to_json())
        assert payload["degree"] == -1
        assert payload["method"] == "sign-1d"
        assert payload["admissibility_margin"] > 0
        assert len(payload["zeros"]) == 3

    def test_winding_report_has_no_zeros(self):
        report = degree_2d_winding(lambda z: z, box([-1, -1], [1, 1]))
        payload = json.loads(report.to_json())
        assert "zeros" not in payload
