"""Tests for the exact memory-load tradeoff analytics."""

import csv
import math
from fractions import Fraction

import pytest

from splfr.pda import man_pda, memory_load
from splfr.tradeoff import (
    COMPOSED_GAP_CONSTANTS,
    SCHEMES,
    CurvePoint,
    TradeoffError,
    comb0,
    cutset_bound,
    emit_curves,
    f_bound,
    smooth_bound_ratio_max,
    simple_converse_ratio_max,
    coded_uncoded_ratio_max,
    coded_uncoded_threshold,
    lower_convex_envelope,
    man_curve,
    man_points,
    pda_lower_bound,
    ratio_checks,
    subpacketization_compare,
    scheme_curve,
    scheme_points,
    uncoded_points,
)

F = Fraction


class TestComb0:
    def test_regular(self):
        assert comb0(5, 2) == 10

    def test_out_of_range(self):
        assert comb0(2, 5) == 0
        assert comb0(-1, 0) == 0


class TestCornerPoints:
    def test_man_2_2(self):
        assert man_points(2, 2) == [
            CurvePoint(F(1), F(2)),
            CurvePoint(F(3, 2), F(1, 2)),
            CurvePoint(F(2), F(0)),
        ]

    def test_man_matches_array_measure(self):
        # every corner must coincide with the exact (M, R) of the t-subset array
        for n, k in [(4, 3), (3, 5), (6, 4)]:
            pts = man_points(n, k)
            for t in range(k + 1):
                assert (pts[t].m, pts[t].r) == memory_load(man_pda(k, t), n)

    def test_uncoded_2_2(self):
        assert uncoded_points(2, 2) == [
            CurvePoint(F(0), F(2)),
            CurvePoint(F(1), F(1, 2)),
            CurvePoint(F(2), F(0)),
        ]

    def test_domain(self):
        with pytest.raises(TradeoffError):
            man_points(1, 2)


class TestEnvelope:
    def test_collinear_middle_point_dropped(self):
        curve = lower_convex_envelope(
            [CurvePoint(F(0), F(2)), CurvePoint(F(1), F(1)), CurvePoint(F(2), F(0))]
        )
        assert curve.corners == (CurvePoint(F(0), F(2)), CurvePoint(F(2), F(0)))

    def test_dominated_point_dropped(self):
        curve = lower_convex_envelope(
            [CurvePoint(F(0), F(2)), CurvePoint(F(1), F(3)), CurvePoint(F(2), F(0))]
        )
        assert curve.corners == (CurvePoint(F(0), F(2)), CurvePoint(F(2), F(0)))

    def test_duplicate_memory_keeps_lower(self):
        curve = lower_convex_envelope(
            [CurvePoint(F(0), F(2)), CurvePoint(F(0), F(1)), CurvePoint(F(1), F(0))]
        )
        assert curve.corners[0] == CurvePoint(F(0), F(1))

    def test_man_points_all_corners(self):
        # the t-subset points are already in convex position
        for n, k in [(4, 3), (2, 2), (10, 6), (3, 8)]:
            curve = man_curve(n, k)
            assert curve.corners == tuple(man_points(n, k))

    def test_evaluate_interpolates(self):
        curve = man_curve(2, 2)
        assert curve.evaluate(F(5, 4)) == F(5, 4)  # midpoint of (1,2)-(3/2,1/2)
        assert curve.evaluate(1) == 2
        assert curve.evaluate(2) == 0
        with pytest.raises(TradeoffError):
            curve.evaluate(F(1, 2))

    def test_empty(self):
        with pytest.raises(TradeoffError):
            lower_convex_envelope([])


class TestConverseBounds:
    def test_pda_bound_2_2(self):
        for m in (F(1), F(5, 4), F(3, 2), F(2)):
            assert pda_lower_bound(2, 2, m) == 2 * (2 - m) / (1 + 2 * (m - 1))

    def test_pda_bound_endpoints(self):
        assert pda_lower_bound(4, 3, 1) == 3
        assert pda_lower_bound(4, 3, 4) == 0

    def test_cutset_10_1(self):
        # at M=1 the maximizing cut uses u=5 users: (5*10 - 25)/9
        assert cutset_bound(10, 10, 1) == F(25, 9)

    def test_cutset_2_2(self):
        for m in (F(1), F(3, 2), F(2)):
            assert cutset_bound(2, 2, m) == 2 - m

    def test_f_bound_touches_cutset_lines(self):
        # f(N/(2u+1)) = (N/(N-1)) u(u+1)/(2u+1) for each cut size u
        n = 10
        for u in range(1, n // 2):
            m = F(n, 2 * u + 1)
            want = F(n, n - 1) * F(u * (u + 1), 2 * u + 1)
            assert f_bound(n, m) == want

    def test_f_bound_domain(self):
        with pytest.raises(TradeoffError):
            f_bound(10, F(1, 2))

    def test_f_below_cutset_on_its_domain(self):
        n, k = 8, 8
        for i in range(1, 50):
            m = 1 + F(i * (n - 1), 50)
            if m < n:
                assert f_bound(n, m) <= cutset_bound(n, k, m)

    def test_bound_domain_errors(self):
        with pytest.raises(TradeoffError):
            pda_lower_bound(4, 3, F(1, 2))
        with pytest.raises(TradeoffError):
            cutset_bound(4, 3, 5)


class TestSchemePoints:
    def test_seckey_equals_splfr(self):
        assert scheme_points("seckey", 5, 4) == scheme_points("splfr", 5, 4)

    def test_yma_2_2_t1(self):
        pts = scheme_points("yma", 2, 2)
        assert pts[1] == CurvePoint(F(1), F(1, 2))

    def test_wsjtc_matches_yma(self):
        assert scheme_points("wsjtc", 4, 6) == scheme_points("yma", 4, 6)

    def test_privkey_rows_include_zero_memory_point(self):
        for scheme in ("privkey-plfr", "privkey-pfr"):
            pts = scheme_points(scheme, 3, 4)
            assert pts[0] == CurvePoint(F(0), F(3))

    def test_virtual_endpoint(self):
        pts = scheme_points("virtual", 3, 2)
        assert pts[-1] == CurvePoint(F(3), F(0))

    def test_unknown_scheme(self):
        with pytest.raises(TradeoffError):
            scheme_points("nope", 2, 2)

    def test_all_schemes_build_curves(self):
        for scheme in SCHEMES:
            curve = scheme_curve(scheme, 4, 3)
            assert curve.corners[-1].r == 0


class TestRatios:
    def test_simple_converse_examples(self):
        assert simple_converse_ratio_max(30, 10, per_unit=50) <= 1
        assert simple_converse_ratio_max(10, 30, per_unit=50) <= 1

    def test_coded_uncoded_small(self):
        assert coded_uncoded_ratio_max(6, 3) <= 2
        assert coded_uncoded_ratio_max(4, 3) <= F(5, 2)
        assert coded_uncoded_ratio_max(3, 3) <= 3

    def test_coded_uncoded_threshold(self):
        assert coded_uncoded_threshold(6, 3) == 2
        assert coded_uncoded_threshold(4, 3) == F(5, 2)
        assert coded_uncoded_threshold(3, 3) == 3

    def test_coded_uncoded_domain(self):
        with pytest.raises(TradeoffError):
            coded_uncoded_ratio_max(2, 3)

    def test_smooth_bound_small(self):
        assert smooth_bound_ratio_max(3, 5, per_unit=100) < 8

    def test_smooth_bound_domain(self):
        with pytest.raises(TradeoffError):
            smooth_bound_ratio_max(5, 3)

    def test_ratio2_n2_k2(self):
        report = ratio_checks(2, 2, per_unit=100)
        assert report["checks"]["ratio2"]["max"] == 2
        assert report["ok"]

    def test_ratio_checks_6_3(self):
        report = ratio_checks(6, 3, per_unit=50)
        assert report["checks"]["coded_uncoded"]["ok"]
        assert "smooth_bound" not in report["checks"]
        assert report["ok"]

    def test_composed_constants_present(self):
        report = ratio_checks(2, 2, per_unit=10)
        assert report["composed_gap_constants"] == COMPOSED_GAP_CONSTANTS
        assert COMPOSED_GAP_CONSTANTS["N=K>=3"] == pytest.approx(6.02652)


class TestSubpacketization:
    def test_k4_t2(self):
        out = subpacketization_compare(4, 2)
        assert (out["b_man"], out["b_lsub"]) == (6, 2)
        assert (out["r_man"], out["r_lsub"]) == (F(2, 3), F(1))
        assert out["identity_ok"] and out["stirling_ok"]

    def test_k6_t3(self):
        out = subpacketization_compare(6, 3)
        assert (out["b_man"], out["b_lsub"]) == (20, 4)
        assert out["identity_ok"] and out["stirling_ok"]

    def test_k6_t2(self):
        out = subpacketization_compare(6, 2)
        assert out["r_man"] == F(2, 3) * out["r_lsub"]
        assert out["identity_ok"]

    def test_domain(self):
        with pytest.raises(TradeoffError):
            subpacketization_compare(7, 3)
        with pytest.raises(TradeoffError):
            subpacketization_compare(4, 1)

    def test_stirling_constant_is_lower_bound(self):
        # the floored rational must sit below e^(1/3) * 2 pi
        c = Fraction(math.floor(math.e ** (1 / 3) * 2 * math.pi * 10**6), 10**6)
        assert float(c) <= math.e ** (1 / 3) * 2 * math.pi


class TestEmit:
    def test_csv_and_svg(self, tmp_path):
        out = emit_curves(4, 3, ["splfr", "yma"], str(tmp_path), bound_samples=10)
        with open(out["csv"]) as fh:
            rows = list(csv.DictReader(fh))
        by_scheme = {}
        for row in rows:
            by_scheme.setdefault(row["scheme"], []).append(row)
        assert len(by_scheme["splfr"]) == len(scheme_curve("splfr", 4, 3).corners)
        assert len(by_scheme["yma"]) == len(scheme_curve("yma", 4, 3).corners)
        assert len(by_scheme["pda-bound"]) == 11
        # exact columns round-trip as fractions
        for row in by_scheme["splfr"]:
            assert abs(float(Fraction(row["M_exact"])) - float(row["M"])) < 1e-9
        svg = open(out["svg"]).read()
        assert svg.startswith("<svg") and "polyline" in svg
