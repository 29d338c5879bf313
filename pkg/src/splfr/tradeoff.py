"""Exact-rational memory-load analytics.

Achievable curves (corner points plus lower convex envelopes), converse
bounds, ratio/gap checks, subpacketization comparison, and CSV/SVG export.
All curve math is exact over fractions.Fraction; decimals appear only at
serialization time.
"""

from __future__ import annotations

import csv
import math
import os
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from .pda import lsub_parameters


class TradeoffError(ValueError):
    pass


class CurvePoint(NamedTuple):
    m: Fraction  # memory, in files
    r: Fraction  # load, in files


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def comb0(n: int, k: int) -> int:
    """Binomial coefficient with the convention C(n, k) = 0 for k > n or n < 0."""
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


@dataclass(frozen=True)
class TradeoffCurve:
    """Piecewise-linear convex memory-load curve given by its corner points."""

    corners: tuple[CurvePoint, ...]

    def __post_init__(self):
        ms = [p.m for p in self.corners]
        if ms != sorted(set(ms)):
            raise TradeoffError("corner memories must be strictly increasing")

    @property
    def m_min(self) -> Fraction:
        return self.corners[0].m

    @property
    def m_max(self) -> Fraction:
        return self.corners[-1].m

    def evaluate(self, m) -> Fraction:
        """Linear interpolation between corners (memory sharing)."""
        m = _frac(m)
        if not self.m_min <= m <= self.m_max:
            raise TradeoffError(f"memory {m} outside [{self.m_min}, {self.m_max}]")
        ms = [p.m for p in self.corners]
        idx = bisect_right(ms, m)
        if idx == len(ms):
            return self.corners[-1].r
        left, right = self.corners[idx - 1], self.corners[idx]
        if m == left.m:
            return left.r
        theta = (m - left.m) / (right.m - left.m)
        return left.r + theta * (right.r - left.r)

    def restrict_corners(self, m_lo, m_hi) -> tuple[CurvePoint, ...]:
        lo, hi = _frac(m_lo), _frac(m_hi)
        return tuple(p for p in self.corners if lo <= p.m <= hi)


def lower_convex_envelope(points: Iterable[CurvePoint]) -> TradeoffCurve:
    """Lower hull of a point set in the (memory, load) plane.

    Between corners the curve is the linear interpolation, matching the
    memory-sharing argument; collinear middle points are dropped.
    """
    pts = sorted((_frac(m), _frac(r)) for m, r in points)
    if not pts:
        raise TradeoffError("no points")
    # keep only the lowest load at each memory
    dedup: list[tuple[Fraction, Fraction]] = []
    for m, r in pts:
        if dedup and dedup[-1][0] == m:
            if r < dedup[-1][1]:
                dedup[-1] = (m, r)
        else:
            dedup.append((m, r))
    hull: list[tuple[Fraction, Fraction]] = []
    for p in dedup:
        while len(hull) >= 2:
            (m1, r1), (m2, r2) = hull[-2], hull[-1]
            # pop while the middle point lies on or above segment (m1,r1)-(p)
            if (r2 - r1) * (p[0] - m1) >= (p[1] - r1) * (m2 - m1):
                hull.pop()
            else:
                break
        hull.append(p)
    return TradeoffCurve(tuple(CurvePoint(m, r) for m, r in hull))


# -- achievable corner points --------------------------------------------


def man_points(n: int, k: int) -> list[CurvePoint]:
    """Corner points (1 + t(N-1)/K, (K-t)/(t+1)) for t = 0..K."""
    if n < 2 or k < 1:
        raise TradeoffError(f"need N >= 2 and K >= 1, got N={n}, K={k}")
    return [
        CurvePoint(1 + Fraction(t * (n - 1), k), Fraction(k - t, t + 1))
        for t in range(k + 1)
    ]


def uncoded_points(n: int, k: int) -> list[CurvePoint]:
    """Corner points (tN/K, (K-t)/(t+1)) of the uncoded-placement optimum."""
    return [
        CurvePoint(Fraction(t * n, k), Fraction(k - t, t + 1)) for t in range(k + 1)
    ]


def man_curve(n: int, k: int) -> TradeoffCurve:
    return lower_convex_envelope(man_points(n, k))


def uncoded_curve(n: int, k: int) -> TradeoffCurve:
    return lower_convex_envelope(uncoded_points(n, k))


# -- converse bounds ------------------------------------------------------


def pda_lower_bound(n: int, k: int, m) -> Fraction:
    """Load lower bound K(N-M)/(N-1+K(M-1)) for any array-based scheme."""
    m = _frac(m)
    if not 1 <= m <= n:
        raise TradeoffError(f"memory {m} outside [1, {n}]")
    return Fraction(k * (n - m), (n - 1) + k * (m - 1))


def cutset_bound(n: int, k: int, m) -> Fraction:
    """Cut-set load bound max_u (uN - u^2 M)/(N-1), floored at zero."""
    m = _frac(m)
    if not 1 <= m <= n:
        raise TradeoffError(f"memory {m} outside [1, {n}]")
    best = Fraction(0)
    for u in range(1, min(n // 2, k) + 1):
        best = max(best, Fraction(u * n - u * u * m, n - 1))
    return best


def f_bound(n: int, m) -> Fraction:
    """Smooth envelope (1/4)(N/(N-1))(N/M - M/N) of the cut-set lines."""
    m = _frac(m)
    lo = Fraction(n, 2 * (n // 2) + 1)
    if not lo <= m <= n:
        raise TradeoffError(f"memory {m} outside [{lo}, {n}]")
    return Fraction(1, 4) * Fraction(n, n - 1) * (Fraction(n, 1) / m - m / Fraction(n))


# -- known-scheme curves (comparison table) -------------------------------

SCHEMES = (
    "splfr",
    "seckey",
    "privkey-plfr",
    "privkey-pfr",
    "yma",
    "wsjtc",
    "virtual",
)


def scheme_points(scheme: str, n: int, k: int) -> list[CurvePoint]:
    """Corner points of a known achievable scheme, before the envelope.

    The privacy-key rows additionally include the trivial point (0, N)
    achievable with unit subpacketization.
    """
    if scheme in ("splfr", "seckey"):
        return man_points(n, k)
    if scheme in ("yma", "wsjtc"):
        # identical load formulas; wsjtc serves linear-combination demands
        return [
            CurvePoint(
                Fraction(t * n, k),
                Fraction(comb0(k, t + 1) - comb0(k - min(n, k), t + 1), comb0(k, t)),
            )
            for t in range(k + 1)
        ]
    if scheme == "privkey-plfr":
        pts = [
            CurvePoint(
                1 + Fraction(t * (n - 1), k),
                Fraction(comb0(k, t + 1) - comb0(k - min(n, k), t + 1), comb0(k, t)),
            )
            for t in range(k + 1)
        ]
        return [CurvePoint(Fraction(0), Fraction(n))] + pts
    if scheme == "privkey-pfr":
        pts = [
            CurvePoint(
                1 + Fraction(t * (n - 1), k),
                Fraction(
                    comb0(k, t + 1) - comb0(k - min(n - 1, k), t + 1), comb0(k, t)
                ),
            )
            for t in range(k + 1)
        ]
        return [CurvePoint(Fraction(0), Fraction(n))] + pts
    if scheme == "virtual":
        # note: guarantees a weaker per-user privacy notion than the rest
        return [
            CurvePoint(
                Fraction(t, k),
                Fraction(
                    comb0(k * n, t + 1) - comb0((k - 1) * n, t + 1), comb0(k * n, t)
                ),
            )
            for t in range(k * n + 1)
        ]
    raise TradeoffError(f"unknown scheme {scheme!r}")


def scheme_curve(scheme: str, n: int, k: int) -> TradeoffCurve:
    return lower_convex_envelope(scheme_points(scheme, n, k))


# -- ratio and gap checks -------------------------------------------------


def _grid(lo: Fraction, hi: Fraction, per_unit: int) -> list[Fraction]:
    """Rational grid over [lo, hi] with per_unit points per unit interval."""
    count = max(1, int((hi - lo) * per_unit))
    return [lo + Fraction(i, per_unit) for i in range(count + 1) if lo + Fraction(i, per_unit) <= hi]


def simple_converse_ratio_max(n: int, k: int, per_unit: int = 1000) -> Fraction:
    """Max of R(M)(M-1)/(N-M) over corners and a rational grid of (1, N)."""
    curve = man_curve(n, k)
    candidates = {p.m for p in curve.corners}
    candidates.update(_grid(Fraction(1), Fraction(n), per_unit))
    best = Fraction(0)
    for m in candidates:
        if not 1 <= m < n:
            continue
        value = curve.evaluate(m) * (m - 1) / (n - m)
        best = max(best, value)
    return best


def coded_uncoded_ratio_max(n: int, k: int) -> Fraction:
    """Max of the coded-over-uncoded load ratio on [1, N).

    Both curves are piecewise linear, so the ratio is monotone between
    breakpoints and the maximum is attained at a corner of either curve.
    """
    if not n >= k >= 2:
        raise TradeoffError(f"need N >= K >= 2, got N={n}, K={k}")
    coded = man_curve(n, k)
    uncoded = uncoded_curve(n, k)
    candidates = {p.m for p in coded.corners} | {p.m for p in uncoded.corners}
    candidates.add(Fraction(1))
    best = Fraction(0)
    for m in candidates:
        if not 1 <= m < n:
            continue
        denom = uncoded.evaluate(m)
        if denom > 0:
            best = max(best, coded.evaluate(m) / denom)
    return best


def coded_uncoded_threshold(n: int, k: int) -> Fraction:
    if n >= k + 2:
        return Fraction(2)
    if n == k + 1:
        return Fraction(5, 2)
    return Fraction(3)  # N == K >= 3


def smooth_bound_ratio_max(n: int, k: int, per_unit: int = 1000) -> Fraction:
    """Max of R(M)/f(M) over corners, bound breakpoints, and a grid of [2, N)."""
    if not (n < k and n >= 3):
        raise TradeoffError(f"needs N < K and N >= 3, got N={n}, K={k}")
    curve = man_curve(n, k)
    candidates = {p.m for p in curve.corners}
    # breakpoints N/(2u±1) of the piecewise cut-set envelope
    for u in range(1, n // 2 + 1):
        candidates.add(Fraction(n, 2 * u + 1))
        candidates.add(Fraction(n, 2 * u - 1))
    candidates.update(_grid(Fraction(2), Fraction(n), per_unit))
    best = Fraction(0)
    for m in candidates:
        if not 2 <= m < n:
            continue
        best = max(best, curve.evaluate(m) / f_bound(n, m))
    return best


#: Composed multiplicative-gap constants.  They inherit the external
#: uncoded-placement-versus-optimal factor 2.00884, which is used as a
#: literal and not re-derived here; the computable factors are the
#: ratio checks above.
EXTERNAL_OPTIMALITY_FACTOR = 2.00884
COMPOSED_GAP_CONSTANTS = {
    "K=1": 1.0,
    "N=K=2": 2.0,
    "N=K>=3": 6.02652,
    "N=K+1": 5.0221,
    "N>=K+2": 4.01768,
    "N<K, M in [2,N)": 8.0,
}


def ratio_checks(n: int, k: int, per_unit: int = 1000) -> dict:
    """Run every ratio check that applies to (N, K); exact rational maxima."""
    report: dict = {"n": n, "k": k, "checks": {}}
    checks = report["checks"]

    m5 = simple_converse_ratio_max(n, k, per_unit)
    checks["simple_converse"] = {"max": m5, "bound": Fraction(1), "ok": m5 <= 1}

    # the coded/uncoded ratio bound needs N >= K >= 2 but excludes N = K = 2,
    # which is covered by the dedicated ratio2 check below
    if n >= k >= 2 and (n, k) != (2, 2):
        m6 = coded_uncoded_ratio_max(n, k)
        bound = coded_uncoded_threshold(n, k)
        checks["coded_uncoded"] = {"max": m6, "bound": bound, "ok": m6 <= bound}

    if n < k and n >= 3:
        m8 = smooth_bound_ratio_max(n, k, per_unit)
        checks["smooth_bound"] = {"max": m8, "bound": Fraction(8), "ok": m8 < 8}

    if n == k == 2:
        # piecewise closed form: max over [1, 3/2] of (5 - 3M)/(2 - M) is 2 at M=1
        curve = man_curve(2, 2)
        candidates = _grid(Fraction(1), Fraction(3, 2), per_unit) + [
            p.m for p in curve.corners
        ]
        best = max(
            curve.evaluate(m) / cutset_bound(2, 2, m)
            for m in candidates
            if 1 <= m <= Fraction(3, 2)
        )
        checks["ratio2"] = {"max": best, "bound": Fraction(2), "ok": best == 2}

    report["ok"] = all(c["ok"] for c in checks.values())
    report["composed_gap_constants"] = COMPOSED_GAP_CONSTANTS
    return report


# -- subpacketization comparison ------------------------------------------


def subpacketization_compare(k: int, t: int) -> dict:
    """Compare the t-subset construction with the low-subpacketization one.

    Requires t | k and t in [2, k-1].  Verifies the exact load identity
    R_man = (t/(t+1)) R_lsub and certifies the Stirling-based inequality
    B_man >= B_lsub * (K/t)^{3/2} (K/A)^A / (e^{1/6} sqrt(2 pi (K-t)))
    with A = max(t, K-t), by squaring and replacing e^{1/3} * 2 pi with a
    rational lower bound (so a reported pass is a true inequality).
    """
    if k % t != 0 or not 2 <= t <= k - 1:
        raise TradeoffError(f"need t | k and t in [2, k-1], got k={k}, t={t}")
    b_man = math.comb(k, t)
    _, r_lsub, b_lsub = lsub_parameters(k, t)
    r_man = Fraction(k - t, t + 1)
    identity_ok = r_man == Fraction(t, t + 1) * r_lsub

    a = max(t, k - t)
    # rational lower bound on e^(1/3) * 2*pi, floored at 1e-6 granularity
    c_low = Fraction(math.floor(math.e ** (1 / 3) * 2 * math.pi * 10**6), 10**6)
    lhs = Fraction(b_man) ** 2 * c_low * (k - t)
    rhs = Fraction(b_lsub) ** 2 * Fraction(k, t) ** 3 * Fraction(k, a) ** (2 * a)
    stirling_ok = lhs >= rhs

    return {
        "k": k,
        "t": t,
        "b_man": b_man,
        "b_lsub": b_lsub,
        "r_man": r_man,
        "r_lsub": r_lsub,
        "identity_ok": identity_ok,
        "stirling_ok": stirling_ok,
    }


# -- CSV / SVG export -----------------------------------------------------


def _dec(x: Fraction) -> str:
    return f"{x.numerator / x.denominator:.12f}"


def emit_curves(
    n: int,
    k: int,
    schemes: Sequence[str],
    out_dir: str,
    bound_samples: int = 200,
) -> dict:
    """Write corner-point CSV and an SVG chart for the selected schemes.

    The array-class converse and the cut-set bound are included as
    reference series, sampled on a uniform grid of [1, N].
    """
    os.makedirs(out_dir, exist_ok=True)
    series: list[tuple[str, list[CurvePoint]]] = []
    for scheme in schemes:
        curve = scheme_curve(scheme, n, k)
        series.append((scheme, list(curve.corners)))

    for name, fn in (
        ("pda-bound", lambda m: pda_lower_bound(n, k, m)),
        ("cutset-bound", lambda m: cutset_bound(n, k, m)),
    ):
        pts = []
        for i in range(bound_samples + 1):
            m = 1 + Fraction(i * (n - 1), bound_samples)
            pts.append(CurvePoint(m, fn(m)))
        series.append((name, pts))

    csv_path = os.path.join(out_dir, f"curves_n{n}_k{k}.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scheme", "M", "R", "M_exact", "R_exact"])
        for name, pts in series:
            for p in pts:
                writer.writerow([name, _dec(p.m), _dec(p.r), str(p.m), str(p.r)])

    svg_path = os.path.join(out_dir, f"curves_n{n}_k{k}.svg")
    with open(svg_path, "w") as fh:
        fh.write(_render_svg(n, k, series))
    return {"csv": csv_path, "svg": svg_path, "series": [s for s, _ in series]}


_SVG_COLORS = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
)


def _render_svg(n: int, k: int, series) -> str:
    width, height, pad = 720, 480, 60
    max_m = max(float(p.m) for _, pts in series for p in pts)
    max_r = max(float(p.r) for _, pts in series for p in pts) or 1.0

    def sx(m: float) -> float:
        return pad + (width - 2 * pad) * m / max_m

    def sy(r: float) -> float:
        return height - pad - (height - 2 * pad) * r / max_r

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height-pad}" x2="{width-pad}" y2="{height-pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height-pad}" stroke="black"/>',
        f'<text x="{width//2}" y="{height-15}" text-anchor="middle" font-size="14">'
        f"memory M (files), N={n}, K={k}</text>",
        f'<text x="18" y="{height//2}" font-size="14" transform="rotate(-90 18 {height//2})" '
        f'text-anchor="middle">load R (files)</text>',
    ]
    for idx, (name, pts) in enumerate(series):
        color = _SVG_COLORS[idx % len(_SVG_COLORS)]
        coords = " ".join(f"{sx(float(p.m)):.2f},{sy(float(p.r)):.2f}" for p in pts)
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>'
        )
        parts.append(
            f'<text x="{width-pad+5}" y="{pad+15*idx}" font-size="11" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
