import math

import numpy as np
import pytest

from trend.divergence import ScoreReport, jsd, kld, trend_score
from trend.fitting import DimensionFit, FitStatus, FittedModel
from trend.tgn import DistributionKind, TgnParams, effective_support, pdf

INF = math.inf
TGN = DistributionKind.TRUNCATED_GENERALIZED_NORMAL


def gaussian(mean, std=1.0):
    # beta=2 encoding: the family's scale is std * sqrt(2)
    return TgnParams(mean, std * math.sqrt(2.0), 2.0)


def random_pair(rng):
    def one():
        sigma = float(rng.uniform(0.1, 1.0))
        beta = float(rng.uniform(0.4, 3.0))
        mu = float(rng.uniform(-1.0, 2.0) * sigma)
        if rng.random() < 0.5:
            return TgnParams(mu, sigma, beta, 0.0, INF)
        return TgnParams(mu, sigma, beta, 0.0, max(mu, 0.0) + float(rng.uniform(1.0, 5.0)) * sigma)
    return one(), one()


def test_kld_zero_for_identical():
    p = TgnParams(0.3, 0.4, 1.2, 0.0, INF)
    assert kld(p, p) <= 1e-9


def test_kld_gaussian_mean_shift():
    # analytic: (mu1 - mu2)**2 / 2 for unit variances
    assert kld(gaussian(0.0), gaussian(1.0)) == pytest.approx(0.5, abs=1e-6)


def test_kld_exponential_pair():
    # rate 1 vs rate 2: log(l1/l2) + l2/l1 - 1 = 1 - log 2
    p = TgnParams(0.0, 1.0, 1.0, 0.0, INF)
    q = TgnParams(0.0, 0.5, 1.0, 0.0, INF)
    assert kld(p, q) == pytest.approx(1.0 - math.log(2.0), abs=1e-6)


def test_kld_support_mismatch_is_infinite():
    wide = TgnParams(0.5, 0.3, 1.5, 0.0, 3.0)
    narrow = TgnParams(0.5, 0.3, 1.5, 0.0, 2.0)
    assert kld(wide, narrow) == math.inf
    assert math.isfinite(kld(narrow, wide))


def test_jsd_identical_and_disjoint():
    p = TgnParams(0.5, 0.2, 1.5, 0.0, 1.0)
    q = TgnParams(2.5, 0.2, 1.5, 2.0, 3.0)
    assert jsd(p, p) <= 1e-9
    assert jsd(p, q) == pytest.approx(1.0, abs=1e-9)


def test_jsd_symmetric_bit_exact():
    rng = np.random.default_rng(17)
    for _ in range(25):
        p, q = random_pair(rng)
        assert jsd(p, q) == jsd(q, p)


def _riemann_jsd(p, q, m=1 << 20):
    # Uniform midpoint grid over the region holding all but ~1e-18 of both
    # masses.  The full exact-zero reach (exponent 700) would spread the
    # grid over tens of thousands of units for small beta and starve the
    # peaks of points, so the oracle clips at exponent 45 instead; the
    # discarded tails contribute less than 1e-17 to the divergence.
    def reach_interval(params):
        r = params.sigma * 45.0 ** (1.0 / params.beta)
        return max(params.a1, params.mu - r), min(params.a2, params.mu + r)

    (lo_p, hi_p), (lo_q, hi_q) = reach_interval(p), reach_interval(q)
    lo, hi = min(lo_p, lo_q), max(hi_p, hi_q)
    # segment edges sit on the jump/cusp points so the midpoint rule
    # only ever sees smooth integrands
    cuts = sorted({c for c in (p.mu, q.mu, p.a1, p.a2, q.a1, q.a2)
                   if np.isfinite(c) and lo < c < hi})
    edges = [lo] + cuts + [hi]
    total = 0.0
    for left, right in zip(edges[:-1], edges[1:]):
        count = max(int(m * (right - left) / (hi - lo)), 1024)
        xs = left + (np.arange(count) + 0.5) * (right - left) / count
        fp, fq = pdf(p, xs), pdf(q, xs)
        mix = 0.5 * (fp + fq)
        with np.errstate(divide="ignore", invalid="ignore"):
            term = np.where(fp > 0, fp * np.log2(fp / mix), 0.0) \
                + np.where(fq > 0, fq * np.log2(fq / mix), 0.0)
        total += 0.5 * float(term.sum()) * (right - left) / count
    return total


def test_jsd_gaussians_against_riemann_grid():
    p, q = gaussian(0.0), gaussian(1.0)
    value = jsd(p, q)
    assert 0.0 < value < 1.0
    assert value == pytest.approx(_riemann_jsd(p, q), abs=1e-9)


def test_jsd_adaptive_matches_riemann_on_random_pairs():
    rng = np.random.default_rng(23)
    for _ in range(50):
        p, q = random_pair(rng)
        assert jsd(p, q) == pytest.approx(_riemann_jsd(p, q), abs=1e-6)


def test_jsd_bounds_on_random_pairs():
    rng = np.random.default_rng(31)
    for _ in range(100):
        p, q = random_pair(rng)
        value = jsd(p, q)
        assert 0.0 <= value <= 1.0


def test_jsd_nondecreasing_in_location_gap():
    p = TgnParams(0.0, 1.0, 1.5)
    values = [jsd(p, TgnParams(0.35 * k, 1.0, 1.5)) for k in range(10)]
    assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))


def _model(params_list, kind=TGN, tag="", statuses=None):
    dims = []
    for i, p in enumerate(params_list):
        status = statuses[i] if statuses else FitStatus.OK
        dims.append(DimensionFit(p, 0.0, 100, 0, status is FitStatus.OK, status))
    return FittedModel(tuple(dims), kind, tag)


def test_trend_score_self_is_zero():
    params = [TgnParams(0.3, 0.4, 1.1, 0.0, 5.0), TgnParams(0.5, 0.2, 2.2, 0.0, 4.0)]
    model = _model(params, tag="self")
    report = trend_score(model, model)
    assert report.trend <= 1e-9
    assert report.d == 2
    assert report.test_tag == "self"


def test_trend_score_is_mean_of_dimensions():
    a = _model([TgnParams(0.3, 0.4, 1.1, 0.0, 5.0), TgnParams(0.5, 0.2, 2.2, 0.0, 4.0)])
    b = _model([TgnParams(0.4, 0.4, 1.3, 0.0, 5.0), TgnParams(0.5, 0.3, 1.9, 0.0, 4.0)])
    report = trend_score(a, b)
    j1 = jsd(a.dims[0].params, b.dims[0].params)
    j2 = jsd(a.dims[1].params, b.dims[1].params)
    assert report.trend == (j1 + j2) / 2
    assert report.per_dim_jsd == (j1, j2)


def test_trend_score_symmetric():
    rng = np.random.default_rng(3)
    pa, qa = random_pair(rng)
    pb, qb = random_pair(rng)
    a, b = _model([pa, pb]), _model([qa, qb])
    assert abs(trend_score(a, b).trend - trend_score(b, a).trend) <= 1e-12


def test_trend_score_dimension_mismatch():
    a = _model([TgnParams(0.3, 0.4, 1.1, 0.0, 5.0)])
    b = _model([TgnParams(0.3, 0.4, 1.1, 0.0, 5.0)] * 2)
    with pytest.raises(ValueError):
        trend_score(a, b)


def test_trend_score_kind_mismatch_warns():
    a = _model([gaussian(0.0)], kind=DistributionKind.NORMAL)
    b = _model([gaussian(0.0)], kind=TGN)
    report = trend_score(a, b)
    assert any("kind mismatch" in w for w in report.warnings)


def test_trend_score_degenerate_rules():
    p = TgnParams(0.3, 0.4, 1.1, 0.0, 5.0)
    ok = _model([p, p])
    one_degenerate = _model([p, p], statuses=[FitStatus.OK, FitStatus.FALLBACK_DEGENERATE])
    both = trend_score(one_degenerate, one_degenerate)
    assert both.per_dim_jsd[1] == 0.0  # degenerate on both sides
    mixed = trend_score(ok, one_degenerate)
    assert mixed.per_dim_jsd[1] == 1.0  # degenerate on one side
    assert mixed.per_dim_jsd[0] <= 1e-12
    assert any("degenerate" in w for w in mixed.warnings)


def test_score_report_serialization():
    report = ScoreReport(0.25, (0.2, 0.3), 0, "t", "r", "tgn", "tgn", ("note",))
    record = report.to_record()
    assert record["trend"] == 0.25
    assert record["per_dim_jsd"] == [0.2, 0.3]
    assert "note" in record["warnings"]
    text = report.to_text()
    assert "TREND score" in text and "note" in text
