import math

import numpy as np
import pytest

from trend.feature_io import FeatureMatrix
from trend.fitting import (
    DimensionFit,
    FitConfig,
    FitStatus,
    FittedModel,
    ModelFormatError,
    NonFiniteDataError,
    fit_dimension,
    fit_model,
    load_model,
    log_likelihood,
    log_likelihoods,
    save_model,
)
from trend.tgn import DistributionKind, TgnParams, sample

INF = math.inf
TGN = DistributionKind.TRUNCATED_GENERALIZED_NORMAL
GN = DistributionKind.GENERALIZED_NORMAL
NORMAL = DistributionKind.NORMAL


def test_normal_kind_closed_form():
    rng = np.random.default_rng(314)
    draws = rng.normal(0.5, 0.2, size=50_000)
    values = draws[draws >= 0.0]
    fit = fit_dimension(values, FitConfig(kind=NORMAL))
    assert fit.converged and fit.status is FitStatus.OK
    assert fit.params.mu == pytest.approx(float(values.mean()), abs=1e-12)
    assert fit.params.sigma == pytest.approx(float(values.std()) * math.sqrt(2.0), abs=1e-12)
    assert fit.params.beta == 2.0
    # log-likelihood equals the analytic Gaussian expression
    n = values.size
    s = float(values.std())
    analytic = -0.5 * n * math.log(2.0 * math.pi) - n * math.log(s) \
        - float(np.sum((values - values.mean()) ** 2)) / (2.0 * s * s)
    assert fit.log_likelihood == pytest.approx(analytic, rel=1e-12)


def test_truncated_recovery_from_samples():
    truth = TgnParams(0.1, 0.3, 1.0, 0.0, INF)
    data = sample(truth, 50_000, 42)
    fit = fit_dimension(data, FitConfig())
    p = fit.params
    assert fit.converged
    assert abs(p.mu - 0.1) / 0.1 < 0.05
    assert abs(p.sigma - 0.3) / 0.3 < 0.05
    assert abs(p.beta - 1.0) / 1.0 < 0.05
    assert p.a1 == 0.0
    assert p.a2 == float(data.max())


def test_generalized_normal_recovers_laplace():
    rng = np.random.default_rng(2718)
    data = rng.laplace(0.4, 0.7, size=30_000)
    fit = fit_dimension(data, FitConfig(kind=GN))
    assert fit.converged
    assert abs(fit.params.beta - 1.0) < 0.05
    assert abs(fit.params.mu - 0.4) < 0.05
    assert abs(fit.params.sigma - 0.7) / 0.7 < 0.05
    assert fit.n_zero == 0


def test_constant_input_degenerates():
    fit = fit_dimension(np.full(100, 1.0), FitConfig())
    assert fit.status is FitStatus.FALLBACK_DEGENERATE
    assert not fit.converged
    assert fit.params.mu == 1.0


def test_zero_omission_bookkeeping():
    rng = np.random.default_rng(8)
    positive = rng.uniform(0.1, 1.0, size=900)
    values = np.concatenate([positive, np.zeros(100)])
    fit = fit_dimension(values, FitConfig())
    assert fit.n_zero == 100
    assert fit.n_used == 900
    assert fit.n_used + fit.n_zero == values.size


def test_input_validation():
    with pytest.raises(NonFiniteDataError):
        fit_dimension([1.0, math.nan, 2.0], FitConfig())
    with pytest.raises(ValueError):
        fit_dimension([0.5, -0.5], FitConfig())  # negatives under truncated kind
    with pytest.raises(ValueError):
        fit_dimension([], FitConfig())
    fit_dimension([0.5, -0.5] * 50, FitConfig(kind=GN))  # fine without truncation


def test_optimizer_never_below_initialization():
    rng = np.random.default_rng(5150)
    for case in range(30):
        n = int(rng.integers(64, 400))
        truth = TgnParams(float(rng.uniform(0.05, 1.0)), float(rng.uniform(0.1, 0.8)),
                          float(rng.uniform(0.4, 3.0)), 0.0, INF)
        data = sample(truth, n, [31, case])
        fit = fit_dimension(data, FitConfig())
        if fit.status is FitStatus.FALLBACK_DEGENERATE:
            continue
        used = data[data > 0.0]
        init = TgnParams(float(used.mean()), float(used.std()), 2.0, 0.0, float(data.max()))
        assert fit.log_likelihood >= log_likelihood(init, used)


def test_scale_equivariance():
    truth = TgnParams(0.5, 0.4, 1.3, 0.0, INF)
    data = sample(truth, 30_000, 77)
    base = fit_dimension(data, FitConfig()).params
    scaled = fit_dimension(data * 3.5, FitConfig()).params
    assert scaled.mu == pytest.approx(base.mu * 3.5, rel=1e-3)
    assert scaled.sigma == pytest.approx(base.sigma * 3.5, rel=1e-3)
    assert scaled.beta == pytest.approx(base.beta, rel=1e-3)


def test_fit_is_deterministic():
    truth = TgnParams(0.2, 0.5, 0.8, 0.0, INF)
    data = sample(truth, 20_000, 11)
    a = fit_dimension(data, FitConfig())
    b = fit_dimension(data, FitConfig())
    assert a.params == b.params
    assert a.log_likelihood == b.log_likelihood


def test_fit_model_columns_and_degenerate_isolation():
    rng = np.random.default_rng(4)
    cols = [
        sample(TgnParams(0.3, 0.3, 1.1, 0.0, INF), 5000, 1),
        np.zeros(5000),
        sample(TgnParams(0.8, 0.5, 1.7, 0.0, INF), 5000, 2),
    ]
    matrix = FeatureMatrix(np.column_stack(cols).astype(np.float32), "three")
    model = fit_model(matrix, FitConfig())
    assert model.d == 3
    assert model.source_tag == "three"
    assert model.dims[1].status is FitStatus.FALLBACK_DEGENERATE
    assert model.dims[0].status is FitStatus.OK
    assert model.dims[2].status is FitStatus.OK
    del rng


def test_fit_model_multi_column_recovery():
    truths = [
        TgnParams(0.2, 0.25, 0.9, 0.0, INF),
        TgnParams(0.5, 0.40, 1.4, 0.0, INF),
        TgnParams(1.1, 0.30, 2.0, 0.0, INF),
    ]
    cols = [sample(t, 20_000, [9, i]) for i, t in enumerate(truths)]
    model = fit_model(np.column_stack(cols), FitConfig())
    for dim, truth in zip(model.dims, truths):
        assert abs(dim.params.mu - truth.mu) / truth.mu < 0.05
        assert abs(dim.params.sigma - truth.sigma) / truth.sigma < 0.05
        assert abs(dim.params.beta - truth.beta) / truth.beta < 0.05


def test_fit_model_single_dimension():
    data = sample(TgnParams(0.5, 0.3, 1.2, 0.0, INF), 2000, 3).reshape(-1, 1)
    model = fit_model(data, FitConfig())
    assert model.d == 1


def test_fit_model_rejects_small_and_nonfinite():
    with pytest.raises(ValueError):
        fit_model(np.ones((4, 2)), FitConfig())
    bad = np.ones((64, 2))
    bad[3, 1] = math.inf
    with pytest.raises(NonFiniteDataError):
        fit_model(bad, FitConfig())


def test_log_likelihoods_match_training_fit():
    cols = [sample(TgnParams(0.3, 0.3, 1.0, 0.0, INF), 10_000, [21, i]) for i in range(3)]
    matrix = np.column_stack(cols)
    model = fit_model(matrix, FitConfig())
    per_dim, n_clamped = log_likelihoods(model, matrix)
    assert n_clamped == 0
    for value, dim in zip(per_dim, model.dims):
        assert value == pytest.approx(dim.log_likelihood, abs=1e-9 * max(1.0, abs(dim.log_likelihood)))


def test_log_likelihoods_clamps_out_of_support():
    data = sample(TgnParams(0.4, 0.3, 1.2, 0.0, INF), 5000, 2).reshape(-1, 1)
    model = fit_model(data, FitConfig())
    a2 = model.dims[0].params.a2
    held_out = np.array([[0.1], [a2 + 1.0]])
    per_dim, n_clamped = log_likelihoods(model, held_out)
    assert n_clamped == 1
    from trend.tgn import log_pdf
    expected = log_pdf(model.dims[0].params, 0.1) + log_pdf(model.dims[0].params, a2)
    assert per_dim[0] == pytest.approx(expected, rel=1e-12)


def test_log_likelihoods_gaussian_analytic():
    rng = np.random.default_rng(12)
    data = rng.normal(1.0, 0.5, size=(20_000, 1))
    model = fit_model(data, FitConfig(kind=NORMAL))
    per_dim, _ = log_likelihoods(model, data)
    col = data[:, 0]
    s = float(col.std())
    analytic = -0.5 * col.size * math.log(2.0 * math.pi) - col.size * math.log(s) \
        - float(np.sum((col - col.mean()) ** 2)) / (2.0 * s * s)
    assert per_dim[0] == pytest.approx(analytic, rel=1e-12)


def test_likelihood_ordering_on_truncated_leptokurtic_data():
    rng = np.random.default_rng(777)
    for i in range(8):
        truth = TgnParams(float(rng.uniform(-0.1, 0.4)), float(rng.uniform(0.2, 0.5)),
                          float(rng.uniform(0.7, 1.2)), 0.0, INF)
        data = sample(truth, 10_000, [61, i])
        lls = {}
        for kind in (TGN, GN, NORMAL):
            lls[kind] = fit_dimension(data, FitConfig(kind=kind)).log_likelihood
        assert lls[TGN] > lls[GN] > lls[NORMAL]


def test_model_round_trip(tmp_path):
    cols = [sample(TgnParams(0.3, 0.3, 1.0, 0.0, INF), 3000, [51, i]) for i in range(2)]
    model = fit_model(FeatureMatrix(np.column_stack(cols).astype(np.float32), "src"), FitConfig())
    path = tmp_path / "model.txt"
    save_model(model, path)
    back = load_model(path)
    assert back.kind is model.kind
    assert back.source_tag == "src"
    assert back.d == model.d
    for a, b in zip(back.dims, model.dims):
        assert a.params == b.params
        assert a.log_likelihood == b.log_likelihood
        assert (a.n_used, a.n_zero, a.converged, a.status) == (b.n_used, b.n_zero, b.converged, b.status)


def test_model_load_errors(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("not a model\n")
    with pytest.raises(ModelFormatError):
        load_model(path)
    path.write_text("# tgn-model v1\n# kind=tgn\n# dims=2\n")
    with pytest.raises(ModelFormatError):
        load_model(path)
    path.write_text(
        "# tgn-model v1\n# kind=tgn\n# source=\n# dims=1\n"
        "0\tgn\t0.0\t1.0\t2.0\t-inf\tinf\t0.0\t10\t0\t1\tok\n"
    )
    with pytest.raises(ModelFormatError):
        load_model(path)  # record kind disagrees with header


def test_fit_config_validation():
    with pytest.raises(ValueError):
        FitConfig(min_samples=4)
    with pytest.raises(ValueError):
        FitConfig(beta_bounds=(0.0, 2.0))
    with pytest.raises(ValueError):
        FitConfig(conv_tol=0.0)
