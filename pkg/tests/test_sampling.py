import math

import numpy as np
import pytest
from scipy import stats

from wlsample.errors import ConditioningFailureError, ParameterError, SamplingStallError
from wlsample.gramian import discrete_norm_sq, gram, lambda_min, spectral_distance_to_identity
from wlsample.sampling import (
    RngStream,
    conditioned_sample,
    draw_iid,
    in_event,
    minimal_budget,
    sample_mu,
    sample_rho,
)
from wlsample.spaces import FunctionSpace, basis_target, christoffel_weight


def test_minimal_budget():
    assert 40 * math.log(16) == pytest.approx(110.904, abs=1e-3)
    assert minimal_budget(4, 0.5) == 111
    assert minimal_budget(1, 0.5) == 14
    for eps in (1.0, 0.0, -0.1, 1.5):
        with pytest.raises(ParameterError):
            minimal_budget(1, eps)


def test_sample_mu(legendre2, fourier3):
    x = sample_mu(legendre2, RngStream(1), size=10**5)
    assert stats.kstest(x, stats.uniform(loc=-1, scale=2).cdf).pvalue > 0.01
    y = sample_mu(fourier3, RngStream(2), size=10**4)
    assert np.all((y >= 0) & (y < 1))
    np.testing.assert_array_equal(sample_mu(fourier3, RngStream(3, 4), size=50),
                                  sample_mu(fourier3, RngStream(3, 4), size=50))
    assert not np.array_equal(sample_mu(fourier3, RngStream(3, 4), size=50),
                              sample_mu(fourier3, RngStream(3, 5), size=50))


@pytest.mark.parametrize("basis,n", [("fourier", 5), ("piecewise_constant", 6)])
def test_rho_equals_mu_when_weight_is_one(basis, n):
    x = sample_rho(FunctionSpace(basis, n), RngStream(8), size=10**5)
    assert stats.kstest(x, stats.uniform().cdf).pvalue > 0.01


def test_rho_legendre_closed_form_cdf(legendre2):
    # density (1 + 3 t^2) / 2 against dt / 2 integrates to (x + x^3 + 2) / 4
    x = sample_rho(legendre2, RngStream(9), size=10**5)
    assert stats.kstest(x, lambda t: (t + t ** 3 + 2) / 4).pvalue > 0.01
    assert not stats.kstest(x, stats.uniform(loc=-1, scale=2).cdf).pvalue > 0.01


def test_rho_scalar_and_reproducible(legendre4):
    a = sample_rho(legendre4, RngStream(5))
    assert isinstance(a, float) and -1 <= a <= 1
    assert sample_rho(legendre4, RngStream(5)) == a


def test_rho_stall_cap(legendre4):
    with pytest.raises(SamplingStallError):
        sample_rho(FunctionSpace("legendre", 30), RngStream(1), size=200, max_iter=1)


def test_draw_iid(fourier3, legendre4):
    one = draw_iid(legendre4, 1, RngStream(1))
    assert len(one) == 1 and one.weights[0] == pytest.approx(christoffel_weight(legendre4, one.points[0]))
    fifty = draw_iid(fourier3, 50, RngStream(2))
    np.testing.assert_allclose(fifty.weights, 1.0, atol=1e-12)
    assert fifty.provenance == "iid"
    with pytest.raises(ParameterError):
        draw_iid(fourier3, 0, RngStream(1))


def test_draw_iid_weights_invariant(legendre4):
    X = draw_iid(legendre4, 300, RngStream(3))
    np.testing.assert_allclose(X.weights, christoffel_weight(legendre4, X.points), atol=1e-12)


def test_discrete_norm_unbiased(legendre4):
    v = basis_target(legendre4, [1, 1, 0, 0])
    vals = np.array([discrete_norm_sq(draw_iid(legendre4, 10, RngStream(4, t)), v) for t in range(2000)])
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(vals.mean() - 2.0) <= 3 * se


def test_determinism(legendre4):
    a = conditioned_sample(legendre4, 111, RngStream(77, 3))
    b = conditioned_sample(legendre4, 111, RngStream(77, 3))
    assert a.points.tobytes() == b.points.tobytes()
    assert a.weights.tobytes() == b.weights.tobytes()
    assert a.redraw_count == b.redraw_count


def test_conditioned_postcondition(legendre4):
    redraws = []
    for t in range(200):
        Y = conditioned_sample(legendre4, 111, RngStream(10, t))
        G = gram(Y, legendre4)
        assert spectral_distance_to_identity(G) <= 0.5
        assert lambda_min(G) >= 0.5
        assert Y.provenance == "conditioned"
        redraws.append(Y.redraw_count)
    assert np.mean(redraws) <= 3


def test_conditioning_acceptance_rate_piecewise(pc4):
    # accepted exactly when every cell holds one point: 4!/4^4
    hits = np.array([in_event(draw_iid(pc4, 4, RngStream(11, t)), pc4)[0] for t in range(500)])
    p = 3 / 32
    assert math.factorial(4) / 4 ** 4 == p
    assert abs(hits.mean() - p) <= 3 * math.sqrt(p * (1 - p) / 500)


def test_conditioning_failure_budget():
    space = FunctionSpace("piecewise_constant", 8)
    with pytest.warns(UserWarning, match="below the recommended budget"):
        with pytest.raises(ConditioningFailureError):
            conditioned_sample(space, 8, RngStream(2), max_redraws=3)
