import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pltwirl.channel import PauliChannel
from pltwirl.pauli import all_words
from pltwirl.plmodel import (
    IllDefinedError,
    PLParams,
    RankDeficientError,
    classify_pauli,
    f_from_lambda,
    fit_sparse_lambda,
    lambda_from_f,
    min_third_parameter,
    pl_channel,
    qubit_criterion,
)

from oracles import min_third_bisect, pl_transfer_product

HAD_LAM_Y = -0.5 * np.log(np.cosh(1.0))


def test_empty_support_is_identity():
    np.testing.assert_array_equal(f_from_lambda(PLParams.zero(2)), np.ones(16))


def test_depolarizing_example():
    pl = lambda_from_f([1, 0.8, 0.8, 0.8])
    np.testing.assert_allclose(pl.lam, [-np.log(0.8) / 4] * 3, atol=1e-15)
    assert pl.lam[0] == pytest.approx(0.0557858, abs=1e-7)
    np.testing.assert_allclose(f_from_lambda(PLParams.from_dict({"X": 0.0557858, "Y": 0.0557858, "Z": 0.0557858})),
                               [1, 0.8, 0.8, 0.8], atol=1e-6)


def test_dephasing_example():
    pc = pl_channel(PLParams.from_dict({"Z": 0.1}))
    np.testing.assert_allclose(pc.f, [1, np.exp(-0.2), np.exp(-0.2), 1])
    np.testing.assert_allclose(pc.p, [(1 + np.exp(-0.2)) / 2, 0, 0, (1 - np.exp(-0.2)) / 2], atol=1e-15)


@pytest.mark.parametrize("n", [1, 2])
def test_f_matches_product_of_factors(n, rng):
    words = [w.label for w in all_words(n)][1:]
    chosen = rng.choice(words, size=min(4, len(words)), replace=False)
    lam = {w: float(v) for w, v in zip(chosen, rng.uniform(-0.2, 0.8, len(chosen)))}
    f = f_from_lambda(PLParams.from_dict(lam))
    np.testing.assert_allclose(np.diag(pl_transfer_product(lam, n)), f, atol=1e-13)
    np.testing.assert_allclose(pl_transfer_product(lam, n), np.diag(f), atol=1e-13)


def test_negative_f_gives_complex_lambda():
    f = np.array([1, -0.5, 0.25, -0.5])
    pl = lambda_from_f(f)
    assert not pl.is_real()
    im = pl.lam.imag / (np.pi / 4)
    np.testing.assert_allclose(im, np.round(im), atol=1e-12)
    np.testing.assert_allclose(f_from_lambda(pl), f, atol=1e-12)
    verdict = classify_pauli(f)
    assert not verdict.is_csm and verdict.min_value == float("-inf")


def test_zero_eigenvalue_ill_defined():
    with pytest.raises(IllDefinedError, match="ill-defined"):
        lambda_from_f([1, 0.0, 0.5, 0.5])
    with pytest.raises(IllDefinedError):
        classify_pauli(np.array([1, 0.5, 1e-15, 0.5]))


def test_hadamard_values_valid_but_not_csm():
    pl = PLParams.from_dict({"X": 0.5, "Y": HAD_LAM_Y, "Z": 0.5})
    pc = pl_channel(pl)
    assert pc.p.min() >= -1e-15
    assert pc.is_cptp()
    v = classify_pauli(pl)
    assert not v.is_csm
    assert v.min_value == pytest.approx(HAD_LAM_Y, abs=1e-15)
    assert v.witness["lambda"]["Y"][0] == pytest.approx(HAD_LAM_Y)


def test_classify_trivial_cases():
    assert classify_pauli(np.ones(4)).is_csm
    assert classify_pauli(PauliChannel(np.array([1, 0.8, 0.8, 0.8]))).is_csm
    v = classify_pauli(np.ones(4))
    assert v.min_value == 0.0
    assert v.to_json()["is_csm"] is True


def test_csm_verdict_invariant(rng):
    for _ in range(50):
        lam = rng.uniform(-0.3, 1.0, 3)
        v = classify_pauli(PLParams.from_dense(lam, 1), tol=1e-10)
        assert v.is_csm == (v.min_value >= -v.tol)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_bijection_lambda_f_lambda(n, seed):
    lam = np.random.default_rng(seed).uniform(-0.3, 1.0, 4**n - 1)
    f = f_from_lambda(PLParams.from_dense(lam, n))
    if f.min() <= 1e-14:
        # dense n=3 draws can underflow some f_a below the zero threshold
        with pytest.raises(IllDefinedError):
            lambda_from_f(f)
        return
    np.testing.assert_allclose(lambda_from_f(f).lam, lam, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_bijection_f_lambda_f(n, seed):
    f = np.random.default_rng(seed).uniform(0.05, 1.0, 4**n)
    f[0] = 1.0
    np.testing.assert_allclose(f_from_lambda(lambda_from_f(f)), f, atol=1e-12)


def test_qubit_criterion_examples():
    assert qubit_criterion([1, 0.8, 0.8, 0.8])
    assert not qubit_criterion([1, 0.9, 0.5, 0.9])
    assert qubit_criterion([1, 1, 1, 1])
    with pytest.raises(ValueError):
        qubit_criterion(np.ones(16))


def test_qubit_criterion_agrees_with_classify(rng):
    # random positive-f Pauli channels from Dirichlet probabilities
    fs = [PauliChannel.from_probabilities(p).f for p in rng.dirichlet([3.0, 1.0, 1.0, 1.0], size=20_000)]
    fs = [f for f in fs if f.min() > 1e-9][:10_000]
    assert len(fs) == 10_000
    verdicts = {True: 0, False: 0}
    for f in fs:
        v = qubit_criterion(f)
        assert v == classify_pauli(f, tol=0.0).is_csm
        verdicts[v] += 1
    assert min(verdicts.values()) > 100


def test_min_third_parameter():
    assert min_third_parameter(0.0) == 0.0
    assert min_third_parameter(0.5) == pytest.approx(HAD_LAM_Y, abs=1e-15)
    for ell in (0.1, 0.5, 1.3):
        assert min_third_parameter(ell) == pytest.approx(min_third_bisect(ell), abs=1e-12)
    with pytest.raises(ValueError):
        min_third_parameter(-0.1)


def _hadamard_measurements():
    f = f_from_lambda(PLParams.from_dict({"X": 0.5, "Y": HAD_LAM_Y, "Z": 0.5}))
    return {"X": f[1], "Y": f[2], "Z": f[3]}


def test_fit_recovers_negative_lambda():
    fit = fit_sparse_lambda(_hadamard_measurements(), ["X", "Y", "Z"], allow_negative=True)
    np.testing.assert_allclose(fit.params.lam, [0.5, HAD_LAM_Y, 0.5], atol=1e-12)
    assert fit.residual < 1e-10


def test_fit_nonnegative_mischaracterizes():
    fit = fit_sparse_lambda(_hadamard_measurements(), ["X", "Y", "Z"], allow_negative=False)
    assert fit.params.lam.min() >= 0
    assert fit.residual > 1e-4


def test_fit_csm_data_either_way(rng):
    words = [w.label for w in all_words(2)][1:]
    support = ["XI", "IZ", "ZZ", "YX"]
    lam = rng.uniform(0.01, 0.3, len(support))
    f = f_from_lambda(PLParams.from_dict(dict(zip(support, lam))))
    measured = {w: f[i + 1] for i, w in enumerate(words)}
    for allow in (True, False):
        fit = fit_sparse_lambda(measured, support, allow_negative=allow)
        np.testing.assert_allclose(fit.params.lam, lam, atol=1e-10)
        assert fit.residual < 1e-10


def test_fit_weights_and_errors():
    meas = _hadamard_measurements()
    fit = fit_sparse_lambda(meas, ["X", "Y", "Z"], allow_negative=False, weights={"Y": 100.0})
    unweighted = fit_sparse_lambda(meas, ["X", "Y", "Z"], allow_negative=False)
    assert fit.residual != pytest.approx(unweighted.residual)
    with pytest.raises(RankDeficientError):
        fit_sparse_lambda({"X": 0.9}, ["X", "Y", "Z"])
    with pytest.raises(ValueError, match="positive"):
        fit_sparse_lambda({"X": -0.1, "Y": 0.9, "Z": 0.9}, ["X"])


def test_plparams_validation():
    with pytest.raises(ValueError):
        PLParams.from_dict({"I": 0.1})
    with pytest.raises(ValueError):
        PLParams(1, ("X", "X"), np.array([0.1, 0.2]))
    with pytest.raises(ValueError):
        PLParams(2, ("X",), np.array([0.1]))
    pl = PLParams.from_dict({"XZ": 0.1 + 0j})
    assert not np.iscomplexobj(pl.lam)
    assert pl.scaled(-1).as_dict() == {"XZ": -0.1}
