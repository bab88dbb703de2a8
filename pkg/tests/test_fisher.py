import numpy as np
import pytest

import expected as E
from weakcap.channels import AwgnChannel, CustomChannel, GammaChannel, ar1_covariance, ma1_covariance
from weakcap.fisher import (
    MAX_CONDITION, FisherMatrix, IllConditionedError, ar1_fisher, fisher_gaussian_vector,
    fisher_scalar, ma1_fisher,
)
from weakcap.numkit import NotPositiveDefiniteError, is_psd


def test_fisher_scalar_awgn():
    for theta in (-3.0, 0.0, 2.5):
        assert fisher_scalar(AwgnChannel(1.0), theta) == pytest.approx(1.0, rel=1e-10)
    assert fisher_scalar(AwgnChannel(4.0), 1.0, method="analytic") == 0.25


def test_fisher_scalar_gamma_examples():
    assert fisher_scalar(GammaChannel(2.0), 1.0) == pytest.approx(E.GAMMA_J_2_1, abs=1e-6)
    assert fisher_scalar(GammaChannel(1.0), 27.5) == pytest.approx(E.GAMMA_J_1_275, abs=1e-9)


@pytest.mark.parametrize("kappa", [0.75, 1.0, 2.0, 4.5])
def test_fisher_scalar_gamma_grid(kappa):
    ch = GammaChannel(kappa)
    for theta in np.linspace(5 / kappa, 50 / kappa, 7):
        assert fisher_scalar(ch, theta) == pytest.approx(kappa / theta ** 2, rel=1e-6)


def test_fisher_scalar_methods():
    ch = CustomChannel(lambda r, t: -0.5 * (np.asarray(r) - t) ** 2 - 0.5 * np.log(2 * np.pi))
    assert fisher_scalar(ch, 0.2, method="auto") == pytest.approx(1.0, rel=1e-7)
    with pytest.raises(ValueError):
        fisher_scalar(ch, 0.2, method="analytic")
    with pytest.raises(ValueError):
        fisher_scalar(ch, 0.2, method="simpson")
    with pytest.raises(ValueError):
        fisher_scalar(GammaChannel(1.0), -1.0)


def test_fisher_gaussian_vector_examples():
    J = fisher_gaussian_vector(ar1_covariance(0.0, 4))
    assert np.allclose(J.matrix, np.eye(4))
    J = fisher_gaussian_vector(ar1_covariance(0.5, 3))
    assert np.allclose(J.matrix, E.AR1_FISHER_05_3, atol=1e-12)
    J = fisher_gaussian_vector(ma1_covariance(-0.3, 50))
    assert np.all(J.matrix > 0)
    with pytest.raises(NotPositiveDefiniteError):
        from weakcap.channels import NoiseCovariance
        fisher_gaussian_vector(NoiseCovariance(np.array(E.PSD_EXAMPLE_NO)))


@pytest.mark.parametrize("rho", [-0.9, -0.5, -0.1, 0.0, 0.1, 0.5, 0.9])
@pytest.mark.parametrize("n", [2, 10, 100])
def test_ar1_fisher_matches_numeric_inverse(rho, n):
    closed = ar1_fisher(rho, n).matrix
    numeric = fisher_gaussian_vector(ar1_covariance(rho, n)).matrix
    assert np.max(np.abs(closed - numeric)) <= 1e-8
    C = ar1_covariance(rho, n).matrix
    assert np.max(np.abs(closed @ C - np.eye(n))) <= 1e-8
    assert np.count_nonzero(np.triu(closed, 2)) == 0


def test_ar1_fisher_domain():
    assert np.array_equal(ar1_fisher(0.0, 3).matrix, np.eye(3))
    with pytest.raises(ValueError):
        ar1_fisher(1.0, 4)
    with pytest.raises(ValueError):
        ar1_fisher(0.5, 1)


@pytest.mark.parametrize("rho", [-0.42, -0.3, 0.0, 0.3, 0.42])
@pytest.mark.parametrize("n", [2, 50, 400])
def test_ma1_fisher_inverse_residual(rho, n):
    J = ma1_fisher(rho, n)
    C = ma1_covariance(rho, n).matrix
    assert np.max(np.abs(J.matrix @ C - np.eye(n))) <= 1e-6
    assert np.array_equal(J.matrix, J.matrix.T)
    assert is_psd(J.matrix)
    assert J.condition < MAX_CONDITION


def test_ma1_fisher_examples():
    assert np.allclose(ma1_fisher(0.0, 5).matrix, np.eye(5))
    J = ma1_fisher(-0.4, 50).matrix
    assert np.all(J > 0)
    dense = np.linalg.inv(ma1_covariance(-0.4, 50).matrix)
    assert np.allclose(J.sum(axis=1), dense.sum(axis=1), atol=1e-7)
    J = ma1_fisher(0.3, 50).matrix
    row = J[0]
    assert np.all(np.sign(row[1:]) == -np.sign(row[:-1]))


@pytest.mark.parametrize("rho", [-0.4, -0.3, 0.1, 0.3, 0.42])
def test_ma1_fisher_decay(rho):
    row = np.abs(ma1_fisher(rho, 50).matrix[0])
    assert np.all(np.diff(row) <= 0)


def test_ma1_condition_stays_moderate_near_boundary():
    # eigenvalues of the MA(1) covariance stay above ~pi^2/n^2, so the
    # 2-norm condition number is bounded by about 4 (n+1)^2 / pi^2
    J = ma1_fisher(0.4999999, 2000)
    assert J.condition < 1.2 * 4 * 2001 ** 2 / np.pi ** 2
    with pytest.raises(ValueError):
        ma1_fisher(0.5, 10)


def test_ill_conditioned_refusal(monkeypatch):
    from weakcap import fisher
    from weakcap.channels import NoiseCovariance
    c = 1.0 - 1e-13
    with pytest.raises(IllConditionedError) as info:
        fisher_gaussian_vector(NoiseCovariance(np.array([[1.0, c], [c, 1.0]])))
    assert info.value.condition > MAX_CONDITION
    monkeypatch.setattr(fisher, "MAX_CONDITION", 10.0)
    with pytest.raises(IllConditionedError):
        ma1_fisher(0.45, 50)


def test_fisher_matrix_invariants():
    with pytest.raises(ValueError):
        FisherMatrix(np.diag([1.0, 0.0]))
    J = FisherMatrix.scalar(2.0, 3)
    assert J.n == 3 and np.array_equal(J.matrix, 2 * np.eye(3))
    with pytest.raises(ValueError):
        J.matrix[0, 0] = 5.0
