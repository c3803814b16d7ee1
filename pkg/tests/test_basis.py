import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from conftest import cn
from fdsic.basis import (
    BasisKind,
    BasisMatrix,
    MomentSet,
    RegressorWindow,
    apply_basis,
    delay_line_windows,
    estimate_moments,
    gaussian_moments,
    gram_schmidt,
    hp_branches,
    ihp_matrix,
    monomial_gram,
)
from fdsic.errors import (
    ConfigurationError,
    DegenerateDistributionError,
    DegenerateInputError,
    InsufficientDataError,
)
from fdsic.signal_gen import qam_constellation

# Closed-form Ito-Hermite rows for unit variance, written out by hand.
IHP_UNIT = np.array([
    [1.0, 0.0, 0.0],
    [-2.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0), 0.0],
    [6.0 / np.sqrt(12.0), -6.0 / np.sqrt(12.0), 1.0 / np.sqrt(12.0)],
])
# E[|b_i|^2 |b_j|^2] of the unit-variance Ito-Hermite branches under CN(0, 1),
# from exact integration over |x|^2 ~ Exp(1). They set the Monte-Carlo
# standard error of every Gram entry: sqrt(m_ij / N) off the diagonal and
# sqrt((m_ii - 1) / N) on it.
IHP_FOURTH = np.array([[2.0, 4.0, 6.0], [4.0, 44.0, 180.0], [6.0, 180.0, 1842.0]])
# Exact even moments of unit-power 1024-QAM from rational enumeration of the grid.
QAM1024_MU = np.array([1.0, 477 / 341, 268465 / 116281, 168484893 / 39651821, 1259791147211 / 148733980571])


def test_hp_branches_examples():
    assert np.array_equal(hp_branches(0), [0, 0, 0])
    assert np.allclose(hp_branches(2.0), [2, 8, 32])
    x = np.exp(0.7j)
    assert np.allclose(hp_branches(x), [x, x, x])


def test_ihp_matrix_closed_form():
    assert np.allclose(ihp_matrix(1.0).coeff, IHP_UNIT, atol=1e-15)
    assert ihp_matrix(1.0).kind is BasisKind.IHP_CLOSED_FORM
    raw_second = np.array([-2.0, 1.0]) @ [1.0, 1.0]
    assert raw_second == -1.0


@pytest.mark.parametrize("sigma2", [0.0, -1.0])
def test_ihp_rejects_nonpositive(sigma2):
    with pytest.raises(ConfigurationError):
        ihp_matrix(sigma2)


@pytest.mark.parametrize("sigma2", [0.1, 1.0, 2.5])
def test_ihp_equals_gram_schmidt_of_gaussian_moments(sigma2):
    gs = gram_schmidt(MomentSet(gaussian_moments(sigma2)))
    assert np.max(np.abs(gs.coeff - ihp_matrix(sigma2).coeff)) < 1e-9


def test_gaussian_moments_unit():
    assert np.allclose(gaussian_moments(1.0), [1, 2, 6, 24, 120])


def test_ihp_monte_carlo_orthonormal():
    x = cn(np.random.default_rng(0), 1_000_000)
    b = hp_branches(x) @ ihp_matrix(1.0).coeff.T
    G = b.T @ b.conj() / x.size
    se = np.sqrt((IHP_FOURTH - np.eye(3)) / x.size)
    assert np.all(np.abs(G - np.eye(3)) < 5 * se)
    # the first two branches are tight enough for the fixed bounds
    assert abs(G[0, 1]) < 0.01
    assert np.all((np.diag(G).real[:2] > 0.97) & (np.diag(G).real[:2] < 1.03))


def test_estimate_moments_examples(rng):
    ones = np.exp(1j * rng.uniform(0, 2 * np.pi, 500))
    assert np.allclose(estimate_moments(ones).mu, 1.0)
    mu = estimate_moments(cn(rng, 100_000)).mu
    assert np.allclose(mu[:3], [1, 2, 6], rtol=0.05)
    est = estimate_moments(qam_constellation(1024)).mu
    assert np.allclose(est, QAM1024_MU, rtol=1e-12)
    assert 1.0 < est[1] < 2.0


def test_estimate_moments_errors():
    with pytest.raises(InsufficientDataError):
        estimate_moments(np.ones(99))
    with pytest.raises(DegenerateInputError):
        estimate_moments(np.zeros(200))


def test_moment_set_validation():
    with pytest.raises(DegenerateInputError):
        MomentSet([0, 1, 1, 1, 1])
    with pytest.raises(ConfigurationError):
        MomentSet([1, 0.5, 1, 1, 1])
    with pytest.raises(ConfigurationError):
        MomentSet([1, 2, 3])


def test_constant_modulus_degenerate_at_branch_two():
    with pytest.raises(DegenerateDistributionError) as info:
        gram_schmidt(MomentSet(np.ones(5)))
    assert info.value.branch == 2


def test_degenerate_drop_policy():
    with pytest.warns(RuntimeWarning):
        B = gram_schmidt(MomentSet(np.ones(5)), on_degenerate="drop")
    assert np.allclose(B.coeff[0], [1, 0, 0])
    assert not np.any(B.coeff[1])


def test_gram_schmidt_qam_orthonormal():
    B = gram_schmidt(MomentSet(QAM1024_MU))
    G = monomial_gram(QAM1024_MU)
    assert np.linalg.norm(B.coeff @ G @ B.coeff.T - np.eye(3)) < 1e-9
    pts = qam_constellation(1024)
    b = hp_branches(pts) @ B.coeff.T
    assert np.allclose(b.T @ b.conj() / pts.size, np.eye(3), atol=1e-9)


@st.composite
def radial_distributions(draw):
    """Even moments of a random mixture of rings (always a valid moment sequence)."""
    k = draw(st.integers(3, 6))
    radii = draw(st.lists(st.floats(0.2, 2.0), min_size=k, max_size=k, unique=True))
    weights = np.array(draw(st.lists(st.floats(0.05, 1.0), min_size=k, max_size=k)))
    weights = weights / weights.sum()
    r2 = np.array(radii) ** 2
    return radii, weights, np.array([np.sum(weights * r2 ** m) for m in range(1, 6)])


@given(radial_distributions())
def test_gram_schmidt_defining_property(dist):
    radii, weights, mu = dist
    r2 = np.array(radii) ** 2
    assume(np.min(np.abs(np.subtract.outer(r2, r2)) + np.eye(len(r2))) > 0.05)
    B = gram_schmidt(MomentSet(mu)).coeff
    G = monomial_gram(mu)
    assert np.linalg.norm(B @ G @ B.T - np.eye(3)) < 1e-9
    assert np.all(np.diag(B) > 0)
    assert not np.any(np.triu(B, 1))
    Binv = np.linalg.inv(B)
    assert np.max(np.abs(np.triu(Binv, 1))) <= 1e-12 * np.max(np.abs(Binv))


@given(radial_distributions(), st.floats(0.3, 3.0))
def test_scale_covariance(dist, alpha):
    radii, weights, mu = dist
    r2 = np.array(radii) ** 2
    assume(np.min(np.abs(np.subtract.outer(r2, r2)) + np.eye(len(r2))) > 0.05)
    scaled = mu * alpha ** (2 * np.arange(1, 6))
    B1 = gram_schmidt(MomentSet(mu)).coeff
    B2 = gram_schmidt(MomentSet(scaled)).coeff
    # exact second moments of each branch on the ring mixture, before and after scaling
    for B, s in ((B1, 1.0), (B2, alpha)):
        pts = s * np.array(radii)
        vals = hp_branches(pts) @ B.T
        power = weights @ (np.abs(vals) ** 2)
        assert np.allclose(power, 1.0, rtol=1e-7)


def test_monte_carlo_orthonormality_transfer():
    rng = np.random.default_rng(3)
    pts = qam_constellation(64)
    B = gram_schmidt(estimate_moments(pts[rng.integers(0, 64, 5000)]))
    fresh = pts[rng.integers(0, 64, 100_000)]
    b = hp_branches(fresh) @ B.coeff.T
    G = np.abs(b.T @ b.conj() / fresh.size)
    assert np.max(G - np.diag(np.diag(G))) < 0.05


def test_basis_matrix_validation():
    with pytest.raises(ConfigurationError):
        BasisMatrix(np.ones((3, 3)))
    with pytest.raises(ConfigurationError):
        BasisMatrix(np.eye(2))
    assert np.array_equal(BasisMatrix.identity().coeff, np.eye(3))


def test_regressor_window_shift():
    w = RegressorWindow(3)
    for s in (1, 2, 3, 4):
        w.push(s)
    assert np.array_equal(w.taps, [4, 3, 2])
    w.reset()
    assert not np.any(w.taps)


def test_delay_line_windows_match_push(rng):
    x = cn(rng, 50)
    W = delay_line_windows(x, 21)
    win = RegressorWindow(21)
    for n in range(x.size):
        assert np.array_equal(W[n], win.push(x[n]))


def test_apply_basis_examples():
    assert not np.any(apply_basis(np.zeros(21, complex), BasisMatrix.identity()))
    x0 = 0.8 - 0.3j
    window = np.zeros(21, complex)
    window[0] = x0
    u = apply_basis(window, BasisMatrix.identity())
    assert u.shape == (63,)
    assert set(np.flatnonzero(u)) == {0, 21, 42}
    p = abs(x0) ** 2
    assert np.allclose(u[[0, 21, 42]], [x0, x0 * p, x0 * p * p])


def test_stacked_regressor_gram_white_gaussian():
    x = cn(np.random.default_rng(8), 100_000 + 20)
    U = apply_basis(delay_line_windows(x, 21)[20:], ihp_matrix(1.0))
    n = U.shape[0]
    G = U.T @ U.conj() / n
    # independent taps: cross-tap entries have unit fourth moment
    fourth = np.ones((63, 63))
    for i in range(3):
        for j in range(3):
            for k in range(21):
                fourth[21 * i + k, 21 * j + k] = IHP_FOURTH[i, j]
    se = np.sqrt((fourth - np.eye(63)) / n)
    assert np.all(np.abs(G - np.eye(63)) < 5 * se)
    off = G - np.diag(np.diag(G))
    assert np.max(np.abs(off[:42, :42])) < 0.05
