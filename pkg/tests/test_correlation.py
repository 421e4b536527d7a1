import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import corr_matrix_loops
from signet.correlation import (
    correlation_matrix, moment_summary, read_corr_binary, summarize, write_corr_binary, CorrMatrix,
)
from signet.errors import UndefinedSummaryError, ValidationError


def names(n):
    return [f"S{i}" for i in range(n)]


def test_identical_series():
    x = np.array([0.01, -0.02, 0.03, 0.0, 0.015])
    c = correlation_matrix(np.vstack([x, x]), names(2))
    assert c.rho[0, 1] == pytest.approx(1.0, abs=1e-15)


def test_negated_series():
    x = np.array([0.01, -0.02, 0.03, 0.0, 0.015])
    c = correlation_matrix(np.vstack([x, -x]), names(2))
    assert c.rho[0, 1] == pytest.approx(-1.0, abs=1e-15)


def test_matches_loop_oracle(rng):
    R = rng.normal(0, 0.02, (5, 25))
    c = correlation_matrix(R, names(5))
    assert np.max(np.abs(c.rho - corr_matrix_loops(R))) <= 1e-12


def test_exact_symmetry_and_diagonal(rng):
    c = correlation_matrix(rng.normal(0, 0.02, (30, 25)), names(30))
    assert np.array_equal(c.rho, c.rho.T)
    assert np.all(np.diag(c.rho) == 1.0)
    assert np.all(np.abs(c.rho) <= 1.0)


def test_constant_series_excluded():
    R = np.array([[0.01, 0.02, -0.01, 0.0], [0.0, 0.0, 0.0, 0.0], [0.03, -0.01, 0.02, 0.01]])
    c = correlation_matrix(R, ["A", "B", "C"])
    assert c.roster == ("A", "C") and c.excluded == ("B",)
    assert c.rho.shape == (2, 2)


def test_nan_returns_rejected():
    R = np.array([[0.01, np.nan, 0.02], [0.01, 0.02, 0.03]])
    with pytest.raises(ValidationError, match="A"):
        correlation_matrix(R, ["A", "B"])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100), st.floats(-1, 1))
def test_affine_invariance(seed, a, b):
    R = np.random.default_rng(seed).normal(0, 0.02, (6, 25))
    base = correlation_matrix(R, names(6)).rho
    R2 = R.copy()
    R2[2] = a * R2[2] + b
    assert np.max(np.abs(correlation_matrix(R2, names(6)).rho - base)) <= 1e-10


def test_sign_flip_negates_row(rng):
    R = rng.normal(0, 0.02, (6, 25))
    base = correlation_matrix(R, names(6)).rho
    R[3] = -R[3]
    flipped = correlation_matrix(R, names(6)).rho
    mask = np.zeros_like(base, dtype=bool)
    mask[3, :] = mask[:, 3] = True
    np.fill_diagonal(mask, False)
    assert np.allclose(flipped[mask], -base[mask], atol=1e-14)
    assert np.allclose(flipped[~mask], base[~mask], atol=1e-14)


def _cm(off):
    n = int(round((1 + np.sqrt(1 + 8 * len(off))) / 2))
    rho = np.eye(n)
    rho[np.triu_indices(n, 1)] = off
    rho = np.triu(rho) + np.triu(rho, 1).T
    return CorrMatrix(rho, tuple(names(n)))


def test_summary_degenerate():
    s = summarize(_cm([0.5, 0.5, 0.5]))
    assert s.p_neg == 0 and s.rho_min == s.rho_max == 0.5
    assert s.kurtosis is None and s.skewness is None


def test_summary_count():
    s = summarize(_cm([-0.2, 0.4, 0.6]))
    assert s.p_neg == pytest.approx(1 / 3)
    assert s.p_neg + s.p_pos + s.p_zero == pytest.approx(1.0)


def test_summary_too_small():
    with pytest.raises(UndefinedSummaryError):
        summarize(CorrMatrix(np.eye(1), ("A",)))


def test_gaussian_moment_conventions():
    s = moment_summary(np.random.default_rng(7).standard_normal(100_000))
    assert s.kurtosis == pytest.approx(3.0, abs=0.1)
    assert s.skewness == pytest.approx(0.0, abs=0.05)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=40))
def test_summary_invariants(values):
    s = moment_summary(np.array(values))
    assert 0 <= s.p_neg <= 1 and s.rho_min <= s.rho_max
    assert s.p_neg + s.p_pos + s.p_zero == pytest.approx(1.0)
    if s.kurtosis is not None:
        assert s.kurtosis >= s.skewness ** 2 + 1 - 1e-9


def test_binary_dump_round_trip(tmp_path, rng):
    c = correlation_matrix(rng.normal(0, 0.02, (4, 25)), ["A", "BB", "Ünï", "D"])
    write_corr_binary(c, tmp_path / "c.bin")
    back = read_corr_binary(tmp_path / "c.bin")
    assert back.roster == c.roster and np.array_equal(back.rho, c.rho)
