import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sklcap import (
    DiscreteChannel,
    DomainError,
    ValidationError,
    load_channel,
    make_bac,
    make_binomial,
    make_bsc,
    parse_grid,
    save_channel,
)

unit = st.floats(0.0, 1.0, allow_nan=False)


def test_bsc_examples():
    np.testing.assert_array_equal(make_bsc(0.1).matrix, [[0.9, 0.1], [0.1, 0.9]])
    np.testing.assert_array_equal(make_bsc(0.0).matrix, np.eye(2))
    np.testing.assert_array_equal(make_bsc(0.5).matrix, np.full((2, 2), 0.5))
    assert make_bsc(0.3).input_labels == (0, 1)


def test_bac_examples():
    np.testing.assert_array_equal(make_bac(0.1, 0.6).matrix, [[0.9, 0.1], [0.6, 0.4]])
    np.testing.assert_array_equal(make_bac(0, 0).matrix, np.eye(2))


@given(unit)
def test_bac_symmetric_special_case_is_bsc(p):
    assert make_bac(p, p) == make_bsc(p)


@pytest.mark.parametrize("bad", [-0.1, 1.5, float("nan")])
def test_binary_constructors_reject_out_of_range(bad):
    with pytest.raises(DomainError):
        make_bsc(bad)
    with pytest.raises(DomainError):
        make_bac(0.2, bad)


def test_binomial_entry_matches_formula():
    ch = make_binomial(10, [0.5])
    assert ch.matrix[0, 5] == pytest.approx(math.comb(10, 5) / 1024, abs=1e-15)
    assert ch.matrix[0, 5] == pytest.approx(0.24609375)


def test_binomial_decile_grid_shape():
    ch = make_binomial(10, parse_grid("0.1:0.9:0.1"))
    assert ch.matrix.shape == (9, 11)
    assert ch.input_labels == (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    for i, x in enumerate(ch.input_labels):
        ref = [math.comb(10, y) * x**y * (1 - x) ** (10 - y) for y in range(11)]
        np.testing.assert_allclose(ch.matrix[i], ref, rtol=1e-12, atol=1e-15)


@given(st.floats(0.001, 0.999))
def test_single_trial_binomial_is_bernoulli(p):
    np.testing.assert_allclose(make_binomial(1, [p]).matrix[0], [1 - p, p], atol=1e-14)


@pytest.mark.parametrize("n", [1, 10, 100, 500, 1000])
def test_binomial_rows_sum_to_one(n):
    grid = np.linspace(0.01, 0.99, 25)
    ch = make_binomial(n, grid)
    np.testing.assert_allclose(ch.matrix.sum(axis=1), 1.0, atol=1e-12)
    # the log-gamma evaluation itself is accurate, not merely renormalized
    from scipy.stats import binom

    ref = binom.pmf(np.arange(n + 1)[None, :], n, grid[:, None])
    np.testing.assert_allclose(ch.matrix, ref, rtol=1e-9, atol=1e-300)


@pytest.mark.parametrize("grid", [[0.0, 0.5], [0.5, 1.0]])
def test_binomial_rejects_degenerate_support(grid):
    with pytest.raises(DomainError, match="degenerate support"):
        make_binomial(10, grid)


def test_binomial_rejects_non_increasing_grid():
    with pytest.raises(DomainError):
        make_binomial(10, [0.5, 0.5])
    with pytest.raises(DomainError):
        make_binomial(10, [0.6, 0.5])


def test_channel_invariants():
    with pytest.raises(ValidationError, match="row 1"):
        DiscreteChannel([[0.5, 0.5], [0.5, 0.3]])
    with pytest.raises(ValidationError, match="row 0"):
        DiscreteChannel([[1.2, -0.2], [0.5, 0.5]])
    with pytest.raises(ValidationError):
        DiscreteChannel([[1.0], [1.0]], input_labels=["a", "a"])


def test_tiny_row_error_is_renormalized():
    ch = DiscreteChannel([[0.5, 0.5 + 1e-11], [0.25, 0.75]])
    assert abs(ch.matrix[0].sum() - 1.0) <= 1e-12


def test_channel_is_read_only():
    ch = make_bsc(0.2)
    with pytest.raises(ValueError):
        ch.matrix[0, 0] = 0.3


@pytest.mark.parametrize("suffix", [".json", ".csv"])
def test_round_trip(tmp_path, suffix):
    ch = make_binomial(7, [0.13, 0.5, 0.91])
    path = tmp_path / f"ch{suffix}"
    save_channel(ch, path)
    back = load_channel(path)
    np.testing.assert_allclose(back.matrix, ch.matrix, rtol=0, atol=1e-12)
    assert back.input_labels == ch.input_labels


def test_round_trip_bsc(tmp_path):
    path = tmp_path / "bsc.csv"
    save_channel(make_bsc(0.3), path)
    assert load_channel(path) == make_bsc(0.3)


def test_json_labels_preserved(tmp_path):
    path = tmp_path / "ab.json"
    path.write_text(json.dumps({"input_labels": ["a", "b"], "matrix": [[0.9, 0.1], [0.2, 0.8]]}))
    assert load_channel(path).input_labels == ("a", "b")


def test_csv_without_header_gets_default_labels(tmp_path):
    path = tmp_path / "plain.csv"
    path.write_text("0.9,0.1\n0.2,0.8\n")
    assert load_channel(path).input_labels == (0, 1)


def test_csv_string_labels(tmp_path):
    path = tmp_path / "lab.csv"
    path.write_text("# labels: low,high\n0.9,0.1\n0.2,0.8\n")
    assert load_channel(path).input_labels == ("low", "high")


@pytest.mark.parametrize(
    "content, match",
    [
        ("0.5,0.5\n0.4,0.4\n", "row 1"),
        ("0.5,0.5\n1.1,-0.1\n", "row 1"),
        ("0.5,0.5\nabc,0.5\n", "row 1"),
        ("0.5,0.5\n1.0\n", "row 1"),
        ("", "no channel rows"),
    ],
)
def test_bad_csv_files(tmp_path, content, match):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(ValidationError, match=match):
        load_channel(path)


def test_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ValidationError):
        load_channel(path)
    path.write_text(json.dumps({"matrix": [[0.8, 0.0], [0.5, 0.5]]}))
    with pytest.raises(ValidationError, match="row 0"):
        load_channel(path)


def test_parse_grid():
    assert parse_grid("0.1:0.9:0.1") == [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    assert parse_grid("0.5") == [0.5]
    assert parse_grid("0.1:0.35:0.1") == [0.1, 0.2, 0.3]
    with pytest.raises(ValueError):
        parse_grid("0.9:0.1:0.1")
    with pytest.raises(ValueError):
        parse_grid("0.1:0.9")
