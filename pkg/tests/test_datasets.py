import gzip
import io
import os
from pathlib import Path

import numpy as np
import pytest

from smallgrad import (ParseError, append_bias, make_logistic,
                       normalize_rows, parse_libsvm, prepare,
                       serialize_libsvm, synth_dataset)

A9A_DIR = os.environ.get("SMALLGRAD_DATA_DIR", "")


def parse_text(text, **kw):
    return parse_libsvm(io.StringIO(text), **kw)


class TestParser:
    def test_basic_line(self):
        ds = parse_text("+1 1:0.5 3:-2\n")
        assert ds.n == 1
        assert ds.labels[0] == 1.0
        assert ds.indices.tolist() == [0, 2]
        assert ds.data.tolist() == [0.5, -2.0]
        assert ds.d == 3

    def test_blank_lines_and_label_mapping(self):
        ds = parse_text("\n+1 1:1\n\n0 2:1\n3 1:2\n")
        assert ds.labels.tolist() == [1.0, -1.0, 1.0]

    def test_strict_mode_rejects_odd_labels(self):
        with pytest.raises(ParseError) as err:
            parse_text("3 1:2\n", strict_labels=True)
        assert err.value.lineno == 1
        # 0/1 and -1/+1 are accepted in strict mode
        ds = parse_text("0 1:1\n1 1:1\n-1 1:1\n", strict_labels=True)
        assert ds.labels.tolist() == [-1.0, 1.0, -1.0]

    def test_errors_carry_line_numbers(self):
        with pytest.raises(ParseError) as err:
            parse_text("+1 1:1\n+1 3:1 2:1\n")
        assert err.value.lineno == 2
        with pytest.raises(ParseError):
            parse_text("+1 1:abc\n")
        with pytest.raises(ParseError):
            parse_text("notalabel 1:1\n")
        with pytest.raises(ParseError):
            parse_text("+1 0:1\n")
        with pytest.raises(ParseError):
            parse_text("")

    def test_gzip_transparent(self, tmp_path):
        path = tmp_path / "tiny.txt.gz"
        with gzip.open(path, "wt") as fh:
            fh.write("+1 1:0.25 2:1\n-1 2:3\n")
        ds = parse_libsvm(path)
        assert ds.n == 2
        assert ds.d == 2

    def test_round_trip_identity(self, tmp_path):
        ds = synth_dataset(5, 20, 7, separability=0.6)
        path = tmp_path / "ds.txt"
        serialize_libsvm(ds, path)
        back = parse_libsvm(path)
        assert np.array_equal(back.indptr, ds.indptr)
        assert np.array_equal(back.indices, ds.indices)
        assert np.array_equal(back.data, ds.data)
        assert np.array_equal(back.labels, ds.labels)
        assert back.d == ds.d


class TestTransforms:
    def test_three_four_five_row(self):
        ds = parse_text("+1 1:3 2:4\n")
        nds = normalize_rows(ds)
        assert nds.data.tolist() == [0.6, 0.8]

    def test_normalization_idempotent_bitwise(self):
        ds = synth_dataset(9, 30, 6)
        once = normalize_rows(ds)
        twice = normalize_rows(once)
        assert np.array_equal(once.data, twice.data)

    def test_zero_rows_flagged_and_untouched(self):
        ds = parse_text("+1 1:1\n-1 2:0\n")
        nds = normalize_rows(ds)
        assert nds.zero_rows == (1,)
        assert np.array_equal(nds.data[ds.indptr[1]:ds.indptr[2]],
                              ds.data[ds.indptr[1]:ds.indptr[2]])

    def test_append_bias(self):
        ds = parse_text("+1 1:3\n-1 2:4\n")
        bds = append_bias(ds)
        assert bds.d == ds.d + 1
        for i in range(bds.n):
            row_idx = bds.indices[bds.indptr[i]:bds.indptr[i + 1]]
            row_val = bds.data[bds.indptr[i]:bds.indptr[i + 1]]
            assert row_idx[-1] == ds.d
            assert row_val[-1] == 1.0
        bds.validate()

    def test_bias_then_normalize_gives_quarter_L(self):
        ds = synth_dataset(4, 50, 9)
        obj = make_logistic(prepare(ds, bias=True, normalize=True))
        assert obj.L == pytest.approx(0.25, rel=1e-12)

    def test_normalize_then_bias_order(self):
        ds = synth_dataset(4, 10, 3)
        swapped = prepare(ds, bias=True, normalize=True, bias_first=False)
        # bias appended after normalization leaves rows above unit norm
        norms = swapped.row_norms()
        assert np.all(norms > 1.0)


class TestSynth:
    def test_deterministic_per_seed(self):
        a = synth_dataset(7, 40, 6, separability=0.5)
        b = synth_dataset(7, 40, 6, separability=0.5)
        assert np.array_equal(a.data, b.data)
        assert np.array_equal(a.labels, b.labels)

    def test_separability_zero_detaches_labels(self):
        ds = synth_dataset(2, 4000, 8, separability=0.0)
        rows = ds.data.reshape(ds.n, ds.d)
        # agreement with any fixed hyperplane stays near chance level
        w = np.ones(ds.d)
        agree = np.mean(np.sign(rows @ w) == ds.labels)
        assert 0.45 <= agree <= 0.55

    def test_high_separability_aligns_labels(self):
        ds = synth_dataset(2, 2000, 8, separability=1.0)
        rows = ds.data.reshape(ds.n, ds.d)
        # recover the planted direction by regression on the labels
        w, *_ = np.linalg.lstsq(rows, ds.labels, rcond=None)
        agree = np.mean(np.sign(rows @ w) == ds.labels)
        assert agree > 0.9

    def test_validates_arguments(self):
        with pytest.raises(ValueError):
            synth_dataset(0, 0, 5)
        with pytest.raises(ValueError):
            synth_dataset(0, 5, 5, separability=1.5)


@pytest.mark.skipif(not (A9A_DIR and (Path(A9A_DIR) / "a9a").is_file()),
                    reason="a9a not available; set SMALLGRAD_DATA_DIR")
def test_a9a_dimensions():
    ds = parse_libsvm(Path(A9A_DIR) / "a9a")
    assert ds.n == 32_561
    assert ds.d == 123


@pytest.mark.skipif(not (A9A_DIR and (Path(A9A_DIR) / "w8a").is_file()),
                    reason="w8a not available; set SMALLGRAD_DATA_DIR")
def test_w8a_dimensions():
    ds = parse_libsvm(Path(A9A_DIR) / "w8a")
    assert ds.n == 49_749
    assert ds.d == 300
