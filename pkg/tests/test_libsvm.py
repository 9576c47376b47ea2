import io

import numpy as np
import pytest
import scipy.sparse
from accel_newton.harness.libsvm import LibsvmParseError, parse_libsvm, read_libsvm, write_libsvm
from arssn_core.linalg import MatrixHandle


def test_single_row():
    a, b = read_libsvm(io.StringIO("1 1:0.5 3:2.0\n"), binary=False)

    assert a.is_sparse
    assert a.shape == (1, 3)
    np.testing.assert_array_equal(a.to_dense(), [[0.5, 0.0, 2.0]])
    np.testing.assert_array_equal(b, [1.0])


def test_binary_labels_are_mapped():
    a, b = read_libsvm(io.StringIO("0 2:1\n1 1:1\n"))

    np.testing.assert_array_equal(b, [-1.0, 1.0])
    np.testing.assert_array_equal(a.to_dense(), [[0.0, 1.0], [1.0, 0.0]])

    _, b = read_libsvm(io.StringIO("-1 1:1\n+1 1:2\n"))
    np.testing.assert_array_equal(b, [-1.0, 1.0])


def test_comments_blank_lines_and_empty_rows():
    text = "# header comment\n\n1 2:3 # trailing\n-1\n"
    a, b = read_libsvm(io.StringIO(text), n_features=4)

    assert a.shape == (2, 4)
    np.testing.assert_array_equal(a.to_dense(), [[0, 3, 0, 0], [0, 0, 0, 0]])
    np.testing.assert_array_equal(b, [1.0, -1.0])


def test_real_targets_are_kept():
    _, b = read_libsvm(io.StringIO("2.5 1:1\n-0.75 2:1\n"), binary=False)
    np.testing.assert_array_equal(b, [2.5, -0.75])


@pytest.mark.parametrize(
    "text,line_number,message",
    [
        ("1 1:1\n1 2:x\n", 2, "index:value"),
        ("1 1:1\n\n1 3:1 2:1\n", 3, "does not increase"),
        ("1 2:1 2:1\n", 1, "does not increase"),
        ("1 0:1\n", 1, "1-based"),
        ("one 1:1\n", 1, "invalid label"),
        ("1 1:1\n1 4\n", 2, "index:value"),
        ("1 1:nan\n", 1, "non-finite"),
    ],
)
def test_malformed_lines(text, line_number, message):
    with pytest.raises(LibsvmParseError, match=message) as e:
        read_libsvm(io.StringIO(text))
    assert e.value.line_number == line_number
    assert str(e.value).startswith(f"line {line_number}:")


def test_unmappable_labels():
    with pytest.raises(LibsvmParseError, match=r"cannot map labels \[0.0, 1.0, 2.0\]"):
        read_libsvm(io.StringIO("0 1:1\n1 1:1\n2 1:1\n"))


def test_file_level_errors():
    with pytest.raises(LibsvmParseError, match="no data rows"):
        read_libsvm(io.StringIO("# nothing\n"))
    with pytest.raises(LibsvmParseError, match="exceeds n_features"):
        read_libsvm(io.StringIO("1 5:1\n"), n_features=3)


def test_write_then_parse(tmp_path):
    rng = np.random.default_rng(11)
    for trial in range(20):
        n, d = rng.integers(1, 30), rng.integers(1, 15)
        dense = rng.standard_normal((n, d)) * (rng.random((n, d)) < 0.3)
        matrix = scipy.sparse.csr_array(dense)
        b = rng.standard_normal(n)

        path = tmp_path / f"random_{trial}.libsvm"
        with open(path, "w", encoding="utf-8") as f:
            write_libsvm(MatrixHandle.csr(matrix), b, f)
        a, parsed_b = parse_libsvm(path, n_features=int(d), binary=False)

        assert a.shape == (n, d)
        np.testing.assert_array_equal(a.to_dense(), matrix.toarray())
        np.testing.assert_array_equal(parsed_b, b)


def test_write_rejects_mismatched_targets():
    with pytest.raises(ValueError, match="2 targets for 3 rows"):
        write_libsvm(MatrixHandle.dense(np.eye(3)), np.ones(2), io.StringIO())
