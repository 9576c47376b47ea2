import numpy as np
import pytest
from accel_newton.harness.libsvm import parse_libsvm

from .common import invoke, working_dir, working_dir_path  # noqa: F401


def test_gen_quadratic(working_dir_path):
    out = working_dir_path / "quadratic.libsvm"

    result = invoke("gen", "--kind", "quadratic", "--d", "12", "--n", "30", "--kappa", "50", "--out", str(out))

    assert result.exit_code == 0, result.output
    a, b = parse_libsvm(out, n_features=12, binary=False)
    assert a.shape == (30, 12)
    eigenvalues = np.linalg.eigvalsh(a.gram())
    assert eigenvalues[-1] / eigenvalues[0] == pytest.approx(50.0, rel=1e-6)


def test_gen_classification(working_dir_path):
    out = working_dir_path / "classification.libsvm"

    result = invoke("gen", "--kind", "classification", "--d", "5", "--n", "40", "--density", "0.5", "--out", str(out))

    assert result.exit_code == 0, result.output
    a, b = parse_libsvm(out, n_features=5)
    assert a.shape == (40, 5)
    assert set(np.unique(b)) <= {-1.0, 1.0}


def test_gen_is_deterministic(working_dir_path):
    first, second = working_dir_path / "first.libsvm", working_dir_path / "second.libsvm"
    for out in (first, second):
        assert invoke("gen", "--kind", "regression", "--d", "4", "--seed", "9", "--out", str(out)).exit_code == 0
    assert first.read_bytes() == second.read_bytes()


def test_gen_refuses_to_overwrite(working_dir_path):
    out = working_dir_path / "data.libsvm"
    out.write_text("keep me\n")

    result = invoke("gen", "--kind", "regression", "--d", "4", "--out", str(out))
    assert result.exit_code == 2
    assert out.read_text() == "keep me\n"

    result = invoke("gen", "--kind", "regression", "--d", "4", "--out", str(out), "--force")
    assert result.exit_code == 0, result.output
    assert out.read_text() != "keep me\n"


def test_gen_rejects_singular_quadratic(working_dir_path):
    # fewer rows than features need a ridge term
    out = working_dir_path / "singular.libsvm"
    result = invoke("gen", "--kind", "quadratic", "--d", "6", "--n", "3", "--out", str(out))
    assert result.exit_code == 1
    assert not out.exists()
