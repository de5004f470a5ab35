import math

import numpy as np
import pytest
import scipy.sparse.linalg as spla

import fictifem


def test_presets():
    assert set(fictifem.preset_names()) == {
        "circle_10", "circle_1000", "circle_reversed", "square", "lshape", "flower"}


def test_solve_matches_scipy():
    blocks = fictifem.assemble_preset("circle_10")
    n1, n2, m = blocks["sizes"]
    K = blocks["K"]
    assert K.shape == (n1 + n2 + m, n1 + n2 + m)
    assert abs(K - K.T).max() < 1e-12 * abs(K).max()
    x = spla.spsolve(K.tocsc(), blocks["rhs"])

    sol = fictifem.solve_preset("circle_10")
    assert max(sol["residual"]) < 1e-9
    assert sol["constraint_defect"] < 1e-10
    # Constrained entries are post-filled, so compare the multiplier block only.
    np.testing.assert_allclose(sol["lambda"], x[n1 + n2:], atol=1e-8)


def test_exact_errors_and_indicators():
    sol = fictifem.solve_preset("circle_10", level1=3, level2=2)
    err = sol["errors"]
    assert 0 < err["h1_u"] < 1
    assert 0 < err["l2_u"] < err["h1_u"]
    assert np.all(np.asarray(sol["eta1"]) >= 0)
    assert len(sol["eta2"]) > 0


def test_gmres_agrees_with_direct():
    a = fictifem.solve_preset("circle_10", method="direct")
    b = fictifem.solve_preset("circle_10", method="gmres")
    assert b["iterations"] > 0
    np.testing.assert_allclose(a["u"], b["u"], atol=1e-7)


def test_study_records():
    out = fictifem.run_study("circle_10", max_cycles=3)
    recs = out["records"]
    assert out["stop_reason"] == "max_cycles"
    assert [r["cycle"] for r in recs] == [0, 1, 2]
    n = [r["n1"] + r["n2"] + r["m"] for r in recs]
    assert n == sorted(n) and len(set(n)) == 3
    assert all(r["eff_index"] > 0 for r in recs)
    assert recs[0]["lambda_diag"] is not None


def test_study_without_exact_solution():
    recs = fictifem.run_study("square", max_cycles=2)["records"]
    assert recs[0]["err_h1_u"] is None


def test_marking():
    assert fictifem.doerfler_mark([3, 2, 1], 0.6) == [0]
    assert fictifem.doerfler_mark([3, 2, 1], 0.6, marking="linear") == [0, 1]
    assert fictifem.doerfler_mark([1, 2], 0.0) == []
    assert fictifem.coarsen_mark([4, 1, 1, 1, 1], 0.5) == [1, 2, 3, 4]


def test_eoc():
    n = [100.0, 400.0, 1600.0, 6400.0]
    assert math.isclose(fictifem.eoc(n, [1 / math.sqrt(v) for v in n]), -1.0, abs_tol=1e-10)
    with pytest.raises(fictifem.Error):
        fictifem.eoc([1.0, 2.0], [1.0, 1.0])


def test_config_and_errors():
    cfg = fictifem.parse_config("[adapt]\nalpha1 = 0.5\nmarking = linear\n")
    assert cfg["alpha1"] == 0.5 and cfg["alpha2"] == 0.0 and cfg["marking"] == "linear"
    with pytest.raises(fictifem.ConfigError, match=":2:"):
        fictifem.parse_config("[adapt]\nalpha1 = 1.5\n")
    with pytest.raises(fictifem.ConfigError, match="circle_10"):
        fictifem.solve_preset("hexagon")
    assert issubclass(fictifem.ConfigError, RuntimeError)


def test_invariant_suite():
    failed = [(name, detail) for name, ok, detail in fictifem.run_checks() if not ok]
    assert failed == []
