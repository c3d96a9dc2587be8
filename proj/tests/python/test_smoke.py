import cmath
import math

import numpy as np
import pytest

import echodyn


def test_semicircle_mde():
    s = echodyn.solve_mde(np.zeros(4), 1j)
    assert abs(s.m_trace - 1j * (math.sqrt(5) - 1) / 2) < 1e-12
    assert s.matrix.shape == (4, 4)


def test_dense_and_diagonal_agree():
    d = np.linspace(-1, 1, 6)
    dense = echodyn.Deformation(np.diag(d).astype(complex))
    a = echodyn.solve_mde(dense, 0.2 + 0.3j)
    b = echodyn.solve_mde(d, 0.2 + 0.3j)
    assert abs(a.m_trace - b.m_trace) < 1e-12


def test_golden_ratio_two_resolvent():
    up = echodyn.solve_mde(np.zeros(4), 1j)
    dn = echodyn.solve_mde(np.zeros(4), -1j)
    assert abs(echodyn.m12_trace(up, dn) - (math.sqrt(5) - 1) / 2) < 1e-12
    assert echodyn.m_identity_residual(up, dn) < 1e-12


def test_parabolic_coefficient_zero_plus_direction():
    d1, d2 = echodyn.sample_deformation_pair("A", 0.2, 16)
    assert echodyn.parabolic_coefficient(d1, d2, 0.0, 0.05) == pytest.approx(0.04, rel=1e-12)


def test_cauchy_and_budget():
    assert echodyn.cauchy_convolution(0, 1, 0, 1) == pytest.approx(math.pi / 2, rel=1e-12)
    assert echodyn.error_budget(0.1, 10, 0.2, 0.01) == pytest.approx(0.881, rel=1e-12)
    assert echodyn.predicted_decay(0.0, 0.1, 50) == pytest.approx(math.exp(-1), rel=1e-12)


def test_wigner_determinism():
    a = echodyn.sample_wigner(16, seed=3)
    b = echodyn.sample_wigner(16, seed=3)
    assert np.array_equal(a, b)
    assert np.allclose(a, a.conj().T)


def test_echo_curve():
    d1, d2 = echodyn.sample_deformation_pair("A", 0.2, 32)
    c = echodyn.averaged_echo(d1, d2, 0.0, 0.2, [0.0, 2.0], 2, 5)
    assert len(c["modulus2"]) == 2
    assert c["modulus2"][1] < c["modulus2"][0]


def test_errors_carry_kind():
    with pytest.raises(echodyn.EchodynError) as info:
        echodyn.kappa_bulk(np.zeros(2), 1.0, 1e-2)
    assert info.value.kind == "EmptyBulk"


def test_validation_names():
    names = echodyn.validate_config({"eta0": "0.2", "delta": "0.2"})
    assert "η_0 < Δ/|log Δ|" in names


def test_experiment_run(tmp_path):
    r = echodyn.run_experiment({"N": "16", "n_samples": "2", "t_max": "4", "t_points": "5",
                                "fit_lo": "1", "fit_hi": "4", "output_dir": str(tmp_path / "run")})
    assert (tmp_path / "run" / "curves.tsv").exists()
    assert {c["name"] for c in r["checks"]} >= {"short_time_curvature"}


def test_bessel_zero():
    assert abs(echodyn.bessel_phi(3.8317059702075123 / 2)) < 1e-15
    assert echodyn.stieltjes_semicircle(2j) == pytest.approx(1j * (math.sqrt(2) - 1))
    assert cmath.isfinite(echodyn.stieltjes_table([-1, 0, 1], [0, 1, 0], 0.5j))
