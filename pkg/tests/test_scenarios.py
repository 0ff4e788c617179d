import numpy as np
import pytest

from pltwirl.channel import twirl
from pltwirl.lindblad import error_channel, propagate_constant, propagate_timedep
from pltwirl.plmodel import min_third_parameter
from pltwirl import scenarios as sc


def test_hadamard_closed_forms():
    np.testing.assert_array_equal(sc.hadamard_dephasing_lambda(0.0), [0, 0, 0])
    lam = sc.hadamard_dephasing_lambda(1.0)
    np.testing.assert_allclose(lam, [0.5, -0.5 * np.log(np.cosh(1.0)), 0.5], atol=1e-15)
    assert lam[1] == pytest.approx(min_third_parameter(0.5), abs=1e-12)
    np.testing.assert_allclose(sc.hadamard_dephasing_relaxation_lambda(0.7, 0.0), sc.hadamard_dephasing_lambda(0.7))
    with pytest.raises(ValueError):
        sc.hadamard_dephasing_lambda(-0.1)


def test_hadamard_relaxation_sign_change():
    # -1/2 ln cosh(0.1975) + 0.0025 and -1/2 ln cosh(0.175) + 0.025
    neg = sc.hadamard_dephasing_relaxation_lambda(0.2, 0.01)[1]
    pos = sc.hadamard_dephasing_relaxation_lambda(0.2, 0.1)[1]
    assert neg == pytest.approx(0.0025 - 0.5 * np.log(np.cosh(0.1975)), abs=1e-15)
    assert neg == pytest.approx(-0.0071888, abs=1e-7)
    assert pos == pytest.approx(0.0173825, abs=1e-7)
    assert neg < 0 < pos
    for x, y in ((0.2, 0.01), (0.2, 0.1)):
        np.testing.assert_allclose(sc.hadamard_lambda_numeric(x, y), sc.hadamard_dephasing_relaxation_lambda(x, y), atol=1e-10)


def test_hadamard_criterion():
    assert sc.csmb_criterion(0.01, 0.2, "hadamard")
    assert not sc.csmb_criterion(0.1, 0.2, "hadamard")
    with pytest.raises(ValueError):
        sc.csmb_criterion(0.1, 0.2, "cnot")


def test_noise_rates():
    r = sc.NoiseRates.from_coherence_times(100.0, 50.0)
    assert r.gamma == pytest.approx(0.01)
    assert r.gamma_phi == pytest.approx(0.015)
    with pytest.raises(ValueError):
        sc.NoiseRates.from_coherence_times(10.0, 30.0)
    with pytest.raises(ValueError):
        sc.NoiseRates(-1.0, 0.0)


def test_rx_setup():
    setup = sc.rx_gate_setup(sc.NoiseRates(0.3, 0.2), 2.0)
    assert setup.context.t_gate == pytest.approx(np.pi / 4)
    assert setup.theta == pytest.approx(np.pi / 2)
    assert setup.clifford
    np.testing.assert_allclose(np.linalg.eigvalsh(setup.lab.kossakowski), [0, 0.15, 0.2], atol=1e-15)
    assert not sc.rx_gate_setup(sc.NoiseRates(0, 0), 1.0, 1.0).clifford
    np.testing.assert_allclose(sc.rx_error_channel(0.0, 0.0).transfer, np.eye(4), atol=1e-14)
    with pytest.raises(ValueError):
        sc.rx_gate_setup(sc.NoiseRates(0, 0), 0.0)


def test_lab_and_gate_frame_routes_agree():
    setup = sc.rx_gate_setup(sc.NoiseRates(0.4, 0.3), np.pi / 2)
    t = setup.context.t_gate
    lab = error_channel(propagate_constant(setup.lab, t), setup.context)
    frame = propagate_timedep(setup.gate_frame, t, 4000)
    np.testing.assert_allclose(frame.transfer, lab.transfer, atol=1e-8)


def test_sqrtx_examples():
    np.testing.assert_allclose(sc.sqrtx_lambda_numeric(0.0, 0.0), 0, atol=1e-15)
    lam = sc.sqrtx_lambda_numeric(0.001, 0.1)
    assert lam[1] == pytest.approx(0.050125, abs=1e-10)
    assert lam[2] == pytest.approx(0.050125, abs=1e-10)
    approx = sc.sqrtx_lambda_second_order(0.001, 0.1)
    assert approx[0] == pytest.approx(0.00025 - 0.09975**2 / np.pi**2, abs=1e-15)
    assert approx[0] == pytest.approx(-7.58e-4, abs=1e-6)
    assert lam[0] < 0 and np.sign(lam[0]) == np.sign(approx[0])


def test_second_order_special_cases():
    lam = sc.sqrtx_lambda_second_order(0.4, 0.1)
    assert lam[0] == 0.1
    with pytest.raises(ValueError):
        sc.sqrtx_lambda_second_order(0.1, 0.1, 0.0)


def test_cumulant():
    t_d = np.diag([0.0, -0.3, -0.2, -0.1])
    c1, c2 = sc.cumulant_C1_C2(np.zeros((4, 4)), t_d, 0.7)
    np.testing.assert_allclose(c1, 0.7 * t_d, atol=1e-15)
    np.testing.assert_allclose(c2, 0, atol=1e-15)
    np.testing.assert_allclose(sc.cumulant_lambda(0.01, 0.01), sc.sqrtx_lambda_second_order(0.01, 0.01), atol=1e-5)
    np.testing.assert_allclose(sc.cumulant_lambda(0.3, 0.2, nodes=8), sc.cumulant_lambda(0.3, 0.2, nodes=16), atol=1e-12)
    with pytest.raises(ValueError):
        sc.cumulant_C1_C2(t_d, t_d, 1.0, nodes=2)


def test_sqrtx_criterion():
    assert sc.csmb_criterion(0.001, 0.1)
    assert not sc.csmb_criterion(0.01, 0.1)
    assert not sc.csmb_criterion(0.5, 0.0)


def test_root_finders():
    for gp in (0.05, 0.2):
        root = sc.lambda_x_root(gp)
        assert abs(sc.sqrtx_lambda_numeric(root, gp)[0]) < 1e-12
        approx = sc.lambda_x_root_second_order(gp)
        assert approx == pytest.approx((2 / np.pi) ** 2 * (gp - approx / 4) ** 2, rel=1e-12)


def test_region_labels():
    assert sc.region_label(True, False) == sc.CSMB
    assert sc.region_label(True, True) == sc.CSMC
    assert sc.region_label(False, True) == sc.CSMI
    assert sc.region_label(False, False) == sc.NCSMC
    assert sc.classify_point(0.001, 0.1).region == sc.CSMB
    assert sc.classify_point(0.5, 0.1).region == sc.CSMC


def test_classify_point_reports_failures():
    bad = sc.classify_point(-1.0, 0.1)
    assert bad.region == sc.ERROR and bad.message
    assert bad.row()["pretwirl_csm"] == ""


def test_small_sweep_csv_shape():
    res = sc.sweep_phase_diagram((10, 10), 3.0, 3.0)
    lines = res.to_csv().splitlines()
    assert lines[0].split(",") == list(sc.SWEEP_COLUMNS)
    assert len(lines) == 101
    for line in lines[1:]:
        cells = line.split(",")
        assert len(cells) == 8 and all(cells)
    assert res.labels().shape == (10, 10)
    assert sum(res.counts().values()) == 100


def test_sweep_parallel_is_deterministic():
    serial = sc.sweep_phase_diagram((4, 5), 3.0, 3.0, workers=1)
    parallel = sc.sweep_phase_diagram((4, 5), 3.0, 3.0, workers=2)
    assert serial.to_csv() == parallel.to_csv()


def test_sweep_refine_boundary():
    res = sc.sweep_phase_diagram((6, 4), 0.3, 0.3, refine=True)
    assert res.boundary
    for g, gp in res.boundary:
        assert abs(sc.sqrtx_lambda_numeric(g, gp)[0]) < 1e-10
    assert res.boundary_csv().startswith("gamma_tg,gammaphi_tg\n")


def test_default_workers(monkeypatch):
    monkeypatch.delenv("PLTWIRL_WORKERS", raising=False)
    assert sc.default_workers() == 1
    monkeypatch.setenv("PLTWIRL_WORKERS", "3")
    assert sc.default_workers() == 3


def test_pretwirl_threshold_near_two():
    thr = sc.pretwirl_threshold(0.0, iters=30)
    assert 1.9 < thr < 2.3


def test_reports():
    rep = sc.hadamard_report(1.0)
    assert rep["verdict"]["is_csm"] is False
    np.testing.assert_allclose(list(rep["lambda_numeric"].values()), list(rep["lambda_closed_form"].values()), atol=1e-10)
    rep = sc.sqrtx_report(0.001, 0.1)
    assert rep["region"] == sc.CSMB and rep["scenario"] == "sqrtx" and rep["clifford"]
    rep = sc.sqrtx_report(0.001, 0.1, theta=1.0)
    assert rep["scenario"] == "rx" and not rep["clifford"] and rep["csmb_criterion"] is None


def test_twirl_of_hadamard_channel_is_cptp():
    assert twirl(sc.hadamard_channel(2.0, 0.5)).is_cptp()
