# tests/test_ode.py
"""Integrador Dormand–Prince: precisión, rejilla de salida, cortes y piso de paso."""
import numpy as np
import pytest

from loewner.errores import StepFloor
from loewner.ode import a_complejo, a_real, integrar


def test_real_complex_packing():
    y = np.array([1 + 2j, -3j])
    np.testing.assert_array_equal(a_real(y), [1.0, 0.0, 2.0, -3.0])
    np.testing.assert_array_equal(a_complejo(a_real(y)), y)


def test_exponential_decay_on_grid():
    rejilla = np.linspace(0, 5, 11)
    res = integrar(lambda t, y: -y, [1.0], 0.0, 5.0, 1e-10, tiempos=rejilla)
    np.testing.assert_array_equal(res.times, rejilla)
    np.testing.assert_allclose(res.values[:, 0], np.exp(-rejilla), rtol=1e-8)
    assert res.stats["accepted"] > 0


def test_rotation_keeps_modulus():
    res = integrar(lambda t, y: 1j * y, [1.0 + 0j], 0.0, 10.0, 1e-10)
    assert abs(res.values[-1, 0]) == pytest.approx(1.0, abs=1e-7)
    assert res.values[-1, 0] == pytest.approx(np.exp(10j), abs=1e-7)


def test_dense_output_between_steps():
    res = integrar(lambda t, y: -y, [1.0], 0.0, 3.0, 1e-10)
    t = np.array([0.37, 1.41, 2.99])
    np.testing.assert_allclose(res.at(t)[:, 0], np.exp(-t), atol=1e-5)


def test_breakpoint_is_hit_exactly():
    ventana = lambda t: 1.0 if t <= 3.0 else 0.0
    res = integrar(lambda t, y: np.array([-ventana(t)]), [0.0], 0.0, 5.0, 1e-9,
                   tiempos=[0.0, 3.0, 5.0], cortes=(3.0,))
    np.testing.assert_allclose(res.values[:, 0].real, [0.0, -3.0, -3.0], atol=1e-10)


def test_watcher_can_stop_integration():
    class Alto(Exception):
        pass

    def vigilante(t, y):
        if abs(y[0]) > 2:
            raise Alto(t)

    with pytest.raises(Alto) as exc:
        integrar(lambda t, y: y, [1.0], 0.0, 5.0, 1e-8, vigilante=vigilante)
    assert exc.value.args[0] == pytest.approx(np.log(2), abs=0.5)


def test_blow_up_hits_step_floor():
    # y' = y², y(0) = 1 explota en t = 1
    with pytest.raises(StepFloor) as exc:
        integrar(lambda t, y: y ** 2, [1.0], 0.0, 2.0, 1e-8)
    assert exc.value.t == pytest.approx(1.0, abs=1e-3)


def test_empty_interval_returns_initial_value():
    res = integrar(lambda t, y: -y, [0.5j], 1.0, 1.0, 1e-9)
    np.testing.assert_array_equal(res.values, [[0.5j]])
    assert res.stats["accepted"] == 0
