import numpy as np
import pytest

from greclab.ising import exact_magnetization, ground_state_builder
from greclab.mitigate import FoldError, ZneConfig, fold_circuit, linear_extrapolate, zne_run
from greclab.mitigate.zne import default_scale_factors, zne_point
from greclab.qsim import Circuit, Gate, NoiseModel, circuit_unitary

from helpers import random_circuit


def test_scale_factors():
    s = default_scale_factors()
    assert len(s) == 9 and s[0] == 1.0 and s[-1] == 1.9
    assert np.allclose(np.diff(s), 0.1125, atol=1e-15)


@pytest.mark.parametrize("scale", [1.0, 1.1125, 1.45, 1.9, 2.5, 3.0, 4.2])
def test_gate_fold_preserves_unitary(scale):
    c = ground_state_builder(2.2)
    folded, achieved = fold_circuit(c, scale, seed=3)
    assert np.max(np.abs(circuit_unitary(folded) - circuit_unitary(c))) < 1e-10
    assert len(folded) == round(achieved * len(c))
    assert abs(achieved - scale) <= 1 / len(c) + 1e-12


def test_fold_random_circuits(rng):
    for _ in range(20):
        c = random_circuit(rng, 3, 12)
        for s in default_scale_factors():
            folded, _ = fold_circuit(c, s, seed=int(rng.integers(1000)))
            assert np.max(np.abs(circuit_unitary(folded) - circuit_unitary(c))) < 1e-10


def test_scale_one_unchanged():
    c = ground_state_builder(1.3)
    folded, achieved = fold_circuit(c, 1.0)
    assert folded == c and achieved == 1.0


def test_ten_gates_scale_1_8():
    c = Circuit(1, tuple(Gate("U1", (0,), (0.1 * i,)) for i in range(10)))
    folded, achieved = fold_circuit(c, 1.8)
    assert len(folded) == 18 and achieved == 1.8


def test_global_fold():
    c = ground_state_builder(2.0)
    folded, achieved = fold_circuit(c, 3, mode="GlobalFold")
    assert len(folded) == 3 * len(c) and achieved == 3.0
    assert np.max(np.abs(circuit_unitary(folded) - circuit_unitary(c))) < 1e-10
    with pytest.raises(FoldError):
        fold_circuit(c, 2, mode="GlobalFold")
    with pytest.raises(FoldError):
        fold_circuit(c, 1.5, mode="GlobalFold")


def test_fold_errors_and_determinism():
    c = ground_state_builder(2.0)
    with pytest.raises(FoldError):
        fold_circuit(c, 0.5)
    assert fold_circuit(c, 1.5, seed=9) == fold_circuit(c, 1.5, seed=9)
    with pytest.raises(FoldError):
        ZneConfig(fit="Richardson")
    with pytest.raises(FoldError):
        ZneConfig(scale_factors=(0.5, 1.0))


def test_linear_intercept_exact():
    s = np.array(default_scale_factors())
    fit = linear_extrapolate(s, 0.9 - 0.05 * s)
    assert abs(fit.intercept - 0.9) < 1e-12
    assert abs(fit.slope + 0.05) < 1e-12


def test_zero_noise_zne_is_exact():
    grid = np.linspace(1.0, 3.5, 26)
    curve = zne_run(ground_state_builder, NoiseModel(), ZneConfig(), grid)
    ref = np.array([exact_magnetization(l) for l in grid])
    assert np.max(np.abs(curve.values - ref)) < 1e-9


def test_zne_reduces_depolarizing_bias():
    noise = NoiseModel(p1=0.002, p2=0.01)
    c = ground_state_builder(2.0)
    raw = zne_point(c, noise, ZneConfig(scale_factors=(1.0,))).intercept
    zne = zne_point(c, noise, ZneConfig()).intercept
    ref = exact_magnetization(2.0)
    assert abs(zne - ref) < abs(raw - ref)
