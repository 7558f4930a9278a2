import json

import numpy as np
import pytest

from greclab.ising import ground_state_builder
from greclab.qsim import AUX_TAG, Circuit, Gate, NoiseModel, circuit_unitary, embed_gate, observable_value
from greclab.randomize import (
    EnsembleMember,
    RandomizationError,
    RandomizationPlan,
    Strategy,
    ensemble_manifest,
    generate_ensemble,
    load_ensemble_manifest,
    realize_member,
    splice,
)

NOISE = NoiseModel(p1=0.002, p2=0.01, coherent_eps=0.02)
GRID = np.linspace(1.0, 3.5, 6)


def curve(builder, member=None):
    out = []
    for lam in GRID:
        c = builder(lam) if member is None else realize_member(builder, member, lam)
        out.append(observable_value(c, NOISE)[0])
    return np.array(out)


@pytest.mark.parametrize("strategy", list(Strategy))
def test_zero_delta_reproduces_base_curve(strategy):
    plan = RandomizationPlan(n_r=3, delta=0.0, strategy=strategy)
    base = curve(ground_state_builder)
    for m in generate_ensemble(ground_state_builder, plan):
        assert np.allclose(curve(ground_state_builder, m), base, atol=1e-14, rtol=0)


def test_equip_singles_shape():
    members = generate_ensemble(ground_state_builder, RandomizationPlan())
    assert len(members) == 9
    for m in members:
        assert len(m.thetas) == 10
        flat = np.array(m.thetas).ravel()
        assert flat.size == 30
        assert flat.min() >= 0 and flat.max() <= 0.1
        c = realize_member(ground_state_builder, m, 2.0)
        assert sum(g.tag == AUX_TAG for g in c.gates) == 10


def test_symmetric_range():
    plan = RandomizationPlan(n_r=20, delta=0.3, range_mode="Symmetric")
    flat = np.array([m.thetas for m in generate_ensemble(ground_state_builder, plan)]).ravel()
    assert flat.min() >= -0.3 and flat.max() <= 0.3 and flat.min() < 0


def test_zero_angles_give_base_unitary():
    base = ground_state_builder(1.8)
    m = EnsembleMember(1, tuple(range(10)), ((0.0, 0.0, 0.0),) * 10)
    assert np.max(np.abs(circuit_unitary(splice(base, m)) - circuit_unitary(base))) < 1e-12


@pytest.mark.parametrize("slot", [0, 4, 9])
def test_pi_rotation_on_one_slot(slot):
    base = ground_state_builder(2.3)
    thetas = [(0.0, 0.0, 0.0)] * 10
    thetas[slot] = (np.pi, 0.0, 0.0)
    spliced = splice(base, EnsembleMember(1, tuple(range(10)), tuple(thetas)))
    # build the expected matrix gate by gate with an explicit kron embedding
    idx = base.single_qubit_slots()[slot]
    rot = np.array([[0, -1], [1, 0]], dtype=complex)
    q = base.gates[idx].qubits[0]
    R = np.kron(np.kron(np.eye(2**q), rot), np.eye(2 ** (3 - q)))
    U = np.eye(16, dtype=complex)
    for i, g in enumerate(base.gates):
        U = embed_gate(g, 4) @ U
        if i == idx:
            U = R @ U
    assert np.max(np.abs(circuit_unitary(spliced) - U)) < 1e-12


def test_member_fixed_across_lambda():
    m = generate_ensemble(ground_state_builder, RandomizationPlan(n_r=1))[0]
    a = realize_member(ground_state_builder, m, 1.5)
    b = realize_member(ground_state_builder, m, 2.0)
    aux_a = [g for g in a.gates if g.tag == AUX_TAG]
    aux_b = [g for g in b.gates if g.tag == AUX_TAG]
    assert aux_a == aux_b
    assert [g for g in a.gates if g.tag != AUX_TAG] != [g for g in b.gates if g.tag != AUX_TAG]


def test_reproducible_and_prefix_stable():
    a = generate_ensemble(ground_state_builder, RandomizationPlan(n_r=5, seed=7))
    b = generate_ensemble(ground_state_builder, RandomizationPlan(n_r=5, seed=7))
    c = generate_ensemble(ground_state_builder, RandomizationPlan(n_r=9, seed=7))
    d = generate_ensemble(ground_state_builder, RandomizationPlan(n_r=5, seed=8))
    assert a == b
    assert c[:5] == a
    assert a != d


def test_small_delta_continuity():
    base = curve(ground_state_builder)
    devs = []
    for delta in (0.2, 0.1, 0.05, 0.0):
        members = generate_ensemble(ground_state_builder, RandomizationPlan(n_r=3, delta=delta, seed=3))
        devs.append(max(np.max(np.abs(curve(ground_state_builder, m) - base)) for m in members))
    assert all(x > y for x, y in zip(devs, devs[1:]))
    assert devs[-1] == 0.0


def test_aux_gates_not_counted_as_slots():
    m = generate_ensemble(ground_state_builder, RandomizationPlan(n_r=1))[0]
    c = realize_member(ground_state_builder, m, 2.0)
    assert len(c.single_qubit_slots()) == 10
    assert len(c) == 28


def test_random_insert():
    plan = RandomizationPlan(n_r=4, delta=0.1, n_g=6, strategy="RandomInsert", seed=1)
    for m in generate_ensemble(ground_state_builder, plan):
        c = realize_member(ground_state_builder, m, 2.0)
        assert len(c) == 18 + 6
        assert all(0 <= b <= 18 and 0 <= q < 4 for b, q in m.positions)
        # removing auxiliary gates restores the base circuit
        assert tuple(g for g in c.gates if g.tag != AUX_TAG) == ground_state_builder(2.0).gates


def test_equip_singles_slot_mismatch():
    with pytest.raises(RandomizationError):
        generate_ensemble(ground_state_builder, RandomizationPlan(n_g=7))
    m = EnsembleMember(1, (0, 1), ((0.1, 0, 0), (0.1, 0, 0)))
    with pytest.raises(RandomizationError):
        splice(ground_state_builder(2.0), m)


def test_plan_validation():
    with pytest.raises(RandomizationError):
        RandomizationPlan(delta=-0.1)
    with pytest.raises(ValueError):
        RandomizationPlan(strategy="Sometimes")


def test_manifest_roundtrip():
    plan = RandomizationPlan(n_r=3, strategy="RandomInsert", n_g=4)
    members = generate_ensemble(ground_state_builder, plan)
    text = json.dumps(ensemble_manifest(plan, members))
    plan2, members2 = load_ensemble_manifest(text)
    assert plan2 == plan and members2 == members


def test_template_circuit_accepted():
    c = Circuit(2, (Gate("H", (0,)), Gate("CX", (0, 1)), Gate("U1", (1,), (0.2,))))
    members = generate_ensemble(c, RandomizationPlan(n_r=2, n_g=2))
    assert len(splice(c, members[0])) == 5
