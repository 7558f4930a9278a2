"""Randomized circuit ensembles: auxiliary GeneralU gates with uniform angles."""

from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .qsim import AUX_TAG, Circuit, Gate

CircuitBuilder = Callable[[float], Circuit]


class RandomizationError(ValueError):
    pass


class Strategy(str, enum.Enum):
    RandomInsert = "RandomInsert"
    EquipSingles = "EquipSingles"


class RangeMode(str, enum.Enum):
    Symmetric = "Symmetric"
    Positive = "Positive"


@dataclass(frozen=True)
class RandomizationPlan:
    n_r: int = 9
    delta: float = 0.1
    n_g: int = 10
    strategy: Strategy = Strategy.EquipSingles
    range_mode: RangeMode = RangeMode.Positive
    seed: int = 42

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "range_mode", RangeMode(self.range_mode))
        if self.n_r < 0 or self.n_g < 0 or self.delta < 0:
            raise RandomizationError("n_r, n_g and delta must be non-negative")

    @property
    def bounds(self) -> tuple[float, float]:
        if self.range_mode is RangeMode.Positive:
            return 0.0, self.delta
        return -self.delta, self.delta

    def to_dict(self) -> dict:
        d = asdict(self)
        d["strategy"] = self.strategy.value
        d["range_mode"] = self.range_mode.value
        return d


@dataclass(frozen=True)
class EnsembleMember:
    """One randomized circuit family.

    ``positions`` are single-qubit slot ordinals (EquipSingles) or
    ``(boundary, qubit)`` pairs (RandomInsert): the auxiliary gate goes after the
    first ``boundary`` base gates, on ``qubit``.
    """

    index: int
    positions: tuple
    thetas: tuple[tuple[float, float, float], ...]

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "positions": [list(p) if isinstance(p, tuple) else p for p in self.positions],
            "thetas": [list(t) for t in self.thetas],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleMember":
        pos = tuple(tuple(p) if isinstance(p, list) else p for p in d["positions"])
        return cls(int(d["index"]), pos, tuple(tuple(float(x) for x in t) for t in d["thetas"]))


def member_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for member ``index``; unaffected by the ensemble size."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))


def generate_member(template: Circuit, plan: RandomizationPlan, index: int) -> EnsembleMember:
    rng = member_rng(plan.seed, index)
    lo, hi = plan.bounds
    if plan.strategy is Strategy.EquipSingles:
        n_slots = len(template.single_qubit_slots())
        if n_slots != plan.n_g:
            raise RandomizationError(
                f"EquipSingles needs n_g == single-qubit slot count ({n_slots}), got {plan.n_g}")
        positions = tuple(range(plan.n_g))
    else:
        boundaries = rng.integers(0, len(template.gates) + 1, size=plan.n_g)
        qubits = rng.integers(0, template.width, size=plan.n_g)
        positions = tuple((int(b), int(q)) for b, q in zip(boundaries, qubits))
    thetas = rng.uniform(lo, hi, size=(plan.n_g, 3)) if plan.delta > 0 else np.zeros((plan.n_g, 3))
    return EnsembleMember(index, positions, tuple(tuple(float(x) for x in t) for t in thetas))


def generate_ensemble(builder: CircuitBuilder | Circuit, plan: RandomizationPlan,
                      template_lambda: float = 1.0) -> list[EnsembleMember]:
    """Members ``1..n_r``. Positions and angles do not depend on lambda."""
    template = builder if isinstance(builder, Circuit) else builder(template_lambda)
    return [generate_member(template, plan, r) for r in range(1, plan.n_r + 1)]


def splice(base: Circuit, member: EnsembleMember) -> Circuit:
    """Insert the member's auxiliary gates into ``base``.

    A GeneralU with all-zero angles is the identity and is not emitted, so a
    zero-width plan reproduces the base circuit exactly.
    """
    aux = [Gate("GeneralU", (0,), t, tag=AUX_TAG) for t in member.thetas]
    gates = list(base.gates)
    if not member.positions:
        return base
    if isinstance(member.positions[0], tuple):
        inserts: dict[int, list[Gate]] = {}
        for (b, q), a in zip(member.positions, aux):
            if b > len(gates) or q >= base.width:
                raise RandomizationError("insertion site outside the base circuit")
            if not any(a.params):
                continue
            inserts.setdefault(b, []).append(Gate("GeneralU", (q,), a.params, tag=AUX_TAG))
        out = list(inserts.get(0, []))
        for i, g in enumerate(gates, start=1):
            out.append(g)
            out.extend(inserts.get(i, []))
        return Circuit(base.width, tuple(out), base.lam)
    slots = base.single_qubit_slots()
    if len(slots) != len(member.positions):
        raise RandomizationError("member does not match the base circuit's slot census")
    equip = {slots[s]: a for s, a in zip(member.positions, aux)}
    out = []
    for i, g in enumerate(gates):
        out.append(g)
        if i in equip and any(equip[i].params):
            out.append(Gate("GeneralU", g.qubits, equip[i].params, tag=AUX_TAG))
    return Circuit(base.width, tuple(out), base.lam)


def realize_member(builder: CircuitBuilder, member: EnsembleMember, lam: float) -> Circuit:
    return splice(builder(lam), member)


def ensemble_manifest(plan: RandomizationPlan, members: list[EnsembleMember]) -> dict:
    return {"plan": plan.to_dict(), "members": [m.to_dict() for m in members]}


def load_ensemble_manifest(d: dict | str) -> tuple[RandomizationPlan, list[EnsembleMember]]:
    if isinstance(d, str):
        d = json.loads(d)
    plan = RandomizationPlan(**d["plan"])
    return plan, [EnsembleMember.from_dict(m) for m in d["members"]]
