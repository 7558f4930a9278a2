"""Gate-level circuits and an exact density-matrix simulator with Kraus noise."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

MAX_WIDTH = 12
AUX_TAG = "aux"

GATE_KINDS = ("H", "X", "U1", "CX", "GeneralU")
_N_PARAMS = {"H": 0, "X": 0, "U1": 1, "CX": 0, "GeneralU": 3}
_N_QUBITS = {"H": 1, "X": 1, "U1": 1, "CX": 2, "GeneralU": 1}


class SimulationError(ValueError):
    """Raised for malformed circuits, states or noise settings."""


def general_u_matrix(alpha: float, beta: float, gamma: float) -> np.ndarray:
    ca, sa = math.cos(alpha / 2), math.sin(alpha / 2)
    return np.array(
        [
            [ca, -np.exp(1j * gamma) * sa],
            [np.exp(1j * beta) * sa, np.exp(1j * (beta + gamma)) * ca],
        ],
        dtype=complex,
    )


_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_CX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


@dataclass(frozen=True)
class Gate:
    """One gate. ``qubits`` for CX is ``(control, target)``."""

    kind: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    tag: str | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise SimulationError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(self.qubits) != _N_QUBITS[self.kind]:
            raise SimulationError(f"{self.kind} acts on {_N_QUBITS[self.kind]} qubit(s)")
        if len(set(self.qubits)) != len(self.qubits) or min(self.qubits) < 0:
            raise SimulationError(f"invalid qubit indices {self.qubits}")
        if len(self.params) != _N_PARAMS[self.kind]:
            raise SimulationError(f"{self.kind} takes {_N_PARAMS[self.kind]} parameter(s)")
        if not all(math.isfinite(p) for p in self.params):
            raise SimulationError(f"non-finite angle in {self.kind}{self.params}")

    @property
    def is_single_qubit(self) -> bool:
        return len(self.qubits) == 1

    def matrix(self, angle_scale: float = 1.0) -> np.ndarray:
        p = [a * angle_scale for a in self.params]
        if self.kind == "H":
            return _H
        if self.kind == "X":
            return _X
        if self.kind == "CX":
            return _CX
        if self.kind == "U1":
            return np.diag([1.0, np.exp(1j * p[0])]).astype(complex)
        return general_u_matrix(*p)

    def inverse(self) -> "Gate":
        if self.kind == "U1":
            return replace(self, params=(-self.params[0],))
        if self.kind == "GeneralU":
            a, b, g = self.params
            return replace(self, params=(-a, -g, -b))
        return self

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "qubits": list(self.qubits),
            "params": list(self.params),
            "tag": self.tag,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Gate":
        return cls(d["kind"], tuple(d["qubits"]), tuple(d.get("params", ())), d.get("tag"))


@dataclass(frozen=True)
class Circuit:
    width: int
    gates: tuple[Gate, ...] = ()
    lam: float = 0.0

    def __post_init__(self):
        if self.width < 1:
            raise SimulationError("circuit width must be >= 1")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.width:
                raise SimulationError(f"gate {g.kind}{g.qubits} outside width {self.width}")

    def __len__(self):
        return len(self.gates)

    def single_qubit_slots(self) -> list[int]:
        """Indices of the single-qubit gates of the circuit, ignoring auxiliary ones."""
        return [i for i, g in enumerate(self.gates) if g.is_single_qubit and g.tag != AUX_TAG]

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "lambda": self.lam,
            "gates": [g.to_dict() for g in self.gates],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        return cls(int(d["width"]), tuple(Gate.from_dict(g) for g in d["gates"]), float(d["lambda"]))

    @classmethod
    def from_json(cls, s: str) -> "Circuit":
        return cls.from_dict(json.loads(s))


def _check_prob(name: str, p: float):
    if not (0.0 <= p <= 1.0):
        raise SimulationError(f"{name} must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class NoiseModel:
    """Per-gate noise settings.

    Depolarizing (``p1`` after single-qubit gates, ``p2`` after CX) and amplitude
    damping act on the qubits of each gate. ``coherent_eps`` scales every gate angle
    by ``1 + coherent_eps``. ``global_depolarizing`` is one whole-register
    depolarizing channel applied once after the full circuit. ``readout_flip`` is a
    classical bit-flip probability at measurement.
    """

    p1: float = 0.0
    p2: float = 0.0
    gamma_ad: float = 0.0
    coherent_eps: float = 0.0
    readout_flip: float = 0.0
    global_depolarizing: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2", "gamma_ad", "readout_flip", "global_depolarizing"):
            _check_prob(name, getattr(self, name))
        if not math.isfinite(self.coherent_eps):
            raise SimulationError("coherent_eps must be finite")

    @property
    def is_identity(self) -> bool:
        return all(v == 0.0 for v in (self.p1, self.p2, self.gamma_ad, self.coherent_eps,
                                      self.readout_flip, self.global_depolarizing))

    def kraus_sets(self, n_qubits: int) -> list[list[np.ndarray]]:
        """Kraus sets applied after a gate acting on ``n_qubits`` qubits, in order."""
        sets = []
        p = self.p1 if n_qubits == 1 else self.p2
        if p > 0:
            sets.append(depolarizing_kraus(p, n_qubits))
        if self.gamma_ad > 0:
            ad = amplitude_damping_kraus(self.gamma_ad)
            for q in range(n_qubits):
                sets.append([_embed_local(k, q, n_qubits) for k in ad])
        return sets

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("p1", "p2", "gamma_ad", "coherent_eps", "readout_flip", "global_depolarizing")}


_PAULIS = (
    np.eye(2, dtype=complex),
    _X,
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.diag([1.0, -1.0]).astype(complex),
)


def depolarizing_kraus(p: float, n_qubits: int = 1) -> list[np.ndarray]:
    """Kraus operators of rho -> (1 - p) rho + p I/d on ``n_qubits`` (4**n ops)."""
    _check_prob("p", p)
    d2 = 4**n_qubits
    ops = []
    for idx in np.ndindex(*(4,) * n_qubits):
        P = _PAULIS[idx[0]]
        for i in idx[1:]:
            P = np.kron(P, _PAULIS[i])
        w = 1 - p + p / d2 if not any(idx) else p / d2
        ops.append(math.sqrt(w) * P)
    return ops


def amplitude_damping_kraus(gamma: float) -> list[np.ndarray]:
    _check_prob("gamma", gamma)
    return [
        np.array([[1, 0], [0, math.sqrt(1 - gamma)]], dtype=complex),
        np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=complex),
    ]


def _embed_local(op: np.ndarray, q: int, n: int) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for i in range(n):
        out = np.kron(out, op if i == q else np.eye(2))
    return out


def _superop(kraus: Iterable[np.ndarray]) -> np.ndarray:
    return sum(np.kron(k, k.conj()) for k in kraus)


@lru_cache(maxsize=256)
def _noise_superop(noise: NoiseModel, n_qubits: int) -> np.ndarray | None:
    sets = noise.kraus_sets(n_qubits)
    if not sets:
        return None
    S = np.eye(4**n_qubits, dtype=complex)
    for ks in sets:
        S = _superop(ks) @ S
    return S


class DensityMatrix:
    """Immutable wrapper around a ``2**width`` square density matrix."""

    __slots__ = ("_data", "width")

    def __init__(self, data: np.ndarray, check: bool = True):
        data = np.array(data, dtype=complex)
        dim = data.shape[0]
        if data.ndim != 2 or data.shape[1] != dim or dim & (dim - 1) or dim < 2:
            raise SimulationError(f"density matrix must be 2^n square, got {data.shape}")
        if check:
            if np.max(np.abs(data - data.conj().T)) > 1e-10:
                raise SimulationError("density matrix not Hermitian")
            if abs(np.trace(data) - 1) > 1e-10:
                raise SimulationError("density matrix trace != 1")
            if np.linalg.eigvalsh(data).min() < -1e-10:
                raise SimulationError("density matrix has negative eigenvalues")
        data.setflags(write=False)
        self._data = data
        self.width = dim.bit_length() - 1

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    @classmethod
    def zero_state(cls, width: int) -> "DensityMatrix":
        rho = np.zeros((2**width, 2**width), dtype=complex)
        rho[0, 0] = 1.0
        return cls(rho, check=False)

    @classmethod
    def basis_state(cls, bits: str) -> "DensityMatrix":
        rho = np.zeros((2 ** len(bits), 2 ** len(bits)), dtype=complex)
        i = int(bits, 2)
        rho[i, i] = 1.0
        return cls(rho, check=False)

    @classmethod
    def maximally_mixed(cls, width: int) -> "DensityMatrix":
        return cls(np.eye(2**width, dtype=complex) / 2**width, check=False)

    @classmethod
    def from_statevector(cls, psi: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), check=False)


def _apply_superop(t: np.ndarray, S: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Apply a superoperator on ``qubits`` to a rank-2n density tensor."""
    m = len(qubits)
    axes = list(qubits) + [n + q for q in qubits]
    rest = [a for a in range(2 * n) if a not in axes]
    moved = np.transpose(t, axes + rest).reshape(4**m, -1)
    out = (S @ moved).reshape((2,) * (2 * n))
    return np.transpose(out, np.argsort(axes + rest))


def _physical_gates(gates: Sequence[Gate], scale: float):
    """Yield ``(gate, unitary)`` per physical gate.

    An auxiliary single-qubit gate directly after a single-qubit gate on the same
    qubit completes that gate: both run as one physical operation, so the noise
    channels act once after the pair.
    """
    i = 0
    while i < len(gates):
        g = gates[i]
        U = g.matrix(scale)
        i += 1
        if g.is_single_qubit:
            while (i < len(gates) and gates[i].tag == AUX_TAG
                   and gates[i].qubits == g.qubits):
                U = gates[i].matrix(scale) @ U
                i += 1
        yield g, U


def apply_circuit(rho0: DensityMatrix, circuit: Circuit,
                  noise: NoiseModel | None = None) -> DensityMatrix:
    """Run ``circuit`` on ``rho0``: each physical gate is followed by its noise channels."""
    noise = noise or NoiseModel()
    n = circuit.width
    if rho0.width != n:
        raise SimulationError(f"state width {rho0.width} != circuit width {n}")
    scale = 1.0 + noise.coherent_eps
    t = rho0.data.reshape((2,) * (2 * n))
    for g, U in _physical_gates(circuit.gates, scale):
        S = np.kron(U, U.conj())
        N = _noise_superop(noise, len(g.qubits))
        if N is not None:
            S = N @ S
        t = _apply_superop(t, S, g.qubits, n)
    rho = t.reshape(2**n, 2**n)
    if noise.global_depolarizing > 0:
        p = noise.global_depolarizing
        rho = (1 - p) * rho + p * np.eye(2**n) / 2**n
    # symmetrize away round-off so downstream invariants hold at 1e-10
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho, check=False)


@lru_cache(maxsize=16)
def _mean_z_diag(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    ones = np.zeros(2**n)
    for q in range(n):
        ones += (idx >> (n - 1 - q)) & 1
    return (n - 2 * ones) / n


def expect_mean_z(rho: DensityMatrix) -> float:
    """(1/n) sum_i tr(Z_i rho); |0...0> gives +1."""
    val = np.dot(_mean_z_diag(rho.width), np.diag(rho.data))
    return float(val.real)


def sample_expectation(rho: DensityMatrix, shots: int, seed: int,
                       readout_flip: float = 0.0) -> tuple[float, float]:
    """Finite-shot estimate of mean-Z with independent readout flips.

    Returns ``(mean, standard error)`` over per-shot mean-Z values.
    """
    if shots < 1:
        raise SimulationError("shots must be >= 1")
    _check_prob("readout_flip", readout_flip)
    n = rho.width
    probs = np.clip(np.diag(rho.data).real, 0.0, None)
    probs = probs / probs.sum()
    rng = np.random.Generator(np.random.PCG64(seed))
    outcomes = rng.choice(2**n, size=shots, p=probs)
    bits = (outcomes[:, None] >> np.arange(n - 1, -1, -1)) & 1
    if readout_flip > 0:
        bits = bits ^ (rng.random(bits.shape) < readout_flip)
    per_shot = (n - 2 * bits.sum(axis=1)) / n
    mean = float(per_shot.mean())
    stderr = float(per_shot.std(ddof=1) / math.sqrt(shots)) if shots > 1 else 0.0
    return mean, stderr


def embed_gate(gate: Gate, width: int, angle_scale: float = 1.0) -> np.ndarray:
    """Full ``2**width`` matrix of ``gate`` (qubit 0 is the most significant bit)."""
    U = gate.matrix(angle_scale)
    m = len(gate.qubits)
    t = np.eye(2**width, dtype=complex).reshape((2,) * (2 * width))
    axes = list(gate.qubits)
    rest = [a for a in range(2 * width) if a not in axes]
    moved = np.transpose(t, axes + rest).reshape(2**m, -1)
    out = (U @ moved).reshape((2,) * (2 * width))
    return np.transpose(out, np.argsort(axes + rest)).reshape(2**width, 2**width)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    if circuit.width > MAX_WIDTH:
        raise SimulationError(f"width {circuit.width} exceeds dense guard {MAX_WIDTH}")
    U = np.eye(2**circuit.width, dtype=complex)
    for g in circuit.gates:
        U = embed_gate(g, circuit.width) @ U
    return U


def observable_value(circuit: Circuit, noise: NoiseModel | None = None,
                     shots: int | None = None, seed: int = 0) -> tuple[float, float | None]:
    """Mean-Z of ``circuit`` run on |0...0>.

    Without shots the exact expectation is returned, with readout flips folded in
    as the factor ``1 - 2 f``; with shots the value is sampled.
    """
    noise = noise or NoiseModel()
    rho = apply_circuit(DensityMatrix.zero_state(circuit.width), circuit, noise)
    if shots:
        return sample_expectation(rho, shots, seed, noise.readout_flip)
    return (1 - 2 * noise.readout_flip) * expect_mean_z(rho), None
