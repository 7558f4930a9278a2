"""Transverse-field Ising benchmark: Hamiltonian, exact magnetization, circuit.

Sign convention: the Hamiltonian carries ``+lam * sum Z``, so its ground state
has negative magnetization. Every magnetization reported here is the mean-Z of
the spin-flipped ground state (equivalently, minus the ground state's mean-Z).
The preparation circuit produces that flipped state directly, so plain mean-Z of
the circuit output is comparable with :func:`exact_magnetization`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .qsim import Circuit, Gate

MAX_SPINS = 12

SIGN_CONVENTION = "reported = -<mean Z> of the ground state of H(+lam); circuits prepare the X-flipped ground state"


class IsingError(ValueError):
    pass


class Branch(enum.Enum):
    BelowOne = "BelowOne"
    AboveOne = "AboveOne"

    @classmethod
    def for_lambda(cls, lam: float) -> "Branch":
        return cls.AboveOne if lam >= 1 else cls.BelowOne


@dataclass(frozen=True)
class IsingSpec:
    lam: float
    n: int = 4
    branch: Branch | None = None

    def __post_init__(self):
        if self.n < 2:
            raise IsingError("need at least 2 spins")
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise IsingError(f"lambda must be finite and >= 0, got {self.lam}")
        expected = Branch.for_lambda(self.lam)
        if self.branch is None:
            object.__setattr__(self, "branch", expected)
        elif self.branch is not expected:
            raise IsingError(f"branch {self.branch.value} inconsistent with lambda={self.lam}")


_I2 = np.eye(2, dtype=complex)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.diag([1.0, -1.0]).astype(complex)


def _pauli_string(ops: dict[int, np.ndarray], n: int) -> np.ndarray:
    return reduce(np.kron, [ops.get(i, _I2) for i in range(n)])


def hamiltonian_matrix(spec: IsingSpec, periodic_xx: bool = False) -> np.ndarray:
    """Dense Hamiltonian of the n-spin chain.

    Nearest-neighbour XX couplings along the open chain, the boundary term
    ``Y_1 Z_2 ... Z_{n-1} Y_n`` and the field ``lam * sum Z``. This combination
    maps to a translation-invariant free-fermion chain. ``periodic_xx`` adds the
    extra ``X_n X_1`` bond; that variant is kept for comparison only and does not
    reproduce :func:`exact_magnetization`.
    """
    n = spec.n
    if n > MAX_SPINS:
        raise IsingError(f"n={n} exceeds dense guard {MAX_SPINS}")
    bonds = n if periodic_xx else n - 1
    H = sum(_pauli_string({i: _SX, (i + 1) % n: _SX}, n) for i in range(bonds))
    boundary = {0: _SY, n - 1: _SY}
    boundary.update({i: _SZ for i in range(1, n - 1)})
    H = H + _pauli_string(boundary, n)
    H = H + spec.lam * sum(_pauli_string({i: _SZ}, n) for i in range(n))
    return H


def exact_magnetization(lam: float) -> float:
    if lam < 0 or not math.isfinite(lam):
        raise IsingError(f"lambda must be finite and >= 0, got {lam}")
    m = lam / (2 * math.sqrt(1 + lam * lam))
    return 0.5 + m if lam >= 1 else m


def _parity_diag(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    pop = np.array([bin(i).count("1") for i in idx])
    return np.where(pop % 2 == 0, 1.0, -1.0)


def branch_ground_state(spec: IsingSpec, degeneracy_tol: float = 1e-9) -> np.ndarray:
    """Lowest eigenvector of the Hamiltonian inside the branch's parity sector.

    The Hamiltonian commutes with ``prod Z``; the upper branch lives in the even
    sector and the lower branch in the odd one. Inside a sector the lowest level
    is non-degenerate, which also settles the level crossing at ``lam = 1``.
    """
    H = hamiltonian_matrix(spec)
    parity = 1.0 if spec.branch is Branch.AboveOne else -1.0
    sector = np.flatnonzero(_parity_diag(spec.n) == parity)
    w, v = np.linalg.eigh(H[np.ix_(sector, sector)])
    if w[1] - w[0] < degeneracy_tol:
        raise IsingError(f"degenerate sector ground state at lambda={spec.lam}: gap {w[1] - w[0]:.3e}")
    psi = np.zeros(2**spec.n, dtype=complex)
    psi[sector] = v[:, 0]
    return psi


def oracle_magnetization_matrix(spec: IsingSpec) -> float:
    psi = branch_ground_state(spec)
    n = spec.n
    z = sum(np.real(np.vdot(psi, _pauli_string({i: _SZ}, n) @ psi)) for i in range(n)) / n
    return float(-z)


def bogoliubov_angle(lam: float) -> float:
    """Mixing angle phi of the (k, -k) = (pi/2, -pi/2) mode pair: tan(2 phi) = 1/lam."""
    return 0.5 * math.atan2(1.0, lam)


def build_ground_state_circuit(spec: IsingSpec) -> Circuit:
    """Four-qubit circuit preparing the flipped upper-branch ground state from |0000>.

    The target state is ``cos(phi)|0000> - sin(phi)|P>``, where ``|P>`` is the
    position-space image of the occupied momentum pair (+pi/2, -pi/2):
    ``(|1100> + |0110> + |0011> - |1001>)/2``. The zero and pi modes stay empty on
    this branch. Blocks:

    * Bogoliubov rotation on qubit 0 (H, U1(-2 phi), H, U1(pi/2)) giving
      ``cos(phi)|0> - sin(phi)|1>``;
    * Givens mixing of qubits 0 and 2 (controlled-H then CX) spreading the
      excitation over the two sublattices;
    * pair completion by CX fan-out onto qubits 1 and 3;
    * Givens rotation of qubits 1 and 3 (controlled-Z, controlled-H), which
      carries the fermionic sign of the wrapped pair.

    The census is exactly ten single-qubit gates.
    """
    if spec.n != 4:
        raise IsingError("the preparation circuit is built for n = 4 only")
    if spec.branch is not Branch.AboveOne:
        raise IsingError("the preparation circuit covers the lam >= 1 branch only")
    phi = bogoliubov_angle(spec.lam)
    q8 = math.pi / 4
    g = [
        # Bogoliubov rotation
        Gate("H", (0,)),
        Gate("U1", (0,), (-2 * phi,)),
        Gate("H", (0,)),
        Gate("U1", (0,), (math.pi / 2,)),
        # controlled-H(0 -> 2), then CX(2 -> 0): |10> -> (|10> + |01>)/sqrt2
        Gate("GeneralU", (2,), (q8, 0.0, 0.0)),
        Gate("CX", (0, 2)),
        Gate("GeneralU", (2,), (-q8, 0.0, 0.0)),
        Gate("CX", (2, 0)),
        # pair completion
        Gate("CX", (0, 1)),
        Gate("CX", (2, 3)),
        # Givens on (1, 3): CX(1->3), CZ(3,1), CH(3->1), CX(1->3)
        Gate("CX", (1, 3)),
        Gate("H", (1,)),
        Gate("CX", (3, 1)),
        Gate("H", (1,)),
        Gate("GeneralU", (1,), (q8, 0.0, 0.0)),
        Gate("CX", (3, 1)),
        Gate("GeneralU", (1,), (-q8, 0.0, 0.0)),
        Gate("CX", (1, 3)),
    ]
    return Circuit(4, tuple(g), spec.lam)


def ground_state_builder(lam: float) -> Circuit:
    return build_ground_state_circuit(IsingSpec(lam))
