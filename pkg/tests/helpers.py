from __future__ import annotations

import numpy as np

from greclab.qsim import Circuit, Gate


def random_circuit(rng: np.random.Generator, width: int, n_gates: int) -> Circuit:
    gates = []
    for _ in range(n_gates):
        kind = rng.choice(["H", "X", "U1", "CX", "GeneralU"] if width > 1 else ["H", "X", "U1", "GeneralU"])
        if kind == "CX":
            q = rng.choice(width, size=2, replace=False)
            gates.append(Gate("CX", tuple(int(x) for x in q)))
        else:
            q = (int(rng.integers(width)),)
            n_par = {"H": 0, "X": 0, "U1": 1, "GeneralU": 3}[kind]
            gates.append(Gate(kind, q, tuple(rng.uniform(-np.pi, np.pi, n_par))))
    return Circuit(width, tuple(gates), 0.0)


ACCEPTANCE_LINES: list[str] = []


class criterion:
    """Record one acceptance criterion as a PASS/FAIL line, re-raising failures."""

    def __init__(self, number: int, title: str):
        self.label = f"criterion {number}: {title}"

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        line = f"{status}  {self.label}"
        if exc is not None:
            line += f"  ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return False
