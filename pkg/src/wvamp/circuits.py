"""Gate-level builders and an exact branch-tracking simulator.

Gate conventions (these reproduce the postselection amplitudes
``(e^{-i eps}, -e^{i eps})/sqrt(2)`` of the single-ancilla protocol and are
pinned by a self-test):

    RZ(theta) = exp(-1j theta sigma_z / 2)
    RY(theta) = exp(-1j theta sigma_y / 2)
    CRZ(control, target, theta): RZ(theta) on the target when control is |1>

A controlled rotation CRZ(2 phi) equals the symmetric coupling
``exp(-1j (phi/2) sigma_z (x) sigma_z)`` only up to a deterministic local
meter phase RZ(phi) (per coupling) and a sign flip of the effective ancilla
observable. The builders append the inverse meter rotation RZ(-n phi) after
the couplings, which puts every circuit output exactly on top of the analytic
``setups`` states; the phase commutes with the Z readout, so responses and
probabilities are untouched.

MeasureKeep projects one qubit onto a fixed outcome (always 0 in the built
circuits), renormalizes immediately, and multiplies the kept probability into
the run result. Circuits are immutable; ``run`` is pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import statevec as sv
from .errors import VanishingBranch
from .tolerances import PROB_UNDERFLOW

GATE_NAMES = ("RY", "RZ", "CNOT", "CRZ", "MEASUREKEEP")

METER = "m"
SCRATCH = "a1"  # reusable ancilla line of the three-qubit schedule


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[str, ...]
    angle: float | None = None
    outcome: int | None = None

    def __post_init__(self):
        if self.name not in GATE_NAMES:
            raise ValueError(f"unknown gate {self.name!r}")
        if self.name in ("RY", "RZ") and (len(self.qubits) != 1 or self.angle is None):
            raise ValueError(f"{self.name} needs one qubit and an angle")
        if self.name in ("CNOT", "CRZ") and len(self.qubits) != 2:
            raise ValueError(f"{self.name} needs (control, target)")
        if self.name == "CRZ" and self.angle is None:
            raise ValueError("CRZ needs an angle")
        if self.name == "MEASUREKEEP":
            if len(self.qubits) != 1 or self.outcome not in (0, 1):
                raise ValueError("MEASUREKEEP needs one qubit and outcome 0 or 1")
        if self.angle is not None and not np.isfinite(self.angle):
            raise ValueError("gate angle must be finite")


def ry(qubit: str, angle: float) -> Gate:
    return Gate("RY", (qubit,), angle=float(angle))


def rz(qubit: str, angle: float) -> Gate:
    return Gate("RZ", (qubit,), angle=float(angle))


def cnot(control: str, target: str) -> Gate:
    return Gate("CNOT", (control, target))


def crz(control: str, target: str, angle: float) -> Gate:
    return Gate("CRZ", (control, target), angle=float(angle))


def measure_keep(qubit: str, outcome: int = 0) -> Gate:
    return Gate("MEASUREKEEP", (qubit,), outcome=outcome)


@dataclass(frozen=True)
class Circuit:
    gates: tuple[Gate, ...]
    register: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "register", tuple(self.register))
        known = set(self.register)
        for gate in self.gates:
            missing = set(gate.qubits) - known
            if missing:
                raise ValueError(f"gate {gate.name} uses unknown qubits {sorted(missing)}")

    def unitary_part(self) -> "Circuit":
        """The same circuit with every MeasureKeep stripped."""
        return Circuit(tuple(g for g in self.gates if g.name != "MEASUREKEEP"),
                       self.register)


def _rotation_matrix(name: str, angle: float) -> np.ndarray:
    half = 0.5 * angle
    if name == "RY":
        c, s = np.cos(half), np.sin(half)
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if name == "RZ":
        return np.diag([np.exp(-1j * half), np.exp(1j * half)])
    raise ValueError(name)


_CNOT = np.array([[1, 0, 0, 0],
                  [0, 0, 0, 1],
                  [0, 0, 1, 0],
                  [0, 1, 0, 0]], dtype=np.complex128)  # index = control + 2*target


def gate_operator(gate: Gate) -> sv.Operator:
    """The unitary realizing a (non-measurement) gate on its own qubits."""
    if gate.name in ("RY", "RZ"):
        return sv.Operator(_rotation_matrix(gate.name, gate.angle), gate.qubits)
    if gate.name == "CNOT":
        return sv.Operator(_CNOT, gate.qubits)
    if gate.name == "CRZ":
        half = 0.5 * gate.angle
        diag = np.diag([1.0, np.exp(-1j * half), 1.0, np.exp(1j * half)])
        return sv.Operator(diag, gate.qubits)
    raise ValueError(f"{gate.name} has no unitary")


def run(circuit: Circuit, initial: sv.Ket | None = None) -> tuple[sv.Ket, float]:
    """Apply the gates in order; returns (final normalized state, kept probability).

    Each MeasureKeep projects its qubit, multiplies the branch probability
    into the running product, and renormalizes immediately for numerical
    stability.
    """
    if initial is None:
        state = sv.basis_ket(circuit.register, 0)
    else:
        if initial.register != circuit.register:
            raise sv.RegisterError(
                f"initial register {initial.register} != circuit register {circuit.register}")
        state = initial
    kept = 1.0
    for gate in circuit.gates:
        if gate.name == "MEASUREKEEP":
            proj = np.zeros((2, 2), dtype=np.complex128)
            proj[gate.outcome, gate.outcome] = 1.0
            projected = sv.apply(sv.Operator(proj, gate.qubits), state)
            prob = float(np.vdot(projected.amplitudes, projected.amplitudes).real)
            if prob < PROB_UNDERFLOW:
                raise VanishingBranch(
                    f"kept probability underflowed at MEASUREKEEP {gate.qubits[0]}")
            state = projected.normalized()
            kept *= prob
        else:
            state = sv.apply(gate_operator(gate), state)
    return state, kept


# -- builders ------------------------------------------------------------------

def _ancillas(n: int) -> list[str]:
    return [f"a{k}" for k in range(n)]


def _postselection_angle(n: int, epsilon: float, mode: str) -> float:
    if mode == "max_ps":
        return n * epsilon
    if mode == "max_aw":
        return float(np.sqrt(n) * epsilon)
    raise ValueError(f"unknown mode {mode!r}")


def build_ghz_prep(n: int) -> Circuit:
    """|+> on a0 fanned out by CNOTs: (|0>^n + |1>^n)/sqrt(2)."""
    if n < 1:
        raise ValueError("need at least one qubit")
    qubits = _ancillas(n)
    gates = [ry("a0", np.pi / 2)]
    gates += [cnot("a0", q) for q in qubits[1:]]
    return Circuit(tuple(gates), tuple(qubits))


def _postselection_gates(n: int, epsilon: float, mode: str) -> list[Gate]:
    """Uncompute the GHZ cascade, rotate a0, measure everything keeping 0."""
    qubits = _ancillas(n)
    gates = [cnot("a0", q) for q in reversed(qubits[1:])]
    gates.append(rz("a0", -2.0 * _postselection_angle(n, epsilon, mode)))
    gates.append(ry("a0", np.pi / 2))  # R_y^dagger(-pi/2)
    gates += [measure_keep(q, 0) for q in qubits]
    return gates


def build_entangled_postselection(n: int, epsilon: float, mode: str = "max_ps") -> Circuit:
    """Ancilla-only postselection block for the entangled protocols."""
    if n < 1:
        raise ValueError("need at least one ancilla")
    return Circuit(tuple(_postselection_gates(n, epsilon, mode)), tuple(_ancillas(n)))


def build_single_ancilla(phi_angle: float, epsilon: float) -> Circuit:
    """Single-ancilla amplification of the controlled phase phi_angle."""
    return build_full_protocol(1, epsilon, phi_angle, mode="max_ps")


def build_full_protocol(n: int, epsilon: float, phi_angle: float,
                        mode: str = "max_ps") -> Circuit:
    """Meter and GHZ preparation, n controlled couplings, entangled postselection."""
    if n < 1:
        raise ValueError("need at least one ancilla")
    qubits = _ancillas(n)
    gates = [ry(METER, np.pi / 2), ry("a0", np.pi / 2)]
    gates += [cnot("a0", q) for q in qubits[1:]]
    gates += [crz(q, METER, 2.0 * phi_angle) for q in qubits]
    gates.append(rz(METER, -n * phi_angle))  # undo the local phase of the CRZ realization
    gates += _postselection_gates(n, epsilon, mode)
    return Circuit(tuple(gates), tuple(qubits) + (METER,))


def qubit_reuse_schedule(n: int, epsilon: float, phi_angle: float,
                         mode: str = "max_ps") -> Circuit:
    """The n-ancilla protocol on three physical qubits.

    One persistent ancilla a0 carries the GHZ superposition; a single scratch
    line is entangled, coupled, uncomputed and measured once per remaining
    ancilla slot. Valid because each coupling is diagonal on its control line
    and therefore commutes with every CNOT of the cascade that shares only
    that line; equivalence with the n-qubit circuit is verified numerically,
    never assumed.
    """
    if n < 2:
        raise ValueError("the sequential schedule needs n >= 2")
    gates = [ry(METER, np.pi / 2), ry("a0", np.pi / 2)]
    for _ in range(n - 1):
        gates.append(cnot("a0", SCRATCH))
        gates.append(crz(SCRATCH, METER, 2.0 * phi_angle))
        gates.append(cnot("a0", SCRATCH))
        gates.append(measure_keep(SCRATCH, 0))
    gates.append(crz("a0", METER, 2.0 * phi_angle))
    gates.append(rz(METER, -n * phi_angle))
    gates.append(rz("a0", -2.0 * _postselection_angle(n, epsilon, mode)))
    gates.append(ry("a0", np.pi / 2))
    gates.append(measure_keep("a0", 0))
    return Circuit(tuple(gates), ("a0", SCRATCH, METER))


def meter_state(final: sv.Ket, meter_label: str = METER) -> sv.Ket:
    """Strip the measured-out ancillas (all |0> after keep-0) from a run result."""
    others = tuple(q for q in final.register if q != meter_label)
    residual, prob = sv.project(final, sv.basis_ket(others, 0))
    if prob < 1e-12:
        raise VanishingBranch("ancillas are not in the kept |0...0> branch")
    return residual.normalized()


def measured_weak_value(meter: sv.Ket, n: int, g: float) -> complex:
    """Invert the exact meter response for the effective weak value.

    For the sigma_z protocols the postselected meter state is proportional to
    ``[n cos(n g) - 1j A_w sin(n g) sigma_z]|+>``; given the simulated meter
    amplitudes this solves for A_w exactly (no small-g expansion). Requires
    g != 0 mod pi/n.
    """
    s = np.sin(n * g)
    if abs(s) < 1e-15:
        raise ValueError("coupling g = 0: the weak value leaves no trace on the meter")
    c0, c1 = meter.amplitudes
    if abs(c0 + c1) < 1e-15:
        raise ArithmeticError("meter amplitudes sum to zero; weak value diverges")
    return -1j * n * (np.cos(n * g) / s) * (c1 - c0) / (c1 + c0)


# -- serialization --------------------------------------------------------------

def to_text(circuit: Circuit) -> str:
    """Line-oriented text form: REGISTER header then one gate per line.

    ``GATE q[,q2] angle?`` with angles in shortest round-trip decimal form,
    so serialize/parse is bit-exact.
    """
    lines = ["REGISTER " + ",".join(circuit.register)]
    for gate in circuit.gates:
        parts = [gate.name, ",".join(gate.qubits)]
        if gate.name == "MEASUREKEEP":
            parts.append(str(gate.outcome))
        elif gate.angle is not None:
            parts.append(repr(gate.angle))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Circuit:
    register: tuple[str, ...] | None = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if fields[0] == "REGISTER":
            if register is not None:
                raise ValueError(f"line {lineno}: duplicate REGISTER")
            register = tuple(fields[1].split(","))
            continue
        if register is None:
            raise ValueError("REGISTER line must precede gates")
        name = fields[0]
        qubits = tuple(fields[1].split(","))
        if name == "MEASUREKEEP":
            gates.append(Gate(name, qubits, outcome=int(fields[2])))
        elif name in ("RY", "RZ", "CRZ"):
            gates.append(Gate(name, qubits, angle=float(fields[2])))
        elif name == "CNOT":
            gates.append(Gate(name, qubits))
        else:
            raise ValueError(f"line {lineno}: unknown gate {name!r}")
    if register is None:
        raise ValueError("missing REGISTER line")
    return Circuit(tuple(gates), register)
