"""Dense statevector algebra for small multi-qubit registers.

Conventions, fixed once and used everywhere:

* Registers are ordered tuples of string labels. ``register[k]`` is qubit ``k``
  and owns bit ``k`` of the amplitude index (little endian: qubit 0 is the
  least significant bit).
* ``tensor(a, b)`` concatenates registers with ``a`` keeping the low bits.
* States are compared by fidelity ``|<a|b>|**2``; global phase is meaningless.
* Matrix exponentials of hermitian generators go through the spectral
  decomposition, so they are exact up to roundoff at these dimensions.

Everything here is immutable after construction and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import RegisterError
from .tolerances import ATOL_ACCUMULATED, ATOL_ALGEBRA

# Dense amplitude vectors only; 2**20 complex entries is the intended ceiling.
# Module attribute so callers can raise it deliberately.
MAX_QUBITS = 20


def _as_register(register) -> tuple[str, ...]:
    reg = tuple(str(q) for q in register)
    if len(set(reg)) != len(reg):
        raise RegisterError(f"duplicate qubit labels in {reg}")
    if len(reg) > MAX_QUBITS:
        raise RegisterError(f"register of {len(reg)} qubits exceeds cap {MAX_QUBITS}")
    return reg


@dataclass(frozen=True)
class Ket:
    """Pure state over a labelled register.

    ``amplitudes[i]`` is the amplitude of the computational basis state whose
    bit ``k`` (of index ``i``) gives the value of qubit ``register[k]``.
    """

    amplitudes: np.ndarray
    register: tuple[str, ...]

    def __post_init__(self):
        reg = _as_register(self.register)
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1).copy()
        if amps.size != 2 ** len(reg):
            raise RegisterError(
                f"{amps.size} amplitudes do not match register of {len(reg)} qubits"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "register", reg)

    @property
    def num_qubits(self) -> int:
        return len(self.register)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, atol: float = ATOL_ALGEBRA) -> bool:
        return abs(self.norm() - 1.0) <= atol

    def normalized(self) -> "Ket":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return Ket(self.amplitudes / n, self.register)


@dataclass(frozen=True)
class Operator:
    """Square matrix acting on a labelled register subset."""

    matrix: np.ndarray
    register: tuple[str, ...]
    hermitian: bool = False

    def __post_init__(self):
        reg = _as_register(self.register)
        mat = np.asarray(self.matrix, dtype=np.complex128).copy()
        dim = 2 ** len(reg)
        if mat.shape != (dim, dim):
            raise RegisterError(f"matrix shape {mat.shape} does not match register {reg}")
        if self.hermitian and np.abs(mat - mat.conj().T).max() > ATOL_ALGEBRA:
            raise ValueError("operator flagged hermitian is not self-adjoint")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "register", reg)

    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.register, hermitian=self.hermitian)

    def _check_same_register(self, other: "Operator"):
        if self.register != other.register:
            raise RegisterError(f"operator registers differ: {self.register} vs {other.register}")

    def __add__(self, other: "Operator") -> "Operator":
        self._check_same_register(other)
        return Operator(self.matrix + other.matrix, self.register,
                        hermitian=self.hermitian and other.hermitian)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check_same_register(other)
        return Operator(self.matrix - other.matrix, self.register,
                        hermitian=self.hermitian and other.hermitian)

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check_same_register(other)
        return Operator(self.matrix @ other.matrix, self.register)

    def scaled(self, c: complex) -> "Operator":
        herm = self.hermitian and abs(complex(c).imag) == 0.0
        return Operator(self.matrix * c, self.register, hermitian=herm)

    def shifted(self, c: complex) -> "Operator":
        """This operator plus ``c`` times the identity."""
        herm = self.hermitian and abs(complex(c).imag) == 0.0
        return Operator(self.matrix + c * np.eye(self.matrix.shape[0]), self.register,
                        hermitian=herm)


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a hermitian operator, eigenvalues ascending."""

    eigenvalues: tuple[float, ...]
    eigenkets: tuple[Ket, ...] = field(repr=False)

    @property
    def lambda_min(self) -> float:
        return self.eigenvalues[0]

    @property
    def lambda_max(self) -> float:
        return self.eigenvalues[-1]


# -- constructors -------------------------------------------------------------

def basis_ket(register, index: int) -> Ket:
    """Computational basis state; bit ``k`` of ``index`` sets qubit ``register[k]``."""
    reg = _as_register(register)
    dim = 2 ** len(reg)
    if not 0 <= index < dim:
        raise IndexError(f"basis index {index} out of range for {len(reg)} qubits")
    amps = np.zeros(dim, dtype=np.complex128)
    amps[index] = 1.0
    return Ket(amps, reg)


def ket_from_amplitudes(amplitudes, register, normalize: bool = False) -> Ket:
    k = Ket(np.asarray(amplitudes), register)
    return k.normalized() if normalize else k


def zero_ket(label: str = "q0") -> Ket:
    return basis_ket((label,), 0)


def one_ket(label: str = "q0") -> Ket:
    return basis_ket((label,), 1)


def plus_ket(label: str = "q0") -> Ket:
    return Ket(np.array([1.0, 1.0]) / np.sqrt(2.0), (label,))


def minus_ket(label: str = "q0") -> Ket:
    return Ket(np.array([1.0, -1.0]) / np.sqrt(2.0), (label,))


def ghz_ket(register) -> Ket:
    """(|0...0> + |1...1>)/sqrt(2) on the given register."""
    reg = _as_register(register)
    amps = np.zeros(2 ** len(reg), dtype=np.complex128)
    amps[0] = amps[-1] = 1.0 / np.sqrt(2.0)
    return Ket(amps, reg)


_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)


def sigma_x(label: str) -> Operator:
    return Operator(_SX, (label,), hermitian=True)


def sigma_y(label: str) -> Operator:
    return Operator(_SY, (label,), hermitian=True)


def sigma_z(label: str) -> Operator:
    return Operator(_SZ, (label,), hermitian=True)


def projector_one(label: str) -> Operator:
    """|1><1| on a single qubit."""
    return Operator(np.diag([0.0, 1.0]).astype(np.complex128), (label,), hermitian=True)


def identity(register) -> Operator:
    reg = _as_register(register)
    return Operator(np.eye(2 ** len(reg), dtype=np.complex128), reg, hermitian=True)


# -- composition --------------------------------------------------------------

def tensor(a: Ket, b: Ket) -> Ket:
    """Kronecker product; ``a`` keeps the low bits of the combined index."""
    if set(a.register) & set(b.register):
        raise RegisterError("tensor factors share qubit labels")
    # index = i_a + dim_a * i_b  ->  np.kron with b major
    return Ket(np.kron(b.amplitudes, a.amplitudes), a.register + b.register)


def op_tensor(a: Operator, b: Operator) -> Operator:
    """Operator Kronecker product consistent with ``tensor`` (``a`` on low bits)."""
    if set(a.register) & set(b.register):
        raise RegisterError("tensor factors share qubit labels")
    return Operator(np.kron(b.matrix, a.matrix), a.register + b.register,
                    hermitian=a.hermitian and b.hermitian)


def embed(op: Operator, register) -> Operator:
    """Extend ``op`` with identities onto a larger register."""
    reg = _as_register(register)
    missing = [q for q in op.register if q not in reg]
    if missing:
        raise RegisterError(f"target register lacks qubits {missing}")
    cols = np.eye(2 ** len(reg), dtype=np.complex128)
    mat = np.stack(
        [apply(op, Ket(cols[:, j], reg)).amplitudes for j in range(cols.shape[1])],
        axis=1,
    )
    return Operator(mat, reg, hermitian=op.hermitian)


def _subsystem_view(state_amps: np.ndarray, state_register, sub_register):
    """Reshape amplitudes to (rest, sub) with the sub index in sub-register bit order.

    Returns (matrix, rest_register, undo) where ``undo`` maps a same-shape
    matrix back to a flat amplitude vector over the original register.
    """
    q = len(state_register)
    positions = [state_register.index(l) for l in sub_register]
    # tensor axis of bit p is q-1-p under C-order reshape
    sub_axes = [q - 1 - p for p in positions]
    rest_axes = [ax for ax in range(q) if ax not in sub_axes]
    # trailing axes ordered (bit_{k-1}, ..., bit_0) so the flattened sub index
    # equals the little-endian index over sub_register
    perm = rest_axes + sub_axes[::-1]
    k = len(sub_register)
    tensorized = state_amps.reshape((2,) * q).transpose(perm)
    mat = tensorized.reshape(2 ** (q - k), 2 ** k)
    rest_register = tuple(l for l in state_register if l not in sub_register)

    inv = np.argsort(perm)

    def undo(m: np.ndarray) -> np.ndarray:
        return m.reshape((2,) * q).transpose(inv).reshape(-1)

    return mat, rest_register, undo


def apply(op: Operator, state: Ket) -> Ket:
    """Act with ``op`` on its sub-register of ``state``, identity elsewhere."""
    if not set(op.register) <= set(state.register):
        raise RegisterError(
            f"operator register {op.register} not contained in state register {state.register}"
        )
    mat, _, undo = _subsystem_view(state.amplitudes, state.register, op.register)
    return Ket(undo(mat @ op.matrix.T), state.register)


def inner(a: Ket, b: Ket) -> complex:
    """<a|b>; conjugate-linear in ``a``."""
    if a.register != b.register:
        raise RegisterError(f"registers differ: {a.register} vs {b.register}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: Ket, b: Ket) -> float:
    """|<a|b>|**2 between normalized states (global-phase blind)."""
    return abs(inner(a.normalized(), b.normalized())) ** 2


def expectation(state: Ket, op: Operator, atol: float = ATOL_ACCUMULATED) -> float:
    """<state|op|state> for a normalized state and hermitian op."""
    if not op.hermitian:
        raise ValueError("expectation requires a hermitian operator")
    if not state.is_normalized(1e-9):
        raise ValueError("state must be normalized; use expectation_ratio otherwise")
    val = inner(state, apply(op, state))
    if abs(val.imag) > atol:
        raise ArithmeticError(f"imaginary residue {val.imag:.3e} exceeds {atol}")
    return val.real


def expectation_ratio(state: Ket, op: Operator) -> float:
    """<psi|op|psi>/<psi|psi> for an unnormalized (nonzero) state."""
    if not op.hermitian:
        raise ValueError("expectation requires a hermitian operator")
    den = float(np.vdot(state.amplitudes, state.amplitudes).real)
    if den == 0.0:
        raise ValueError("zero vector has no expectation value")
    return inner(state, apply(op, state)).real / den


def variance(state: Ket, op: Operator) -> float:
    """Var(op) = <op^2> - <op>^2; clipped at zero against roundoff."""
    mean = expectation(state, op)
    second = inner(state, apply(op, apply(op, state))).real
    return max(second - mean * mean, 0.0)


def project(state: Ket, outcome: Ket) -> tuple[Ket, float]:
    """Project a subsystem onto ``outcome``.

    Returns the unnormalized residual ``(<outcome| (x) 1)|state>`` on the
    remaining register and its squared norm (the outcome probability).
    """
    if not set(outcome.register) <= set(state.register):
        raise RegisterError("outcome register not contained in state register")
    if not outcome.is_normalized(1e-9):
        raise ValueError("projection outcome must be normalized")
    if len(outcome.register) == len(state.register):
        amp = inner(outcome, state)
        residual = Ket(np.array([amp]), ())
        return residual, abs(amp) ** 2
    mat, rest_register, _ = _subsystem_view(state.amplitudes, state.register, outcome.register)
    residual_amps = mat @ outcome.amplitudes.conj()
    residual = Ket(residual_amps, rest_register)
    return residual, float(np.vdot(residual_amps, residual_amps).real)


# -- spectral tools -----------------------------------------------------------

def spectrum(op: Operator) -> Spectrum:
    """Eigendecomposition of a hermitian operator (ascending eigenvalues)."""
    if not op.hermitian:
        raise ValueError("spectrum requires a hermitian operator")
    vals, vecs = np.linalg.eigh(op.matrix)
    kets = tuple(Ket(vecs[:, j], op.register) for j in range(vals.size))
    return Spectrum(tuple(float(v) for v in vals), kets)


def exp_hermitian(generator: Operator, scale: float) -> Operator:
    """exp(-1j * scale * generator) via spectral decomposition (exact)."""
    if not generator.hermitian:
        raise ValueError("generator must be hermitian")
    vals, vecs = np.linalg.eigh(generator.matrix)
    mat = (vecs * np.exp(-1j * scale * vals)) @ vecs.conj().T
    return Operator(mat, generator.register)
