"""Weak values, postselection probabilities, and meter responses.

The impulsive coupling is realized as the single unitary
``U(g) = exp(-1j * g * A (x) F)`` acting on ancilla (x) meter; no time
integration appears anywhere. Postselecting the ancilla onto ``post`` turns
``U(g)`` into the meter-space Kraus operator ``M = <post| U(g) |prep>``, and
every exact quantity here is a function of ``M |meter>``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import statevec as sv
from .errors import OrthogonalPostselection, VanishingBranch
from .tolerances import ATOL_ACCUMULATED, ORTHOGONAL_OVERLAP, PROB_UNDERFLOW


@dataclass(frozen=True)
class AmplificationSetup:
    """Preparation, postselection, observables and coupling, bundled.

    ``g`` is the dimensionless coupling of ``exp(-1j g A (x) F)``; for the
    qubit circuits it equals half the controlled-rotation angle (g = phi/2).
    ``R`` defaults to ``F`` when not supplied.
    """

    prep: sv.Ket
    post: sv.Ket
    meter: sv.Ket
    A: sv.Operator
    F: sv.Operator
    g: float
    R: sv.Operator = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.R is None:
            object.__setattr__(self, "R", self.F)
        if self.prep.register != self.post.register:
            raise sv.RegisterError("prep and post must share the ancilla register")
        if set(self.prep.register) & set(self.meter.register):
            raise sv.RegisterError("ancilla and meter registers must be disjoint")
        for name, state in (("prep", self.prep), ("post", self.post), ("meter", self.meter)):
            if not state.is_normalized(1e-9):
                raise ValueError(f"{name} state is not normalized")
        for name, op in (("A", self.A), ("F", self.F), ("R", self.R)):
            if not op.hermitian:
                raise ValueError(f"observable {name} must be hermitian")
        if self.A.register != self.prep.register:
            raise sv.RegisterError("A must act on the ancilla register")
        if self.F.register != self.meter.register or self.R.register != self.meter.register:
            raise sv.RegisterError("F and R must act on the meter register")

    @property
    def phi_angle(self) -> float:
        return 2.0 * self.g

    def with_coupling(self, g: float) -> "AmplificationSetup":
        return replace(self, g=g)

    def interaction(self, g: float | None = None) -> sv.Operator:
        """The joint unitary exp(-1j g A (x) F) on ancilla (x) meter."""
        gg = self.g if g is None else g
        return sv.exp_hermitian(sv.op_tensor(self.A, self.F), gg)

    def joint_input(self) -> sv.Ket:
        return sv.tensor(self.prep, self.meter)


@dataclass(frozen=True)
class MeterMoments:
    """Fixed meter correlation constants entering the response expansion."""

    alpha: complex  # <R F>
    beta: float     # <F R F>
    sigma2: float   # <F^2>


def weak_value(prep: sv.Ket, post: sv.Ket, A: sv.Operator) -> complex:
    """<post|A|prep> / <post|prep>.

    Raises OrthogonalPostselection when the overlap is below the underflow
    floor: an anomalously large weak value is physics, a division by zero is
    not.
    """
    overlap = sv.inner(post, prep)
    if abs(overlap) < ORTHOGONAL_OVERLAP:
        raise OrthogonalPostselection(
            f"|<post|prep>| = {abs(overlap):.3e} is below {ORTHOGONAL_OVERLAP}"
        )
    return sv.inner(post, sv.apply(A, prep)) / overlap


def postselected_meter(setup: AmplificationSetup) -> tuple[sv.Ket, float]:
    """Normalized postselected meter state and its success probability.

    The unnormalized branch is ``M |meter>`` with
    ``M = <post| exp(-1j g A (x) F) |prep>``.
    """
    branch = meter_branch(setup)
    prob = float(np.vdot(branch.amplitudes, branch.amplitudes).real)
    if prob < PROB_UNDERFLOW:
        raise VanishingBranch(f"kept probability {prob:.3e} underflowed")
    return branch.normalized(), prob


def meter_branch(setup: AmplificationSetup, g: float | None = None) -> sv.Ket:
    """Unnormalized meter branch M(g)|meter| (squared norm = kept probability)."""
    evolved = sv.apply(setup.interaction(g), setup.joint_input())
    residual, _ = sv.project(evolved, setup.post)
    return residual


def postselection_probability(setup: AmplificationSetup) -> tuple[float, float]:
    """(exact, zeroth_order) postselection probabilities.

    ``exact`` is the squared norm of the postselected branch at coupling g;
    ``zeroth_order`` is |<post|prep>|^2, the g -> 0 limit. Both are returned
    so scaling tests can quantify the approximation error instead of hiding
    it.
    """
    branch = meter_branch(setup)
    exact = float(np.vdot(branch.amplitudes, branch.amplitudes).real)
    zeroth = abs(sv.inner(setup.post, setup.prep)) ** 2
    return exact, zeroth


def repeated_attempt_probability(p_s: float, n: int) -> float:
    """Probability of at least one success in n independent attempts."""
    if not 0.0 <= p_s <= 1.0:
        raise ValueError("p_s must be a probability")
    if n < 0:
        raise ValueError("n must be nonnegative")
    if p_s == 1.0:
        return 1.0 if n > 0 else 0.0
    return -float(np.expm1(n * np.log1p(-p_s)))


def meter_moments(meter: sv.Ket, F: sv.Operator, R: sv.Operator) -> MeterMoments:
    """alpha = <R F>, beta = <F R F>, sigma2 = <F^2> on the meter state."""
    if not meter.is_normalized(1e-9):
        raise ValueError("meter state must be normalized")
    f_meter = sv.apply(F, meter)
    alpha = sv.inner(meter, sv.apply(R, f_meter))
    beta = sv.inner(f_meter, sv.apply(R, f_meter))
    sigma2 = float(np.vdot(f_meter.amplitudes, f_meter.amplitudes).real)
    if abs(beta.imag) > ATOL_ACCUMULATED:
        raise ArithmeticError(f"<F R F> has imaginary residue {beta.imag:.3e}")
    return MeterMoments(alpha=complex(alpha), beta=float(beta.real), sigma2=sigma2)


def response_second_order(g: float, A_w: complex, moments: MeterMoments) -> float:
    """Second-order readout expansion, valid for an unbiased meter.

    [2 g Im(alpha A_w) + g^2 beta |A_w|^2] / [1 + g^2 sigma^2 |A_w|^2]
    """
    aw2 = abs(A_w) ** 2
    num = 2.0 * g * (moments.alpha * A_w).imag + g * g * moments.beta * aw2
    den = 1.0 + g * g * moments.sigma2 * aw2
    return num / den


def response_linear(g: float, A_w: complex, alpha: complex) -> float:
    """Leading linear response: 2 g [Re(A_w) Im(alpha) + Im(A_w) Re(alpha)]."""
    return 2.0 * g * (A_w.real * complex(alpha).imag + A_w.imag * complex(alpha).real)


def response_exact(setup: AmplificationSetup) -> float:
    """<R> on the exact postselected meter state."""
    phi_prime, _ = postselected_meter(setup)
    return sv.expectation(phi_prime, setup.R)
