"""Quantum Fisher information machinery.

The core evaluator works on a parametrized family of (possibly unnormalized)
kets ``g -> |Phi_g>`` and computes

    I(g) = 4 [ <dPhi|dPhi> - |<dPhi|Phi>|^2 / <Phi|Phi> ]

by central differences. For a normalized family the denominator is 1 and this
is the textbook derivative form including its phase-correction term. For an
unnormalized postselected branch ``sqrt(P_s(g)) |phi'(g)>`` it equals
``P_s * I_quantum(conditional state)``: the information carried by the kept
meter state itself, weighted by how often it is obtained. That is the
quantity the closed-form per-outcome expressions approximate, and it sums
over a complete outcome basis to the no-postselection maximum as g -> 0.

Units: every value returned here is per unit of the coupling g. The circuits
express the same physics in the rotation angle phi = 2g, so per-phi values
are smaller by the factor 4; use ``to_phi_units`` and keep the two
conventions apart.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import statevec as sv
from .errors import (IncompleteBasis, RegimeWarning, StepTooLarge,
                     ZeroSecondMoment)
from .tolerances import REGIME_N_PHI, REGIME_PHI_AW
from .weakvalue import AmplificationSetup, meter_branch, weak_value

DEFAULT_STEP = 1e-4
_ZERO_FAMILY_NORM = 1e-120

StateFamily = Callable[[float], sv.Ket]


@dataclass(frozen=True)
class ParamStateFamily:
    """A smooth map g -> Ket on a fixed domain."""

    evaluator: StateFamily
    domain: tuple[float, float] = (-np.inf, np.inf)

    def __call__(self, g: float) -> sv.Ket:
        lo, hi = self.domain
        if not lo <= g <= hi:
            raise ValueError(f"g={g} outside family domain [{lo}, {hi}]")
        return self.evaluator(g)


def _qfi_central(family: StateFamily, g: float, step: float) -> float:
    plus = family(g + step).amplitudes
    minus = family(g - step).amplitudes
    center = family(g).amplitudes
    norm2 = float(np.vdot(center, center).real)
    dphi = (plus - minus) / (2.0 * step)
    if norm2 < _ZERO_FAMILY_NORM ** 2:
        if np.linalg.norm(plus) < _ZERO_FAMILY_NORM and np.linalg.norm(minus) < _ZERO_FAMILY_NORM:
            return 0.0  # identically dark branch carries nothing
        raise ArithmeticError("family norm underflowed at g while derivative is finite")
    term1 = float(np.vdot(dphi, dphi).real)
    overlap = complex(np.vdot(dphi, center))
    return 4.0 * (term1 - abs(overlap) ** 2 / norm2)


def qfi_derivative(family: StateFamily, g: float, step: float = DEFAULT_STEP,
                   check_tol: float | None = 1e-4) -> float:
    """Finite-difference quantum Fisher information of a state family at g.

    This is the package's brute-force oracle. The step-halved value is
    returned; if halving the step moves the result by more than ``check_tol``
    (relative), the step was too coarse for this family and StepTooLarge is
    raised. Pass ``check_tol=None`` to skip the verification at half cost.
    """
    if step <= 0.0:
        raise ValueError("step must be positive")
    if isinstance(family, ParamStateFamily):
        lo, hi = family.domain
        if not (lo <= g - step and g + step <= hi):
            raise ValueError("stencil [g-step, g+step] leaves the family domain")
    fine = _qfi_central(family, g, step / 2.0)
    if check_tol is not None:
        coarse = _qfi_central(family, g, step)
        if abs(fine - coarse) > check_tol * max(abs(fine), 1e-9):
            raise StepTooLarge(
                f"QFI moved from {coarse!r} to {fine!r} under step halving; "
                f"reduce step below {step}"
            )
    return fine


def qfi_generator(state: sv.Ket, H: sv.Operator) -> float:
    """I(g) = 4 Var(H) for the family exp(-1j g H)|state>."""
    return 4.0 * sv.variance(state, H)


def qfi_no_postselection(prep: sv.Ket, meter: sv.Ket,
                         A: sv.Operator, F: sv.Operator) -> float:
    """Total information with no postselection: 4[<A^2><F^2> - (<A><F>)^2]."""
    a2 = sv.inner(prep, sv.apply(A, sv.apply(A, prep))).real
    f2 = sv.inner(meter, sv.apply(F, sv.apply(F, meter))).real
    return 4.0 * (a2 * f2 - (sv.expectation(prep, A) * sv.expectation(meter, F)) ** 2)


def branch_family(setup: AmplificationSetup) -> StateFamily:
    """g -> unnormalized postselected meter branch M(g)|meter>."""
    return lambda g: meter_branch(setup, g)


def qfi_outcome(setup: AmplificationSetup, step: float = DEFAULT_STEP) -> tuple[float, float]:
    """(exact, approx) information in one postselected branch, per unit g.

    exact: finite-difference branch QFI of M(g)|meter> at setup.g.
    approx: the closed-form linear-response estimate
        4 P_s |A_w|^2 [Var(F) - <F^2>(2 g Im(A_w) <F> + |g A_w|^2 <F^2>)]
    with P_s the zeroth-order probability |<post|prep>|^2.
    """
    exact = qfi_derivative(branch_family(setup), setup.g, step=step, check_tol=None)
    p0 = abs(sv.inner(setup.post, setup.prep)) ** 2
    w = weak_value(setup.prep, setup.post, setup.A)
    f_mean = sv.expectation(setup.meter, setup.F)
    f2 = sv.inner(setup.meter, sv.apply(setup.F, sv.apply(setup.F, setup.meter))).real
    var_f = f2 - f_mean ** 2
    g = setup.g
    correction = f2 * (2.0 * g * w.imag * f_mean + (g * abs(w)) ** 2 * f2)
    approx = 4.0 * p0 * abs(w) ** 2 * (var_f - correction)
    return exact, approx


def complete_basis(first: sv.Ket) -> list[sv.Ket]:
    """Orthonormal basis starting from ``first``, completed over computational
    vectors by Gram-Schmidt. Deterministic."""
    dim = first.amplitudes.size
    vecs = [first.normalized().amplitudes]
    for j in range(dim):
        if len(vecs) == dim:
            break
        v = np.zeros(dim, dtype=np.complex128)
        v[j] = 1.0
        for u in vecs:
            v = v - u * np.vdot(u, v)
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            vecs.append(v / norm)
    if len(vecs) != dim:
        raise ArithmeticError("Gram-Schmidt completion failed")
    return [sv.Ket(v, first.register) for v in vecs]


def _check_complete(basis: list[sv.Ket], dim: int):
    if len(basis) != dim:
        raise IncompleteBasis(f"{len(basis)} outcomes cannot span dimension {dim}")
    mat = np.stack([b.amplitudes for b in basis])
    gram = mat.conj() @ mat.T
    if np.abs(gram - np.eye(dim)).max() > 1e-10:
        raise IncompleteBasis("outcome basis is not orthonormal")


def qfi_basis_sum(prep: sv.Ket, meter: sv.Ket, A: sv.Operator, F: sv.Operator,
                  g: float, basis: list[sv.Ket], step: float = DEFAULT_STEP) -> float:
    """Sum of exact per-outcome informations over a complete ancilla basis.

    Approaches 4 <A^2> Var(F) as g -> 0 for an unbiased meter: measuring the
    ancilla loses no information by itself.
    """
    _check_complete(basis, prep.amplitudes.size)
    total = 0.0
    for outcome in basis:
        setup = AmplificationSetup(prep=prep, post=outcome, meter=meter,
                                   A=A, F=F, g=g)
        total += qfi_derivative(branch_family(setup), g, step=step, check_tol=None)
    return total


def efficiency_eta(prep: sv.Ket, A: sv.Operator) -> float:
    """eta = Var(A)/<A^2> on the preparation; the recoverable fraction."""
    mean = sv.expectation(prep, A)
    second = sv.inner(prep, sv.apply(A, sv.apply(A, prep))).real
    if second <= 1e-14:
        raise ZeroSecondMoment("<A^2> vanishes on this preparation")
    return max(second - mean * mean, 0.0) / second


def to_phi_units(value_per_g: float) -> float:
    """Convert a per-g Fisher value to per-phi units (phi = 2g)."""
    return value_per_g / 4.0


@dataclass(frozen=True)
class FisherReport:
    """Bundle of Fisher quantities for one setup, tagged with its units."""

    total: float
    per_outcome: tuple[tuple[str, float], ...]
    eta: float
    cramer_rao: float
    units: str = "per_g"
    analytic: float | None = None


def fisher_report(setup: AmplificationSetup, basis: list[sv.Ket] | None = None,
                  analytic: float | None = None, step: float = DEFAULT_STEP) -> FisherReport:
    """Total, per-outcome and efficiency numbers for one setup (per-g units).

    The outcome basis defaults to the Gram-Schmidt completion of the setup's
    own postselection vector.
    """
    if basis is None:
        basis = complete_basis(setup.post)
    _check_complete(basis, setup.prep.amplitudes.size)
    total = qfi_no_postselection(setup.prep, setup.meter, setup.A, setup.F)
    rows = []
    for idx, outcome in enumerate(basis):
        branch_setup = AmplificationSetup(prep=setup.prep, post=outcome,
                                          meter=setup.meter, A=setup.A,
                                          F=setup.F, g=setup.g)
        value = qfi_derivative(branch_family(branch_setup), setup.g,
                               step=step, check_tol=None)
        rows.append((f"k{idx}", value))
    eta = efficiency_eta(setup.prep, setup.A)
    return FisherReport(total=total, per_outcome=tuple(rows), eta=eta,
                        cramer_rao=total ** -0.5, analytic=analytic)


# -- closed forms for the two qubit examples ----------------------------------

_PREFACTOR = {"sigma_z": lambda n: float(n * n), "projector": lambda n: n * n / 4.0}


def effective_weak_value_magnitude(observable: str, n: int, p_s: float) -> float:
    """|A_w| realized by the fixed-P_s optimal postselection on the GHZ prep."""
    ratio = np.sqrt((1.0 - p_s) / p_s)
    if observable == "sigma_z":
        return n * ratio
    if observable == "projector":
        return 0.5 * n * (1.0 + ratio)
    raise ValueError(f"unknown observable {observable!r}")


def analytic_qubit_fisher(observable: str, case: str, n: int, phi: float,
                          aw_magnitude: float | None = None,
                          p_s: float | None = None) -> float:
    """Closed-form postselected information for the qubit examples, per phi.

    observable: 'sigma_z' (prefactor n^2) or 'projector' (prefactor n^2/4).
    case 'fixed_aw':  prefactor * (1 - |phi A_w / 2|^2)
    case 'fixed_ps':  with aw_magnitude: the same with an extra factor n in
        the correction; with p_s: p |A_w|^2 (1 - |phi A_w / 2|^2) using the
        effective |A_w| of the fixed-P_s postselection.

    Emits RegimeWarning (non-fatal) outside the linear-response region; the
    exact machinery stays valid there, only these closed forms degrade.
    """
    if observable not in _PREFACTOR:
        raise ValueError(f"unknown observable {observable!r}")
    pref = _PREFACTOR[observable](n)
    if case == "fixed_aw":
        if aw_magnitude is None:
            raise ValueError("fixed_aw requires aw_magnitude")
        aw = aw_magnitude
        value = pref * (1.0 - (phi * aw / 2.0) ** 2)
    elif case == "fixed_ps":
        if aw_magnitude is not None:
            aw = aw_magnitude
            value = pref * (1.0 - n * (phi * aw / 2.0) ** 2)
        elif p_s is not None:
            aw = effective_weak_value_magnitude(observable, n, p_s)
            value = p_s * aw ** 2 * (1.0 - (phi * aw / 2.0) ** 2)
        else:
            raise ValueError("fixed_ps requires aw_magnitude or p_s")
    else:
        raise ValueError(f"unknown case {case!r}")
    if n * phi > REGIME_N_PHI or phi * aw > REGIME_PHI_AW:
        warnings.warn(
            f"linear-response conditions violated (n*phi={n * phi:.3g}, "
            f"phi*|A_w|={phi * aw:.3g}); closed form is unreliable here",
            RegimeWarning, stacklevel=2)
    return value
