"""Canonical amplification setups used by the scans and circuit checks.

All use a |+> meter qubit with F = R = sigma_z (unbiased, alpha = 1, beta = 0,
sigma^2 = 1) and the symmetric coupling exp(-1j g A (x) sigma_z) with
g = phi/2.

The postselection kets are written so that the weak value comes out as the
direct ratio <post|A|prep>/<post|prep>:

* single ancilla:      (e^{+i eps}|0> - e^{-i eps}|1>)/sqrt(2)   ->  A_w = i cot(eps)
* n ancillas, fixed A_w: phase n*eps                             ->  A_w = i n cot(n eps)
* n ancillas, fixed P_s: phase sqrt(n)*eps                       ->  A_w = i n cot(sqrt(n) eps)

These are exactly the states the postselection circuits project onto once the
controlled-rotation coupling is reduced to the symmetric convention (see
``circuits``), and the fixed-A_w member coincides with the closed-form optimal
postselection for A_w = i n cot(n eps).
"""

from __future__ import annotations

import numpy as np

from . import statevec as sv
from .protocol import JointObservable, ancilla_labels, max_variance_prep, optimal_post_fixed_Aw
from .weakvalue import AmplificationSetup

METER_LABEL = "m"


def meter_plus() -> sv.Ket:
    return sv.plus_ket(METER_LABEL)


def single_observable(name: str) -> sv.Operator:
    """Single-ancilla observable by name: 'sigma_z' or 'projector' (|1><1|)."""
    if name == "sigma_z":
        return sv.sigma_z("a0")
    if name == "projector":
        return sv.projector_one("a0")
    raise ValueError(f"unknown observable {name!r}; expected 'sigma_z' or 'projector'")


def _phase_post(n: int, phase: float) -> sv.Ket:
    """(e^{+i phase}|0..0> - e^{-i phase}|1..1>)/sqrt(2) on n ancillas."""
    amps = np.zeros(2 ** n, dtype=np.complex128)
    amps[0] = np.exp(1j * phase) / np.sqrt(2.0)
    amps[-1] = -np.exp(-1j * phase) / np.sqrt(2.0)
    return sv.Ket(amps, ancilla_labels(n))


def single_ancilla(phi_angle: float, epsilon: float) -> AmplificationSetup:
    """One-ancilla baseline: A_w = i cot(eps), P_s(phi=0) = sin^2(eps)."""
    return entangled(1, epsilon, phi_angle, mode="max_ps")


def entangled(n: int, epsilon: float, phi_angle: float,
              mode: str = "max_ps") -> AmplificationSetup:
    """GHZ-prepared n-ancilla setup with the phase-offset postselection.

    mode 'max_ps' holds A_w ~ i/eps while P_s ~ n^2 eps^2;
    mode 'max_aw' holds P_s ~ n eps^2 while A_w ~ i sqrt(n)/eps.
    """
    if n < 1:
        raise ValueError("need at least one ancilla")
    phase = postselection_phase(n, epsilon, mode)
    obs = JointObservable(sv.sigma_z("a0"), n)
    return AmplificationSetup(
        prep=max_variance_prep(obs),
        post=_phase_post(n, phase),
        meter=meter_plus(),
        A=obs.total,
        F=sv.sigma_z(METER_LABEL),
        g=0.5 * phi_angle,
    )


def postselection_phase(n: int, epsilon: float, mode: str) -> float:
    if mode == "max_ps":
        return n * epsilon
    if mode == "max_aw":
        return np.sqrt(n) * epsilon
    raise ValueError(f"unknown mode {mode!r}; expected 'max_ps' or 'max_aw'")


def expected_weak_value(n: int, epsilon: float, mode: str = "max_ps") -> complex:
    """Exact weak value of the ``entangled`` setup: i n cot(phase)."""
    return 1j * n / np.tan(postselection_phase(n, epsilon, mode))


def optimal_setup(n: int, observable: str, A_w: complex,
                  phi_angle: float, theta: float = 0.0) -> AmplificationSetup:
    """GHZ-type preparation with the exact P_s-maximizing postselection at A_w."""
    obs = JointObservable(single_observable(observable), n)
    prep = max_variance_prep(obs, theta)
    post = optimal_post_fixed_Aw(prep, obs.total, A_w)
    return AmplificationSetup(
        prep=prep,
        post=post,
        meter=meter_plus(),
        A=obs.total,
        F=sv.sigma_z(METER_LABEL),
        g=0.5 * phi_angle,
    )
