"""Optimal entangled preparations and postselections.

For a joint observable A = a_1 + ... + a_n the extreme eigenvalues are
n*lambda_min and n*lambda_max with product eigenkets, so the variance-maximal
preparation is the GHZ-type superposition of the two extreme product states.
Holding either the weak value or the postselection probability fixed then
picks out a closed-form optimal postselection in the two-dimensional span of
those product states.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import statevec as sv
from .errors import DegenerateObservable, DegeneratePrep
from .weakvalue import weak_value

_DEGENERATE_VARIANCE = 1e-14


def ancilla_labels(n: int) -> tuple[str, ...]:
    return tuple(f"a{k}" for k in range(n))


@dataclass(frozen=True)
class JointObservable:
    """n identical copies of a single-site observable, summed.

    The site observable may act on any number of qubits (site dimension
    d = 2, 4, 8, ...); copies are relabelled, site ``j`` occupying ``a{j}``
    for qubit sites and ``a{j}.0, a{j}.1, ...`` for larger ones. Only the two
    extreme site eigenvalues enter the optimal protocol; any interior
    spectrum is ignored by construction.
    """

    single: sv.Operator
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one ancilla")
        if not self.single.hermitian:
            raise ValueError("single-site observable must be hermitian")

    @cached_property
    def labels(self) -> tuple[str, ...]:
        width = len(self.single.register)
        if width == 1:
            return ancilla_labels(self.n)
        return tuple(f"a{j}.{i}" for j in range(self.n) for i in range(width))

    def site_labels(self, j: int) -> tuple[str, ...]:
        width = len(self.single.register)
        return self.labels[j * width:(j + 1) * width]

    @cached_property
    def single_spectrum(self) -> sv.Spectrum:
        return sv.spectrum(self.single)

    @property
    def lambda_min(self) -> float:
        return self.single_spectrum.lambda_min

    @property
    def lambda_max(self) -> float:
        return self.single_spectrum.lambda_max

    @cached_property
    def total(self) -> sv.Operator:
        """A = sum_k a_k on the full ancilla register."""
        out = None
        for j in range(self.n):
            site = sv.Operator(self.single.matrix, self.site_labels(j), hermitian=True)
            term = sv.embed(site, self.labels)
            out = term if out is None else out + term
        return out

    def extreme_product_ket(self, which: str) -> sv.Ket:
        """|lambda_min/max>^(x)n as a Ket on the ancilla register."""
        idx = 0 if which == "min" else -1
        site = self.single_spectrum.eigenkets[idx]
        out = None
        for j in range(self.n):
            factor = sv.Ket(site.amplitudes, self.site_labels(j))
            out = factor if out is None else sv.tensor(out, factor)
        return out


def max_variance_prep(obs: JointObservable, theta: float = 0.0) -> sv.Ket:
    """(|lambda_max>^n + e^{i theta} |lambda_min>^n)/sqrt(2).

    Its variance under the joint observable is (n^2/4)(lambda_max-lambda_min)^2,
    the maximum over all n-site states.
    """
    spread = obs.lambda_max - obs.lambda_min
    if spread <= _DEGENERATE_VARIANCE:
        raise DegenerateObservable("lambda_max equals lambda_min; no amplification possible")
    hi = obs.extreme_product_ket("max").amplitudes
    lo = obs.extreme_product_ket("min").amplitudes
    amps = (hi + np.exp(1j * theta) * lo) / np.sqrt(2.0)
    return sv.Ket(amps, obs.labels)


def max_variance_value(obs: JointObservable) -> float:
    return 0.25 * obs.n ** 2 * (obs.lambda_max - obs.lambda_min) ** 2


def optimal_post_fixed_Aw(prep: sv.Ket, A: sv.Operator, A_w: complex) -> sv.Ket:
    """Postselection maximizing P_s at fixed weak value A_w.

    The weak value constraint confines |post> to the subspace orthogonal to
    (A - A_w)|prep>; the best choice is the component of |prep> itself in that
    subspace:

        |post>  ~  |prep> - (A - A_w)|prep> <prep|(A - A_w*)|prep> / <(A-A_w*)(A-A_w)>
    """
    if sv.variance(prep, A) < _DEGENERATE_VARIANCE:
        raise DegeneratePrep("preparation is an eigenstate of A; weak value is fixed at <A>")
    shifted = sv.apply(A.shifted(-A_w), prep)   # (A - A_w)|prep>
    denom = float(np.vdot(shifted.amplitudes, shifted.amplitudes).real)
    coeff = sv.inner(shifted, prep)             # <prep|(A - A_w*)|prep>
    amps = prep.amplitudes - shifted.amplitudes * (coeff / denom)
    out = sv.Ket(amps, prep.register)
    if out.norm() < 1e-12:
        raise DegeneratePrep("projection of the preparation onto the constraint subspace vanishes")
    return out.normalized()


def optimal_post_fixed_Ps(prep: sv.Ket, A: sv.Operator, p_s: float,
                          theta: float = 0.0) -> sv.Ket:
    """Postselection maximizing |A_w| at fixed postselection probability.

    Returns sqrt(P_s)|prep> + sqrt(1-P_s) e^{i theta} |perp> where |perp> is
    the normalized component of A|prep> orthogonal to |prep>. The phase of
    |perp> is fixed so <perp|A|prep> is real positive; theta is applied on
    top. The realized weak value is <A> + sqrt((1-P_s)/P_s) e^{-i theta} sqrt(Var A).
    """
    if not 0.0 < p_s < 1.0:
        raise ValueError("p_s must lie strictly between 0 and 1")
    var = sv.variance(prep, A)
    if var < _DEGENERATE_VARIANCE:
        raise DegeneratePrep("preparation is an eigenstate of A")
    mean = sv.expectation(prep, A)
    perp_amps = sv.apply(A, prep).amplitudes - mean * prep.amplitudes
    perp = sv.Ket(perp_amps, prep.register).normalized()
    amps = np.sqrt(p_s) * prep.amplitudes + np.sqrt(1.0 - p_s) * np.exp(1j * theta) * perp.amplitudes
    return sv.Ket(amps, prep.register)


def fixed_Ps_weak_value(prep: sv.Ket, A: sv.Operator, p_s: float,
                        theta: float = 0.0) -> complex:
    """Closed-form weak value realized by ``optimal_post_fixed_Ps``."""
    var = sv.variance(prep, A)
    mean = sv.expectation(prep, A)
    return mean + np.sqrt((1.0 - p_s) / p_s) * np.exp(-1j * theta) * np.sqrt(var)


def max_Ps_formula(prep: sv.Ket, A: sv.Operator, A_w: complex) -> tuple[float, float]:
    """(exact, approx) maximum postselection probability at fixed A_w.

    exact  = Var(A) / (<A^2> - 2 <A> Re A_w + |A_w|^2)
    approx = Var(A) / |A_w|^2   (valid once |A_w| dominates the spectral range)
    """
    mean = sv.expectation(prep, A)
    second = sv.inner(prep, sv.apply(A, sv.apply(A, prep))).real
    var = max(second - mean * mean, 0.0)
    if var < _DEGENERATE_VARIANCE:
        # eigenstate preparation: no orthogonal component to postselect onto
        return 0.0, 0.0
    exact = var / (second - 2.0 * mean * A_w.real + abs(A_w) ** 2)
    approx = var / abs(A_w) ** 2
    return exact, approx


@dataclass(frozen=True)
class Optimum:
    """A matched (prep, post) pair with its realized figures of merit."""

    prep: sv.Ket
    post: sv.Ket
    A_w: complex
    P_s_exact: float
    P_s_approx: float
    theta: float


def build_optimum(obs: JointObservable, A_w: complex, theta: float = 0.0) -> Optimum:
    """Max-variance preparation plus its P_s-maximizing postselection at A_w."""
    prep = max_variance_prep(obs, theta)
    total = obs.total
    post = optimal_post_fixed_Aw(prep, total, A_w)
    exact, approx = max_Ps_formula(prep, total, A_w)
    realized = weak_value(prep, post, total)
    return Optimum(prep=prep, post=post, A_w=realized,
                   P_s_exact=exact, P_s_approx=approx, theta=theta)


@dataclass(frozen=True)
class ScalingRow:
    n: int
    p_s_entangled: float
    p_s_reference: float  # n * P_s(single attempt)
    ratio: float


def quadratic_vs_linear_scaling(obs: JointObservable, A_w: complex,
                                n_range) -> list[ScalingRow]:
    """Entangled max P_s against n uncorrelated single-ancilla attempts.

    Both columns use the exact closed-form maxima, so the ratio tends to n
    whenever |A_w| dominates n times the single-site spectral range.
    """
    single_obs = JointObservable(obs.single, 1)
    prep1 = max_variance_prep(single_obs)
    p_single, _ = max_Ps_formula(prep1, single_obs.total, A_w)
    rows = []
    for n in n_range:
        obs_n = JointObservable(obs.single, int(n))
        prep_n = max_variance_prep(obs_n)
        p_ent, _ = max_Ps_formula(prep_n, obs_n.total, A_w)
        reference = n * p_single
        rows.append(ScalingRow(n=int(n), p_s_entangled=p_ent,
                               p_s_reference=reference, ratio=p_ent / reference))
    return rows


def eq12_post(obs: JointObservable, A_w: complex, theta: float = 0.0) -> sv.Ket:
    """Closed-form optimal postselection in the extreme-product-state span.

    -(n lambda_min - A_w*)|lambda_max>^n + e^{i theta}(n lambda_max - A_w*)|lambda_min>^n,
    normalized. Equals ``optimal_post_fixed_Aw`` on the max-variance prep.
    """
    n = obs.n
    hi = obs.extreme_product_ket("max").amplitudes
    lo = obs.extreme_product_ket("min").amplitudes
    aw_conj = complex(A_w).conjugate()
    amps = -(n * obs.lambda_min - aw_conj) * hi \
        + np.exp(1j * theta) * (n * obs.lambda_max - aw_conj) * lo
    return sv.Ket(amps, obs.labels).normalized()
