"""Momentum-shift expectation value and many-body polarization (dense path).

For a Gaussian state with covariance V and mean alpha0, the expectation of
the momentum-shift unitary is evaluated in closed form:

    <T> = 2^{nL} [det(V + 1) det(1 - W)]^{-1/2} exp(-1/2 alpha0^T M^{-1} alpha0)

with W = (V - 1)(V + 1)^{-1} U and M = V - 1 + 2 (1 - U)^{-1}, where U is
diagonal with a complex 2x2 block exp(i theta_{r,s}) * 1_2 per mode. The
sign ambiguity of the square root is resolved by tracking the phase of
det(1 - W) continuously along the homotopy theta -> lam * theta from the
identity operator (<T> = 1 at lam = 0); the path never crosses zero because
||W(lam)|| < 1 for every positive-definite V.

The polarization is P = Im log <T> / (2 pi) on that branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HomotopyError, InvalidStateError, NumericalError
from .states import GaussianState, LatticeSpec

MEAN_SOLVE_RTOL = 1e-8
BRANCH_TOLERANCE = math.pi / 2
MAX_BRANCH_EVALS = 4096


@dataclass(frozen=True)
class ShiftSpec:
    """Per-mode phases theta_{r,s} of the momentum-shift operator."""

    lattice: LatticeSpec
    phases: np.ndarray

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float).reshape(-1)
        if phases.shape != (self.lattice.modes,):
            raise ValueError(
                f"need {self.lattice.modes} phases, got {phases.shape}"
            )
        residue = np.abs(np.exp(1j * phases) - 1.0)
        if np.any(residue < 1e-12):
            raise ValueError("shift phase congruent to 0 mod 2pi: gauge origin on a site")
        phases = phases.copy()
        phases.flags.writeable = False
        object.__setattr__(self, "phases", phases)


def shift_phases(lattice: LatticeSpec) -> ShiftSpec:
    """Phases theta_{r,s} = 2 pi x_{r,s} / L, all strictly inside (0, 2 pi)."""
    theta = 2.0 * np.pi * lattice.site_positions() / lattice.cells
    return ShiftSpec(lattice, theta)


@dataclass(frozen=True)
class PolarizationBreakdown:
    """Decomposition of <T> into magnitude, determinant phase and mean term.

    ``det_term_phase`` is -1/2 Im ln det(1 - W) on the homotopy branch,
    ``mean_term`` is s = -1/2 alpha0^T M^{-1} alpha0, and
    ``p_unwrapped = (det_term_phase + Im s) / (2 pi)``; ``p`` is the same
    value reduced to (-1/2, 1/2].
    """

    abs_T: float
    log_abs_T: float
    det_term_phase: float
    mean_term: complex
    p_unwrapped: float
    p: float
    w_matrix: np.ndarray
    m_matrix: np.ndarray

    @property
    def expectation(self) -> complex:
        return self.abs_T * np.exp(1j * (self.det_term_phase + self.mean_term.imag))


def principal_polarization(p_unwrapped: float) -> float:
    """Reduce a polarization value to the fundamental window (-1/2, 1/2]."""
    r = (p_unwrapped + 0.5) % 1.0 - 0.5
    if r == -0.5:
        r = 0.5
    return r


def _wrap_angle(d: float) -> float:
    """Reduce an angle difference to [-pi, pi)."""
    return (d + math.pi) % (2.0 * math.pi) - math.pi


def cayley_spectrum(state: GaussianState):
    """Eigen-decompose V and return (eigenvalues, G) with G = (V-1)(V+1)^{-1}.

    Raises :class:`InvalidStateError` when V is not positive definite; the
    Cayley transform of a positive-definite V always has spectral norm < 1,
    which is asserted before any determinant evaluation downstream.
    """
    vals, Q = np.linalg.eigh(state.V)
    if vals[0] <= 0.0:
        raise InvalidStateError(
            f"invalid state: min covariance eigenvalue {vals[0]:.6g} <= 0"
        )
    cayley = (vals - 1.0) / (vals + 1.0)
    if np.abs(cayley).max() >= 1.0:
        raise InvalidStateError("Cayley transform reached unit norm; state invalid")
    G = (Q * cayley) @ Q.T
    return vals, (G + G.T) / 2.0


def quadrature_phase_factors(shift: ShiftSpec, scale: float = 1.0) -> np.ndarray:
    """Diagonal of U (length 2nL): exp(i scale theta_j), one entry per quadrature."""
    return np.repeat(np.exp(1j * scale * shift.phases), 2)


def det_one_minus_w(state_or_G, shift: ShiftSpec, scale: float = 1.0):
    """Principal phase and log-magnitude of det(1 - W) at shift strength ``scale``."""
    if isinstance(state_or_G, GaussianState):
        _, G = cayley_spectrum(state_or_G)
    else:
        G = state_or_G
    u = quadrature_phase_factors(shift, scale)
    sign, logabs = np.linalg.slogdet(np.eye(G.shape[0], dtype=complex) - G * u)
    if sign == 0:
        raise NumericalError("det(1 - W) evaluated to zero")
    return float(np.angle(sign)), float(logabs)


def tracked_det_branch(
    G: np.ndarray,
    shift: ShiftSpec,
    tolerance: float = BRANCH_TOLERANCE,
    max_evals: int = MAX_BRANCH_EVALS,
    cayley_norm: float | None = None,
):
    """Unwrapped phase of det(1 - W) tracked along theta -> lam theta, lam in [0, 1].

    Starts from the real positive value at lam = 0. The phase velocity obeys
    |d arg det / d lam| = |Im Tr[(1 - W)^{-1} dW/dlam]|
                       <= 2nL * theta_max * ||G|| / (1 - ||G||),
    so the initial grid is sized to keep the *true* per-step change below
    ``tolerance``; observed jumps are additionally bisected. Without the a
    priori bound, sampled phase differences alone could alias by whole turns
    on states with ||G|| close to 1. Returns the unwrapped phase and
    log-magnitude at lam = 1.
    """
    cache: dict[float, tuple[float, float]] = {}

    def sample(lam: float) -> tuple[float, float]:
        if lam not in cache:
            if len(cache) >= max_evals:
                raise HomotopyError(
                    "homotopy failure: branch tracking exceeded "
                    f"{max_evals} determinant evaluations"
                )
            cache[lam] = det_one_minus_w(G, shift, scale=lam)
        return cache[lam]

    if cayley_norm is None:
        cayley_norm = float(np.linalg.norm(G, 2))
    if cayley_norm >= 1.0:
        raise HomotopyError("||W|| >= 1: branch tracking undefined (invalid state)")
    rate = (
        2.0 * shift.lattice.modes * float(np.abs(shift.phases).max())
        * cayley_norm / (1.0 - cayley_norm)
    )
    n0 = max(9, int(1.25 * rate / tolerance) + 2)
    if n0 > max_evals:
        raise HomotopyError(
            f"homotopy failure: {n0} steps needed to bound per-step phase "
            f"changes below {tolerance:.3f} (||W|| = {cayley_norm:.6f})"
        )
    lams = list(np.linspace(0.0, 1.0, n0))
    lams[0], lams[-1] = 0.0, 1.0
    for lam in lams:
        sample(lam)
    while True:
        refined = []
        changed = False
        for a, b in zip(lams[:-1], lams[1:]):
            refined.append(a)
            if abs(_wrap_angle(sample(b)[0] - sample(a)[0])) >= tolerance:
                mid = 0.5 * (a + b)
                if mid <= a or mid >= b:
                    raise HomotopyError(
                        "homotopy failure: phase jump not resolvable at "
                        "floating-point resolution"
                    )
                sample(mid)
                refined.append(mid)
                changed = True
        refined.append(lams[-1])
        lams = refined
        if not changed:
            break
    phases = [sample(lam)[0] for lam in lams]
    total = 0.0
    for prev, cur in zip(phases[:-1], phases[1:]):
        total += _wrap_angle(cur - prev)
    return total + phases[0], sample(1.0)[1]


def branch_phase_eigenvalues(G: np.ndarray, shift: ShiftSpec) -> float:
    """Homotopy branch phase via eigenvalues: sum of Arg(1 - mu_j) over eig(W).

    Every eigenvalue of W lies strictly inside the unit disk, so each factor
    1 - mu_j stays in the right half-plane along the homotopy and its
    principal argument equals the continuously tracked one. Used as an
    independent cross-check of :func:`tracked_det_branch`.
    """
    u = quadrature_phase_factors(shift)
    mu = np.linalg.eigvals(G * u)
    return float(np.sum(np.angle(1.0 - mu)))


def mean_matrix(state: GaussianState, shift: ShiftSpec) -> np.ndarray:
    """M = V - 1 + 2 (1 - U)^{-1}; complex symmetric with hermitian part V."""
    u = quadrature_phase_factors(shift)
    M = state.V.astype(complex)
    idx = np.arange(state.lattice.dim)
    M[idx, idx] += -1.0 + 2.0 / (1.0 - u)
    return M


def _mean_term_from_matrix(M: np.ndarray, alpha0: np.ndarray) -> complex:
    if not np.any(alpha0):
        return 0.0 + 0.0j
    y = np.linalg.solve(M, alpha0.astype(complex))
    residual = np.linalg.norm(M @ y - alpha0) / np.linalg.norm(alpha0)
    if residual > MEAN_SOLVE_RTOL:
        raise NumericalError(
            f"mean-term linear solve residual {residual:.3e} exceeds {MEAN_SOLVE_RTOL}"
        )
    return complex(-0.5 * (alpha0 @ y))


def mean_term(state: GaussianState, shift: ShiftSpec | None = None) -> complex:
    """s = -1/2 alpha0^T M^{-1} alpha0; Re(s) <= 0 since herm(M) = V > 0."""
    if shift is None:
        shift = shift_phases(state.lattice)
    return _mean_term_from_matrix(mean_matrix(state, shift), state.mean)


def polarization(
    state: GaussianState,
    shift: ShiftSpec | None = None,
    tolerance: float = BRANCH_TOLERANCE,
) -> PolarizationBreakdown:
    """Full polarization breakdown of a Gaussian state on the homotopy branch."""
    if shift is None:
        shift = shift_phases(state.lattice)
    if shift.lattice.modes != state.lattice.modes:
        raise ValueError("shift spec and state have different mode counts")
    vals, G = cayley_spectrum(state)
    logdet_vp1 = float(np.sum(np.log1p(vals)))
    lam_max = float(np.abs((vals - 1.0) / (vals + 1.0)).max())
    phi_f, logabs_f = tracked_det_branch(
        G, shift, tolerance=tolerance, cayley_norm=lam_max
    )
    M = mean_matrix(state, shift)
    s = _mean_term_from_matrix(M, state.mean)
    nl = state.lattice.modes
    log_abs = nl * math.log(2.0) - 0.5 * logdet_vp1 - 0.5 * logabs_f + s.real
    det_term_phase = -0.5 * phi_f
    p_unwrapped = (det_term_phase + s.imag) / (2.0 * math.pi)
    u = quadrature_phase_factors(shift)
    return PolarizationBreakdown(
        abs_T=math.exp(log_abs),
        log_abs_T=log_abs,
        det_term_phase=det_term_phase,
        mean_term=s,
        p_unwrapped=p_unwrapped,
        p=principal_polarization(p_unwrapped),
        w_matrix=G * u,
        m_matrix=M,
    )


def expectation_T(state: GaussianState, shift: ShiftSpec | None = None) -> complex:
    """<T> for an arbitrary valid Gaussian state (dense closed form)."""
    return complex(polarization(state, shift).expectation)
