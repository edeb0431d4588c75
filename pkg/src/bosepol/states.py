"""Lattice geometry and Gaussian bosonic states.

Conventions used throughout the package:

* quadratures ``q = a + a^dag``, ``p = -i (a - a^dag)``, so the vacuum
  covariance is the identity;
* the quadrature vector is ordered cell-major, site-next, with the (q, p)
  pair innermost, i.e. ``(q_{0,0}, p_{0,0}, q_{0,1}, p_{0,1}, ...)``;
* the mean vector is ``alpha0 = (<q>, <p>)`` per mode, so a coherent
  amplitude ``a`` maps to ``(2 Re a, 2 Im a)``;
* site positions carry a gauge offset: ``x_{r,s} = r + (s + delta)/n`` with
  ``0 < delta < 1``, which keeps every momentum-shift phase away from zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ChemicalPotentialError, InvalidStateError

# Relative tolerance for the stored-symmetry contract of covariance matrices.
SYMMETRY_RTOL = 1e-8


@dataclass(frozen=True)
class LatticeSpec:
    """Ring of ``cells`` unit cells with ``sites_per_cell`` sites each.

    ``gauge_offset`` shifts every site by ``gauge_offset / sites_per_cell``
    so that no site sits at the origin of the momentum-shift phase.
    """

    cells: int
    sites_per_cell: int
    gauge_offset: float = 0.5

    def __post_init__(self):
        if self.cells < 1:
            raise ValueError(f"cells must be >= 1, got {self.cells}")
        if self.sites_per_cell < 1:
            raise ValueError(f"sites_per_cell must be >= 1, got {self.sites_per_cell}")
        if not (0.0 < self.gauge_offset < 1.0):
            raise ValueError(
                "gauge_offset must lie strictly in (0, 1); "
                f"got {self.gauge_offset} (offset 0 or >= 1 would place a site "
                "at the gauge origin)"
            )

    @property
    def modes(self) -> int:
        return self.cells * self.sites_per_cell

    @property
    def dim(self) -> int:
        """Dimension of the quadrature space, two per mode."""
        return 2 * self.modes

    def site_positions(self) -> np.ndarray:
        """Positions ``x_{r,s} = r + (s + delta)/n`` in cell-major order."""
        r = np.repeat(np.arange(self.cells), self.sites_per_cell)
        s = np.tile(np.arange(self.sites_per_cell), self.cells)
        return r + (s + self.gauge_offset) / self.sites_per_cell


def make_lattice(cells: int, sites_per_cell: int, gauge_offset: float = 0.5) -> LatticeSpec:
    """Build a lattice spec, rejecting gauge offsets that put a site phase at zero."""
    return LatticeSpec(cells, sites_per_cell, gauge_offset)


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class GaussianState:
    """Gaussian bosonic state: covariance ``V`` and mean ``alpha0`` over 2nL quadratures.

    ``V`` is stored exactly symmetric; positive definiteness is *not*
    enforced at construction (use :func:`validate`), so deliberately broken
    states can be built in tests.
    """

    lattice: LatticeSpec
    V: np.ndarray
    mean: np.ndarray

    def __post_init__(self):
        dim = self.lattice.dim
        V = np.asarray(self.V, dtype=float)
        mean = np.asarray(self.mean, dtype=float)
        if V.shape != (dim, dim):
            raise ValueError(f"covariance must be {dim}x{dim}, got {V.shape}")
        if mean.shape != (dim,):
            raise ValueError(f"mean must have length {dim}, got {mean.shape}")
        if not np.all(np.isfinite(V)) or not np.all(np.isfinite(mean)):
            raise ValueError("covariance and mean must be finite")
        defect = np.abs(V - V.T).max()
        scale = max(1.0, np.abs(V).max())
        if defect > SYMMETRY_RTOL * scale:
            raise ValueError(f"covariance asymmetry {defect:.3e} exceeds tolerance")
        object.__setattr__(self, "V", _as_readonly((V + V.T) / 2.0))
        object.__setattr__(self, "mean", _as_readonly(mean))

    @property
    def modes(self) -> int:
        return self.lattice.modes


@dataclass(frozen=True)
class ModeOccupation:
    """Eigenmode data of a number-conserving hopping matrix at thermal equilibrium."""

    energies: np.ndarray
    occupations: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        if np.any(self.occupations < 0):
            raise ValueError("occupations must be nonnegative")
        U = self.eigenvectors
        defect = np.abs(U.conj().T @ U - np.eye(U.shape[1])).max()
        if defect > 1e-10:
            raise ValueError(f"eigenvector matrix not unitary (defect {defect:.3e})")


@dataclass(frozen=True)
class ValidationReport:
    symmetry_defect: float
    min_eigenvalue: float
    classical: bool
    purity: float
    valid: bool


def coherent_state(lattice: LatticeSpec, amplitudes) -> GaussianState:
    """Multi-mode coherent state |alpha_1> x ... x |alpha_nL>: V = identity."""
    amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if amps.shape != (lattice.modes,):
        raise ValueError(f"need {lattice.modes} amplitudes, got {amps.shape}")
    if not np.all(np.isfinite(amps)):
        raise ValueError("amplitudes must be finite")
    mean = np.empty(lattice.dim)
    mean[0::2] = 2.0 * amps.real
    mean[1::2] = 2.0 * amps.imag
    return GaussianState(lattice, np.eye(lattice.dim), mean)


def vacuum_state(lattice: LatticeSpec) -> GaussianState:
    return coherent_state(lattice, np.zeros(lattice.modes))


def bose_occupations(hopping: np.ndarray, beta: float, mu: float) -> ModeOccupation:
    """Diagonalize a hermitian hopping matrix and attach Bose-Einstein occupations.

    Requires every eigenvalue to satisfy ``eps - mu > 0``; otherwise the
    grand-canonical occupation is undefined.
    """
    h = np.asarray(hopping, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("hopping matrix must be square")
    if np.abs(h - h.conj().T).max() > 1e-10 * max(1.0, np.abs(h).max()):
        raise ValueError("hopping matrix must be hermitian")
    if beta <= 0:
        raise ValueError("inverse temperature beta must be positive")
    energies, vectors = np.linalg.eigh(h)
    gap = energies - mu
    if np.any(gap <= 0):
        raise ChemicalPotentialError(
            f"chemical potential above band minimum: min(eps - mu) = {gap.min():.6g}"
        )
    with np.errstate(over="ignore"):
        occ = 1.0 / np.expm1(beta * gap)
    occ = np.where(np.isfinite(occ), occ, 0.0)
    return ModeOccupation(energies=energies, occupations=occ, eigenvectors=vectors)


# 2x2 blocks used to embed a complex one-body correlation matrix into the
# real quadrature representation.
_J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def covariance_from_correlations(N: np.ndarray, dim: int) -> np.ndarray:
    """Quadrature covariance of a number-conserving state with correlation matrix N.

    Blocks: V[q_i q_j] = V[p_i p_j] = delta_ij + 2 Re N_ij and
    V[q_i p_j] = 2 Im N_ij (transpose partner -2 Im N_ij).
    """
    V = np.eye(dim)
    V += 2.0 * np.kron(N.real, np.eye(2)) + 2.0 * np.kron(N.imag, _J2)
    return (V + V.T) / 2.0


def thermal_state(hopping: np.ndarray, beta: float, mu: float, lattice: LatticeSpec) -> GaussianState:
    """Grand-canonical thermal state of a number-conserving hopping Hamiltonian.

    The correlation matrix is ``N = sum_j nbar_j v_j v_j^dag`` in the site
    basis, with ``nbar_j = 1/(exp(beta (eps_j - mu)) - 1)``. The resulting
    covariance is strictly classical (``V > 1``) at any finite temperature.
    """
    modes = bose_occupations(hopping, beta, mu)
    if modes.energies.shape[0] != lattice.modes:
        raise ValueError(
            f"hopping matrix is {modes.energies.shape[0]}-dimensional, "
            f"lattice has {lattice.modes} modes"
        )
    U = modes.eigenvectors
    N = (U * modes.occupations) @ U.conj().T
    V = covariance_from_correlations(N, lattice.dim)
    return GaussianState(lattice, V, np.zeros(lattice.dim))


def squeezed_vacuum_state(lattice: LatticeSpec, r) -> GaussianState:
    """Product of single-mode squeezed vacua, per-mode V block diag(e^{2r}, e^{-2r})."""
    rs = np.broadcast_to(np.asarray(r, dtype=float), (lattice.modes,))
    if not np.all(np.isfinite(rs)):
        raise ValueError("squeezing parameters must be finite")
    diag = np.empty(lattice.dim)
    diag[0::2] = np.exp(2.0 * rs)
    diag[1::2] = np.exp(-2.0 * rs)
    return GaussianState(lattice, np.diag(diag), np.zeros(lattice.dim))


def two_mode_squeezed_state(r: float, lattice: LatticeSpec | None = None) -> GaussianState:
    """Two-mode squeezed vacuum with correlated quadratures.

    V = [[cosh(2r) 1, sinh(2r) Z], [sinh(2r) Z, cosh(2r) 1]], Z = diag(1, -1).
    Defaults to a two-cell, one-site lattice (the state is cell-circulant there).
    """
    if lattice is None:
        lattice = make_lattice(2, 1)
    if lattice.modes != 2:
        raise ValueError("two_mode_squeezed_state needs a two-mode lattice")
    c, s = np.cosh(2.0 * r), np.sinh(2.0 * r)
    Z = np.diag([1.0, -1.0])
    V = np.block([[c * np.eye(2), s * Z], [s * Z, c * np.eye(2)]])
    return GaussianState(lattice, V, np.zeros(4))


def symplectic_form(modes: int) -> np.ndarray:
    """Block-diagonal symplectic form for the (q, p)-innermost ordering."""
    return np.kron(np.eye(modes), _J2)


def random_gaussian_state(
    lattice: LatticeSpec,
    seed: int,
    classical: bool = False,
    generator_scale: float = 0.3,
    nbar_max: float = 1.5,
    mean_scale: float = 0.0,
) -> GaussianState:
    """Seeded random Gaussian state ``V = S D S^T`` with S symplectic.

    S is the exponential of a random symmetric generator contracted with the
    symplectic form; D carries random thermal occupations. With
    ``classical=True`` the covariance is rescaled so its smallest eigenvalue
    is >= 1. Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    dim = lattice.dim
    A = rng.normal(size=(dim, dim))
    G = generator_scale * (A + A.T) / np.sqrt(2.0 * dim)
    S = expm(symplectic_form(lattice.modes) @ G)
    nbar = rng.uniform(0.0, nbar_max, size=lattice.modes)
    D = np.repeat(2.0 * nbar + 1.0, 2)
    V = (S * D) @ S.T
    V = (V + V.T) / 2.0
    if classical:
        lo = np.linalg.eigvalsh(V)[0]
        if lo < 1.0:
            V = V * ((1.0 + 1e-9) / lo)
    mean = mean_scale * rng.normal(size=dim) if mean_scale else np.zeros(dim)
    return GaussianState(lattice, V, mean)


def validate(state: GaussianState) -> ValidationReport:
    """Report symmetry defect, spectral floor, classicality and purity of a state."""
    V = state.V
    defect = float(np.abs(V - V.T).max())
    eigs = np.linalg.eigvalsh((V + V.T) / 2.0)
    lo = float(eigs[0])
    valid = lo > 0.0
    purity = float(np.exp(-0.5 * np.sum(np.log(eigs)))) if valid else float("nan")
    return ValidationReport(
        symmetry_defect=defect,
        min_eigenvalue=lo,
        classical=bool(lo >= 1.0),
        purity=purity,
        valid=valid,
    )


def require_valid(state: GaussianState) -> None:
    """Raise :class:`InvalidStateError` unless the covariance is positive definite."""
    report = validate(state)
    if not report.valid:
        raise InvalidStateError(
            f"invalid state: min covariance eigenvalue {report.min_eigenvalue:.6g} <= 0"
        )
