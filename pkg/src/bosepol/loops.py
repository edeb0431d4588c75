"""Named closed loops and families of Gaussian states for winding experiments.

Built-ins exposed to the CLI:

* ``rmm-thermal``    thermal Rice-Mele states driven around the reference pump;
* ``rmm-coherent``   the evolved translation-invariant coherent state;
* ``random-classical`` seeded circulant interpolations with min eig(V) >= 1;
* ``random-squeezed``  seeded nonclassical loops with a rotating squeezing axis.

Also provides the two-band thermal family with a topologically non-trivial
single-particle band structure used for the Chern-number null test.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .circulant import random_circulant_state
from .rice_mele import PumpProtocol, evolve_pump, rmm_thermal_state
from .states import GaussianState, LatticeSpec, coherent_state, thermal_state
from .winding import ParameterLoop

LOOP_NAMES = ("rmm-thermal", "rmm-coherent", "random-classical", "random-squeezed")


def reference_protocol(amplitude: float = 1.0, period: float = 50.0) -> PumpProtocol:
    return PumpProtocol(amplitude=amplitude, period=period)


def rmm_thermal_loop(
    lattice: LatticeSpec,
    protocol: PumpProtocol | None = None,
    beta: float = 1.0,
    mu: float | None = None,
    initial_samples: int = 16,
) -> ParameterLoop:
    """Thermal Rice-Mele states around one pump cycle.

    The chemical potential defaults to -3A, safely below the band minimum
    -sqrt(2) A reached along the reference protocol, so the Bose occupations
    stay finite on the whole loop.
    """
    protocol = protocol or reference_protocol()
    if mu is None:
        mu = -3.0 * protocol.amplitude

    def sampler(lam: float) -> GaussianState:
        params = protocol.params_at(lam * protocol.period)
        return rmm_thermal_state(params, lattice, beta, mu)

    return ParameterLoop(
        sampler=sampler, initial_samples=initial_samples, label="rmm-thermal"
    )


def rmm_coherent_loop(
    lattice: LatticeSpec,
    protocol: PumpProtocol | None = None,
    steps: int = 2 ** 14,
    initial_samples: int = 16,
) -> ParameterLoop:
    """Evolved coherent state of the pump; covariance stays the identity.

    The trajectory is integrated once; loop samples pick the nearest grid
    point, which is exact for the dyadic lambdas produced by bisection.
    """
    protocol = protocol or reference_protocol()
    if lattice.sites_per_cell != 2:
        raise ValueError("Rice-Mele loops need two sites per cell")
    traj = evolve_pump(protocol, steps=steps)

    def sampler(lam: float) -> GaussianState:
        i = int(round(lam * steps))
        cell = np.array([traj.alpha[i], traj.beta[i]])
        return coherent_state(lattice, np.tile(cell, lattice.cells))

    return ParameterLoop(
        sampler=sampler, initial_samples=initial_samples, label="rmm-coherent"
    )


def _mirrored_symmetric_circulant(
    lattice: LatticeSpec, rng: np.random.Generator, norm: float
) -> np.ndarray:
    """Random real-symmetric cell-circulant matrix with spectral norm <= norm."""
    L, tn = lattice.cells, 2 * lattice.sites_per_cell
    blocks = np.empty((L, tn, tn), dtype=complex)
    for k in range(L // 2 + 1):
        real_block = k == 0 or (L % 2 == 0 and k == L // 2)
        if real_block:
            Q, _ = np.linalg.qr(rng.normal(size=(tn, tn)))
        else:
            Q, _ = np.linalg.qr(rng.normal(size=(tn, tn)) + 1j * rng.normal(size=(tn, tn)))
        eigs = rng.uniform(-norm, norm, size=tn)
        B = (Q * eigs) @ Q.conj().T
        B = (B + B.conj().T) / 2.0
        blocks[k] = B
        blocks[(L - k) % L] = B.conj()
    Finv = np.exp(-2j * np.pi * np.outer(np.arange(L), np.arange(L)) / L) / L
    C = np.einsum("dk,kab->dab", Finv, blocks)
    idx = (np.arange(L)[None, :] - np.arange(L)[:, None]) % L
    X = C[idx].transpose(0, 2, 1, 3).reshape(lattice.dim, lattice.dim).real
    return (X + X.T) / 2.0


def random_classical_loop(
    lattice: LatticeSpec,
    seed: int,
    wobble: float = 0.25,
    mean_scale: float = 0.5,
    initial_samples: int = 16,
) -> ParameterLoop:
    """Smooth closed loop of classical circulant states with a driven mean.

    V(lambda) = Vbar + cos(2 pi lambda) X + sin(2 pi lambda) Y with
    ||X||, ||Y|| <= wobble and min eig(Vbar) >= 1 + 2 wobble, so the state
    stays classical on the whole loop.
    """
    rng = np.random.default_rng(seed)
    base = random_circulant_state(
        lattice, int(rng.integers(2 ** 31)), classical=True,
        eig_low=1.0 + 2.0 * wobble + 0.1, eig_high=3.5,
    )
    X = _mirrored_symmetric_circulant(lattice, rng, wobble)
    Y = _mirrored_symmetric_circulant(lattice, rng, wobble)
    cell = mean_scale * rng.normal(size=(3, 2 * lattice.sites_per_cell))
    m0, ma, mb = (np.tile(c, lattice.cells) for c in cell)

    def sampler(lam: float) -> GaussianState:
        c, s = math.cos(2.0 * math.pi * lam), math.sin(2.0 * math.pi * lam)
        return GaussianState(lattice, base.V + c * X + s * Y, m0 + c * ma + s * mb)

    return ParameterLoop(
        sampler=sampler, initial_samples=initial_samples, label="random-classical"
    )


def random_squeezed_loop(
    lattice: LatticeSpec,
    seed: int,
    r_base: tuple[float, float] = (0.2, 0.8),
    r_wobble: float = 0.25,
    mean_scale: float = 0.3,
    initial_samples: int = 16,
) -> ParameterLoop:
    """Nonclassical loop: per-mode squeezing axes rotate by pi over one cycle."""
    rng = np.random.default_rng(seed)
    nl = lattice.modes
    r0 = rng.uniform(*r_base, size=nl)
    rho = rng.uniform(0.0, r_wobble, size=nl)
    phi0 = rng.uniform(0.0, math.pi, size=nl)
    mean_a = mean_scale * rng.normal(size=lattice.dim)
    mean_b = mean_scale * rng.normal(size=lattice.dim)

    def sampler(lam: float) -> GaussianState:
        V = np.zeros((lattice.dim, lattice.dim))
        r = r0 + rho * math.sin(2.0 * math.pi * lam)
        phi = phi0 + math.pi * lam
        for j in range(nl):
            c, s = math.cos(phi[j]), math.sin(phi[j])
            R = np.array([[c, -s], [s, c]])
            block = R @ np.diag([math.exp(2.0 * r[j]), math.exp(-2.0 * r[j])]) @ R.T
            V[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = (block + block.T) / 2.0
        c, s = math.cos(2.0 * math.pi * lam), math.sin(2.0 * math.pi * lam)
        return GaussianState(lattice, V, c * mean_a + s * mean_b)

    return ParameterLoop(
        sampler=sampler, initial_samples=initial_samples, label="random-squeezed"
    )


def named_loop(
    name: str,
    lattice: LatticeSpec,
    seed: int = 0,
    protocol: PumpProtocol | None = None,
    beta: float = 1.0,
    mu: float | None = None,
    initial_samples: int = 16,
) -> ParameterLoop:
    """Resolve one of the built-in loop names."""
    if name == "rmm-thermal":
        return rmm_thermal_loop(lattice, protocol, beta, mu, initial_samples)
    if name == "rmm-coherent":
        return rmm_coherent_loop(lattice, protocol, initial_samples=initial_samples)
    if name == "random-classical":
        return random_classical_loop(lattice, seed, initial_samples=initial_samples)
    if name == "random-squeezed":
        return random_squeezed_loop(lattice, seed, initial_samples=initial_samples)
    raise ValueError(f"unknown loop {name!r}; choose from {', '.join(LOOP_NAMES)}")


# Two-band model with a chiral pair of Bloch bands carrying Chern number +-1:
# h(kx, ky) = sin kx sigma_x + sin ky sigma_y + (mass + cos kx + cos ky) sigma_z.
_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SY = np.array([[0.0, -1j], [1j, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def two_band_bloch(kx: float, ky: float, mass: float = 1.0) -> np.ndarray:
    return (
        math.sin(kx) * _SX
        + math.sin(ky) * _SY
        + (mass + math.cos(kx) + math.cos(ky)) * _SZ
    )


def band_chern_number(mass: float = 1.0, grid: int = 32) -> int:
    """Lattice (plaquette-flux) Chern number of the lower Bloch band."""
    ks = 2.0 * np.pi * np.arange(grid) / grid
    u = np.empty((grid, grid, 2), dtype=complex)
    for i, kx in enumerate(ks):
        for j, ky in enumerate(ks):
            _, vecs = np.linalg.eigh(two_band_bloch(kx, ky, mass))
            u[i, j] = vecs[:, 0]
    total = 0.0
    for i in range(grid):
        for j in range(grid):
            u1 = u[i, j]
            u2 = u[(i + 1) % grid, j]
            u3 = u[(i + 1) % grid, (j + 1) % grid]
            u4 = u[i, (j + 1) % grid]
            plaquette = (
                np.vdot(u1, u2) * np.vdot(u2, u3) * np.vdot(u3, u4) * np.vdot(u4, u1)
            )
            total += np.angle(plaquette)
    c = total / (2.0 * math.pi)
    rounded = round(c)
    if abs(c - rounded) > 1e-6:
        raise ValueError(f"plaquette Chern sum {c:.6f} did not converge to an integer")
    return int(rounded)


def chain_hopping_at_ky(ky: float, lattice: LatticeSpec, mass: float = 1.0) -> np.ndarray:
    """1D hopping matrix of the two-band model at fixed transverse momentum."""
    if lattice.sites_per_cell != 2:
        raise ValueError("the two-band chain needs two sites per cell")
    L = lattice.cells
    onsite = math.sin(ky) * _SY + (mass + math.cos(ky)) * _SZ
    hop = (_SZ - 1j * _SX) / 2.0
    h = np.zeros((2 * L, 2 * L), dtype=complex)
    for r in range(L):
        sl = slice(2 * r, 2 * r + 2)
        h[sl, sl] += onsite
        rn = slice(2 * ((r + 1) % L), 2 * ((r + 1) % L) + 2)
        h[rn, sl] += hop
        h[sl, rn] += hop.conj().T
    return h


def thermal_chern_family(
    lattice: LatticeSpec,
    mass: float = 1.0,
    beta: float = 1.0,
    mu: float = -6.0,
) -> Callable[[float], GaussianState]:
    """k_y -> thermal 1D Gaussian state of the two-band chain (periodic in k_y)."""

    def family(ky: float) -> GaussianState:
        return thermal_state(chain_hopping_at_ky(ky, lattice, mass), beta, mu, lattice)

    return family
