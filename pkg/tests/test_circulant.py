"""Block-circulant reduction against the dense determinant oracle."""

import numpy as np
import pytest

from bosepol import (
    GaussianState,
    cell_bloch_blocks,
    decay_bound,
    dense_determinant,
    lambda_max,
    make_lattice,
    random_circulant_state,
    reduced_determinant,
    squeezed_vacuum_state,
    thermal_state,
    two_mode_squeezed_state,
    vacuum_state,
)
from bosepol.circulant import (
    benchmark_determinants,
    check_translation_invariance,
    gauge_block,
    reassemble_covariance,
)
from bosepol.errors import NotTranslationInvariantError
from bosepol.rice_mele import RiceMeleParams, rmm_hopping_matrix, rmm_thermal_state

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def test_scaled_identity_blocks():
    lat = make_lattice(4, 2)
    st = GaussianState(lat, 2.5 * np.eye(lat.dim), np.zeros(lat.dim))
    blocks = cell_bloch_blocks(st)
    for vk in blocks.v_blocks:
        assert np.allclose(vk, 2.5 * np.eye(4), atol=1e-12)


def direct_bloch_covariance(h: np.ndarray, L: int, beta: float, mu: float) -> np.ndarray:
    """Per-momentum thermal Bloch blocks, built without touching the dense V.

    Bloch-transforms the hopping blocks, applies the Bose function to each
    2x2 momentum block, and embeds the pair (N_k, N_{L-k}) into the
    quadrature representation.
    """
    tn = h.shape[0] // L
    hr = h.reshape(L, tn, L, tn)
    nks = []
    for k in range(L):
        hk = sum(hr[0, :, d, :] * np.exp(2j * np.pi * k * d / L) for d in range(L))
        eps, U = np.linalg.eigh(hk)
        nks.append((U * (1.0 / np.expm1(beta * (eps - mu)))) @ U.conj().T)
    out = np.empty((L, 2 * tn, 2 * tn), dtype=complex)
    for k in range(L):
        mirror = nks[(L - k) % L].T
        out[k] = (
            np.eye(2 * tn)
            + np.kron(nks[k] + mirror, np.eye(2))
            + np.kron(-1j * (nks[k] - mirror), J2)
        )
    return out


def test_thermal_rice_mele_bloch_blocks_match_direct_construction():
    """v_k from the dense covariance equals the per-momentum thermal build."""
    L, beta, mu = 6, 1.0, -3.0
    lat = make_lattice(L, 2)
    params = RiceMeleParams(0.8, 0.6, 0.35)
    st = rmm_thermal_state(params, lat, beta, mu)
    got = cell_bloch_blocks(st).v_blocks
    want = direct_bloch_covariance(rmm_hopping_matrix(params, lat), L, beta, mu)
    assert np.abs(got - want).max() < 1e-10


def test_complex_hopping_bloch_blocks_match_direct_construction():
    from bosepol.loops import chain_hopping_at_ky
    from bosepol.states import thermal_state

    L, beta, mu = 5, 1.0, -6.0
    lat = make_lattice(L, 2)
    h = chain_hopping_at_ky(1.3, lat, mass=1.0)
    st = thermal_state(h, beta, mu, lat)
    got = cell_bloch_blocks(st).v_blocks
    want = direct_bloch_covariance(h, L, beta, mu)
    assert np.abs(got - want).max() < 1e-10


def test_non_circulant_covariance_rejected():
    lat = make_lattice(2, 1)
    st = GaussianState(lat, np.diag([3.0, 3.0, 1.0, 1.0]), np.zeros(4))
    with pytest.raises(NotTranslationInvariantError):
        cell_bloch_blocks(st)


def test_non_periodic_mean_rejected():
    lat = make_lattice(2, 1)
    st = GaussianState(lat, 2.0 * np.eye(4), np.array([1.0, 0.0, 0.0, 0.0]))
    with pytest.raises(NotTranslationInvariantError):
        check_translation_invariance(st)


def test_reassembly_roundtrip():
    lat = make_lattice(5, 2)
    st = random_circulant_state(lat, 3, classical=False)
    blocks = cell_bloch_blocks(st)
    assert np.abs(reassemble_covariance(blocks) - st.V).max() < 1e-10


def test_uniform_thermal_scalar_reduction():
    # n = 1, nbar = 1 (q = 1/2), L = 3: det = (1 + q^3)^2 = 81/64
    lat = make_lattice(3, 1)
    st = thermal_state(np.zeros((3, 3)), beta=np.log(2.0), mu=-1.0, lattice=lat)
    det = reduced_determinant(cell_bloch_blocks(st))
    assert det == pytest.approx(81.0 / 64.0, rel=1e-12)
    assert dense_determinant(st) == pytest.approx(det, rel=1e-12)


def test_vacuum_determinant_is_one():
    lat = make_lattice(4, 2)
    st = vacuum_state(lat)
    blocks = cell_bloch_blocks(st)
    assert np.abs(blocks.m_blocks).max() == 0.0
    assert reduced_determinant(blocks) == pytest.approx(1.0)


@pytest.mark.parametrize("classical", [True, False])
def test_reduced_matches_dense_on_random_states(classical):
    for seed, L in [(0, 4), (1, 6), (2, 9), (3, 12), (4, 16)]:
        lat = make_lattice(L, 2)
        st = random_circulant_state(lat, seed, classical=classical)
        dense = dense_determinant(st)
        reduced = reduced_determinant(cell_bloch_blocks(st))
        assert abs(dense - reduced) <= 1e-10 * abs(dense)


def test_reduced_matches_dense_beyond_two_bands():
    # The reduction is written for arbitrary sites per cell (and survives
    # the single-cell edge case); the dense determinant is the arbiter.
    for n, L in [(1, 7), (2, 1), (3, 4), (4, 3)]:
        lat = make_lattice(L, n)
        st = random_circulant_state(lat, seed=20 + n, classical=(n % 2 == 0))
        dense = dense_determinant(st)
        reduced = reduced_determinant(cell_bloch_blocks(st))
        assert abs(dense - reduced) <= 1e-10 * abs(dense)


def test_tmsv_is_circulant_on_two_cells():
    st = two_mode_squeezed_state(0.9)
    dense = dense_determinant(st)
    reduced = reduced_determinant(cell_bloch_blocks(st))
    assert abs(dense - reduced) <= 1e-12 * abs(dense)


def test_lambda_max_values():
    lat = make_lattice(1, 1)
    st = GaussianState(lat, 3.0 * np.eye(2), np.zeros(2))
    assert lambda_max(st) == pytest.approx(0.5)
    assert lambda_max(vacuum_state(lat)) == 0.0
    r = 0.7
    st = squeezed_vacuum_state(lat, r)
    assert lambda_max(st) == pytest.approx(np.tanh(r))


def test_decay_bound_arithmetic():
    lat = make_lattice(10, 1)
    st = thermal_state(np.zeros((10, 10)), beta=np.log(2.0), mu=-1.0, lattice=lat)
    assert lambda_max(st) == pytest.approx(0.5)
    assert decay_bound(st) == pytest.approx(4.0 / 1024.0)
    vac = vacuum_state(lat)
    assert decay_bound(vac) == 0.0
    assert np.angle(dense_determinant(vac)) == 0.0


def test_thermal_family_phase_below_bound_and_decaying():
    params = RiceMeleParams(0.9, 0.1, 0.3)
    phases = {}
    for L in (4, 8, 16, 32):
        lat = make_lattice(L, 2)
        st = rmm_thermal_state(params, lat, beta=1.0, mu=-3.0)
        det = reduced_determinant(cell_bloch_blocks(st))
        phase = abs(np.angle(det))
        assert phase <= decay_bound(st)
        phases[L] = phase
    assert phases[8] < phases[4] and phases[16] < phases[8] and phases[32] < phases[16]


def test_cyclic_rotation_invariance():
    lat = make_lattice(6, 2)
    st = random_circulant_state(lat, 9, classical=False)
    blocks = cell_bloch_blocks(st)
    base = reduced_determinant(blocks)
    for shift in (1, 3):
        rolled = np.roll(blocks.m_blocks, shift, axis=0)
        prod = np.eye(4, dtype=complex)
        for mk in rolled:
            prod = mk @ prod
        det = np.linalg.det(np.eye(4) - prod)
        assert det == pytest.approx(base, rel=1e-11)


def test_block_eigenvalues_inside_unit_disk():
    lat = make_lattice(8, 2)
    for seed in range(3):
        st = random_circulant_state(lat, seed, classical=(seed != 1))
        blocks = cell_bloch_blocks(st)
        mu = np.abs(np.linalg.eigvals(blocks.m_blocks))
        assert mu.max() < 1.0


def test_gauge_block_phases_default_offset():
    # theta_{0,s} = 2 pi (s + 1/2) / (n L): for n = 2 the intra-cell phases
    # are exp(i pi / (2L)) and exp(3 i pi / (2L)), one per quadrature pair.
    L = 5
    lat = make_lattice(L, 2)
    D = np.diag(gauge_block(lat))
    want = np.repeat(np.exp(1j * np.array([np.pi / (2 * L), 3 * np.pi / (2 * L)])), 2)
    assert np.allclose(D, want)


def test_benchmark_row_consistency():
    lat = make_lattice(32, 2)
    row = benchmark_determinants(lat, seed=1, repeats=2)
    assert row["relative_det_error"] <= 1e-10
    assert row["dense_seconds"] > 0 and row["reduced_seconds"] > 0
