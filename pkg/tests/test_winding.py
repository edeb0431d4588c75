"""Winding detectors: null results on physical loops, planted synthetic windings."""

import numpy as np
import pytest

from bosepol import make_lattice
from bosepol.errors import RefinementExhaustedError
from bosepol.loops import (
    band_chern_number,
    chain_hopping_at_ky,
    named_loop,
    random_classical_loop,
    random_squeezed_loop,
    rmm_coherent_loop,
    rmm_thermal_loop,
    thermal_chern_family,
)
from bosepol.polarization import mean_term, shift_phases
from bosepol.states import thermal_state, vacuum_state
from bosepol.winding import (
    ParameterLoop,
    chern_via_polarization,
    trace_zero_count,
    track_polarization,
    winding_number,
    winding_of_values,
    zero_count,
)

WINDING_TOL = 1e-6


def test_constant_loop():
    lat = make_lattice(3, 2)
    state = vacuum_state(lat)
    loop = ParameterLoop(sampler=lambda lam: state, initial_samples=8)
    track = track_polarization(loop)
    assert np.ptp(track.p_unwrapped) == 0.0
    result = winding_number(track)
    assert result.delta_p == 0.0
    assert result.zero_count == 0
    assert result.nearest_half_integer == 0


def test_thermal_rice_mele_pump_loop():
    lat = make_lattice(8, 2)
    track = track_polarization(rmm_thermal_loop(lat))
    result = winding_number(track)
    assert abs(result.delta_p) <= WINDING_TOL
    assert result.zero_count == 0
    # smooth closed trace: endpoints coincide
    assert track.p_unwrapped[0] == pytest.approx(track.p_unwrapped[-1], abs=1e-12)
    assert np.all(track.abs_T > 0)


def test_coherent_pump_loop():
    lat = make_lattice(4, 2)
    result = winding_number(track_polarization(rmm_coherent_loop(lat)))
    assert abs(result.delta_p) <= 1e-9
    assert result.zero_count == 0


def test_random_classical_loops():
    lat = make_lattice(4, 2)
    for seed in range(10):
        result = winding_number(track_polarization(random_classical_loop(lat, seed)))
        assert abs(result.delta_p) <= WINDING_TOL, seed
        assert result.zero_count == 0


def test_random_squeezed_loops():
    lat = make_lattice(3, 2)
    for seed in range(5):
        result = winding_number(track_polarization(random_squeezed_loop(lat, seed)))
        assert abs(result.delta_p) <= WINDING_TOL, seed
        assert result.zero_count == 0


def test_delta_p_matches_zero_count_on_physical_loops():
    lat = make_lattice(4, 2)
    for seed in (0, 1):
        result = winding_number(track_polarization(random_classical_loop(lat, seed)))
        assert result.delta_p == pytest.approx(result.zero_count / 2.0, abs=WINDING_TOL)


def test_planted_windings_detected_exactly():
    assert winding_of_values(lambda lam: 1 - 2 * np.exp(2j * np.pi * lam)) == 1
    assert winding_of_values(lambda lam: 1 - 4 * np.exp(4j * np.pi * lam)) == 2
    assert winding_of_values(lambda lam: 1 - 2 * np.exp(-2j * np.pi * lam)) == -1
    assert winding_of_values(lambda lam: 2.0 + 0j) == 0
    # winding-3 path with an off-center circle
    assert winding_of_values(lambda lam: 0.3 + np.exp(6j * np.pi * lam)) == 3


def test_non_enclosing_synthetic_loop():
    assert winding_of_values(lambda lam: 1 - 0.6 * np.exp(2j * np.pi * lam)) == 0


def test_zero_on_path_raises():
    with pytest.raises(RefinementExhaustedError):
        winding_of_values(lambda lam: 1 - np.exp(2j * np.pi * lam))


def test_zero_count_via_loop():
    lat = make_lattice(4, 2)
    assert zero_count(random_classical_loop(lat, 3)) == 0


def test_trace_quadrature_cross_check():
    scalar = lambda lam: np.array([[1 - 2 * np.exp(2j * np.pi * lam)]])
    assert trace_zero_count(scalar, 512) == pytest.approx(1.0, abs=1e-3)
    matrix = lambda lam: np.diag(
        [1 - 2 * np.exp(2j * np.pi * lam), 1 - 0.3 * np.exp(2j * np.pi * lam)]
    )
    assert trace_zero_count(matrix, 512) == pytest.approx(1.0, abs=1e-3)

    lat = make_lattice(3, 2)
    loop = random_classical_loop(lat, 7)
    shift = shift_phases(lat)
    u = np.repeat(np.exp(1j * shift.phases), 2)

    def one_minus_w(lam):
        state = loop.sampler(lam)
        eye = np.eye(lat.dim)
        G = np.linalg.solve(state.V + eye, state.V - eye)
        return eye - G * u

    assert trace_zero_count(one_minus_w, 128) == pytest.approx(0.0, abs=1e-3)


def test_mean_term_single_valued_around_loops():
    """exp(mean term) itself never winds around zero on a closed loop."""
    lat = make_lattice(3, 2)
    for seed in (0, 1, 2):
        loop = random_classical_loop(lat, seed, mean_scale=1.0)
        shift = shift_phases(lat)
        fn = lambda lam: np.exp(mean_term(loop.sampler(lam), shift))
        assert winding_of_values(fn, initial_samples=32) == 0


def test_gauge_offset_independence_of_winding():
    deltas = (0.25, 0.5, 0.75)
    results = []
    for delta in deltas:
        lat = make_lattice(4, 2, delta)
        res = winding_number(track_polarization(rmm_thermal_loop(lat)))
        results.append(res.delta_p)
        assert res.zero_count == 0
    assert max(results) - min(results) <= 1e-9


def test_sampling_robustness():
    lat = make_lattice(4, 2)
    a = winding_number(track_polarization(random_classical_loop(lat, 5)))
    loop2 = random_classical_loop(lat, 5, initial_samples=32)
    b = winding_number(track_polarization(loop2))
    assert a.zero_count == b.zero_count == 0
    assert a.delta_p == pytest.approx(b.delta_p, abs=1e-9)


def test_loop_validation():
    lat = make_lattice(2, 2)
    state = vacuum_state(lat)
    with pytest.raises(ValueError):
        ParameterLoop(sampler=lambda lam: state, initial_samples=4)
    with pytest.raises(ValueError):
        ParameterLoop(sampler=lambda lam: state, tolerance=0.0)
    # a sampler that does not close
    from bosepol.states import GaussianState

    open_loop = ParameterLoop(
        sampler=lambda lam: GaussianState(
            lat, (1.0 + lam) * np.eye(lat.dim), np.zeros(lat.dim)
        ),
        initial_samples=8,
    )
    with pytest.raises(ValueError):
        track_polarization(open_loop)


def test_named_loop_dispatch():
    lat = make_lattice(4, 2)
    for name in ("rmm-thermal", "rmm-coherent", "random-classical", "random-squeezed"):
        loop = named_loop(name, lat, seed=1)
        assert loop.label == name
    with pytest.raises(ValueError):
        named_loop("bogus", lat)


def test_chern_constant_family_is_zero():
    lat = make_lattice(4, 2)
    state = thermal_state(np.diag([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]),
                          1.0, -1.0, lat)
    assert chern_via_polarization(lambda ky: state, samples=16) == 0


def test_chern_vacuum_family():
    lat = make_lattice(4, 2)
    family = lambda ky: vacuum_state(lat)
    assert chern_via_polarization(family, samples=16) == 0
    track = track_polarization(
        ParameterLoop(sampler=lambda lam: family(lam), initial_samples=16)
    )
    assert np.abs(track.p_unwrapped).max() == 0.0


def test_chern_null_on_topological_band_family():
    assert band_chern_number(1.0, 24) != 0
    lat = make_lattice(6, 2)
    family = thermal_chern_family(lat, mass=1.0, beta=1.0, mu=-6.0)
    assert chern_via_polarization(family, samples=24) == 0


def test_band_chern_trivial_mass():
    assert band_chern_number(3.5, 24) == 0


def test_chern_family_hopping_is_hermitian_and_gapped():
    lat = make_lattice(6, 2)
    for ky in (0.0, 1.1, 2.0 * np.pi - 0.3):
        h = chain_hopping_at_ky(ky, lat)
        assert np.abs(h - h.conj().T).max() < 1e-12
        assert np.linalg.eigvalsh(h).min() > -6.0
