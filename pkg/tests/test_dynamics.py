import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from irhm_polaron import analysis, dynamics, hilbert, models, perturbation
from irhm_polaron.dynamics import BathSpec, TimeGrid
from irhm_polaron.errors import InvalidStateError, OutOfScopeError, StepSizeError
from irhm_polaron.models import ModelParams


def _random_rho(dim, seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return dynamics.pure_state(psi)


def test_time_grid():
    grid = TimeGrid(0.0, 10.0, 100, 10)
    assert grid.step == pytest.approx(0.1)
    np.testing.assert_allclose(grid.sample_times, np.arange(0, 11.0))
    for bad in ((0, 1, 0), (1, 0, 10), (0, 1, 10, 3)):
        with pytest.raises(ValueError):
            TimeGrid(*bad)


def test_bath_zero_temperature_only():
    vac = BathSpec().state(hilbert.CompositeSpace(2, 2))
    assert vac[0] == 1 and np.count_nonzero(vac) == 1
    with pytest.raises(OutOfScopeError):
        BathSpec(temperature=0.1)


def test_density_matrix_checks():
    with pytest.raises(InvalidStateError):
        dynamics.check_density_matrix(np.eye(2))
    with pytest.raises(InvalidStateError):
        dynamics.check_density_matrix(np.array([[0.5, 0.1], [0.2, 0.5]]))
    with pytest.raises(InvalidStateError):
        dynamics.check_density_matrix(np.diag([1.5, -0.5]))


def test_generator_is_commutator_with_minus_h2():
    p = ModelParams(3, 0.1, g=1.0)
    gen = dynamics.markovian_generator(p)
    np.testing.assert_allclose(gen.k, -perturbation.build_h2_closed(p))
    rho = _random_rho(8, 0)
    assert abs(np.trace(gen(rho))) < 1e-15


def test_markovian_matches_exact_unitary():
    p = ModelParams(3, 1.0, g=0.8)
    rho0 = _random_rho(8, 1)
    grid = TimeGrid(0, 20, 2000, 100)
    traj = dynamics.evolve_markovian(rho0, p, grid)
    h2 = perturbation.build_h2_closed(p)
    exact = dynamics.evolve_exact(rho0, h2, grid.sample_times)
    np.testing.assert_allclose(traj.states, exact, atol=1e-10)
    assert traj.max_trace_deviation < 1e-12
    assert traj.min_eigenvalue > -1e-10


def test_step_guard():
    p = ModelParams(3, 1.0, g=0.5)
    with pytest.raises(StepSizeError) as info:
        dynamics.evolve_markovian(_random_rho(8, 2), p, TimeGrid(0, 1e4, 10))
    need = info.value.suggested_n_steps
    grid = TimeGrid(0, 1e4, need)
    assert grid.step * dynamics.markovian_generator(p).norm < dynamics.STABILITY_LIMIT


def test_sw_generator_close_to_closed():
    p = ModelParams(2, 0.1, g=1.0, phonon_cutoff=8)
    a = dynamics.markovian_generator(p, "sw").k
    b = dynamics.markovian_generator(p, "closed").k
    assert np.max(np.abs(a - b)) < 1e-5 * np.max(np.abs(b))


def test_to_schrodinger_roundtrip():
    p = ModelParams(2, 0.1, g=1.0)
    rho0 = _random_rho(4, 3)
    grid = TimeGrid(0, 10, 100, 10)
    traj = dynamics.evolve_markovian(rho0, p, grid)
    hs = models.build_system_hamiltonian(p)
    sch = dynamics.to_schrodinger(traj, hs)
    back = dynamics.to_schrodinger(dynamics.Trajectory(sch.times, sch.states), -hs)
    np.testing.assert_allclose(back.states, traj.states, atol=1e-13)


def test_finite_eta_integrals():
    a, b = dynamics.finite_eta_integrals(2.0, 1e-8)
    assert a == pytest.approx(-0.5j, rel=1e-7)
    assert (a + b).real == pytest.approx(2e-8 / (1e-16 + 4), rel=1e-8)
    with pytest.raises(ValueError):
        dynamics.finite_eta_integrals(1.0, 0.0)


def test_exact_evolution_conserves():
    p = ModelParams(2, 0.1, g=1.5, phonon_cutoff=6)
    h = models.build_split(p).transformed()
    psi0 = dynamics.lf_frame_initial_state(p, analysis.singlet_triplet()[1])
    kets = dynamics.evolve_exact(psi0, h, np.linspace(0, 30, 31))
    np.testing.assert_allclose(np.linalg.norm(kets, axis=1), 1, atol=1e-10)
    energies = np.real(np.einsum("ti,ij,tj->t", kets.conj(), h, kets))
    np.testing.assert_allclose(energies, energies[0], atol=1e-10)
    num = models.total_number_composite(p)
    counts = np.real(np.einsum("ti,ij,tj->t", kets.conj(), num, kets))
    np.testing.assert_allclose(counts, 1.0, atol=1e-10)


def test_exact_ket_and_density_agree():
    rng = np.random.default_rng(4)
    h = rng.normal(size=(6, 6))
    h = h + h.T
    psi = rng.normal(size=6) + 0j
    psi /= np.linalg.norm(psi)
    times = [0.0, 0.7, 2.0]
    kets = dynamics.evolve_exact(psi, h, times)
    rhos = dynamics.evolve_exact(np.outer(psi, psi.conj()), h, times)
    np.testing.assert_allclose(np.einsum("ti,tj->tij", kets, kets.conj()), rhos, atol=1e-12)
    np.testing.assert_allclose(kets[1], scipy.linalg.expm(-0.7j * h) @ psi, atol=1e-12)
    with pytest.raises(ValueError):
        dynamics.evolve_exact(psi, rng.normal(size=(6, 6)), times)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_partial_trace_is_a_state(seed):
    sp = hilbert.CompositeSpace(2, 2)
    rho = _random_rho(sp.dim_total, seed)
    red = dynamics.partial_trace_phonons(rho, sp)
    dynamics.check_density_matrix(red)
    psi = np.linalg.eigh(rho)[1][:, -1]
    np.testing.assert_allclose(dynamics.partial_trace_phonons(psi, sp), red, atol=1e-12)


def test_partial_trace_product_state():
    sp = hilbert.CompositeSpace(2, 1)
    rho_s = _random_rho(4, 5)
    rho_p = _random_rho(4, 6)
    np.testing.assert_allclose(dynamics.partial_trace_phonons(np.kron(rho_p, rho_s), sp), rho_s, atol=1e-14)
    with pytest.raises(ValueError):
        dynamics.partial_trace_phonons(np.eye(5), sp)


def test_first_order_term():
    p = ModelParams(2, 0.1, g=1.0, phonon_cutoff=8)
    assert dynamics.first_order_term_check(p.replace(g=0.0)) == 0.0
    assert dynamics.first_order_term_check(p) < 1e-10
    # site 0 displaced in momentum: <F_01> = exp(-i) instead of 1
    displaced = dynamics.coherent_bath(p.space, [0.5j, 0.0])
    assert dynamics.first_order_term_check(p, displaced) > 1e-3
    uniform = dynamics.coherent_bath(p.space, 0.5)
    assert dynamics.first_order_term_check(p, uniform) < 1e-6


def test_initial_state_conventions():
    p = ModelParams(2, 0.1, g=1.0, phonon_cutoff=8)
    singlet, _ = analysis.singlet_triplet()
    lf = dynamics.lf_frame_initial_state(p, singlet, "lf_vacuum")
    bare = dynamics.lf_frame_initial_state(p, singlet, "bare_vacuum")
    assert np.linalg.norm(bare) == pytest.approx(1.0, abs=1e-10)
    # the bare vacuum seen from the polaron frame is a displaced phonon state
    assert abs(np.vdot(lf, bare)) < 0.9
    with pytest.raises(ValueError):
        dynamics.lf_frame_initial_state(p, singlet, "other")


def test_exact_ripple_trends():
    singlet, triplet = analysis.singlet_triplet()
    psi = (singlet + triplet) / np.sqrt(2)
    times = np.linspace(0, 50, 501)

    def ripple(g, j_star):
        p = ModelParams(2, j_star, g=g, phonon_cutoff=8)
        states = dynamics.exact_reduced_trajectory(p, psi, times)
        mag = np.abs(np.einsum("i,tij,j->t", singlet.conj(), states, triplet))
        return np.ptp(mag)

    assert ripple(2.0, 0.1) < ripple(1.5, 0.1)
    assert ripple(1.5, 0.05) < ripple(1.5, 0.1) < ripple(1.5, 0.2)
