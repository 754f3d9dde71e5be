import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from irhm_polaron import hilbert, models
from irhm_polaron.errors import UnsupportedConfigurationError
from irhm_polaron.models import ModelParams


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(1, 0.1)
    with pytest.raises(ValueError):
        ModelParams(2, 0.0)
    with pytest.raises(ValueError):
        ModelParams(2, 0.1, g=-1)
    with pytest.raises(ValueError):
        ModelParams(2, 0.1, omega=0)
    p = ModelParams(3, 0.2, g=1.5)
    assert p.j == pytest.approx(0.1)
    assert p.strong_coupling and p.non_adiabatic
    assert p.replace(g=0.5).g == 0.5 and p.g == 1.5


def test_two_site_spectrum():
    # singlet at -3J/4, triplet at J/4
    p = ModelParams(2, 0.4)
    vals = np.linalg.eigvalsh(models.build_irhm(p))
    np.testing.assert_allclose(vals, [-0.3, 0.1, 0.1, 0.1], atol=1e-14)


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 5), st.floats(0.05, 2.0), st.floats(0.0, 2.0))
def test_spin_and_hcb_forms_agree(n, j_star, delta):
    p = ModelParams(n, j_star, delta=delta)
    np.testing.assert_allclose(models.build_irhm(p), models.build_irhm_hcb(p), atol=1e-13)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_isotropic_model_is_casimir(n):
    # at Delta = 1, H = (J/2)(S^2 - 3N/4)
    p = ModelParams(n, 0.3)
    _, s2 = hilbert.total_spin(n)
    expected = 0.5 * p.j * (s2 - 0.75 * n * np.eye(2**n))
    np.testing.assert_allclose(models.build_irhm(p), expected, atol=1e-14)


def test_interaction_constant():
    # Delta (n_i - 1/2)(n_j - 1/2) summed over pairs minus Delta sum [n_i n_j - (n_i + n_j)/2]
    p = ModelParams(4, 0.3, delta=0.7)
    _, nums = hilbert.hcb_factor_ops(4)
    alt = sum(nums[i] @ nums[j] - 0.5 * (nums[i] + nums[j]) for i in range(4) for j in range(i + 1, 4))
    diff = p.delta * models.zz_sum(4) - p.delta * alt
    np.testing.assert_allclose(diff, models.interaction_constant(p) / p.j * np.eye(16), atol=1e-14)


def test_total_hamiltonian_forms_and_symmetries():
    p = ModelParams(2, 0.1, g=1.0, phonon_cutoff=3)
    h = models.build_total_hamiltonian(p)
    np.testing.assert_allclose(h, models.build_total_hamiltonian(p, "spin"), atol=1e-13)
    assert hilbert.check_hermitian(h)
    assert hilbert.commutator_norm(h, models.total_number_composite(p)) < 1e-12
    with pytest.raises(UnsupportedConfigurationError):
        models.build_total_hamiltonian(p.replace(phonon_cutoff=0))


def test_generator_is_antihermitian():
    s = models.lf_generator(ModelParams(2, 0.1, g=1.3, phonon_cutoff=3))
    np.testing.assert_allclose(s, -s.conj().T, atol=1e-15)
    assert hilbert.check_unitary(scipy.linalg.expm(s))


def test_displacement_factors_exact_below_cutoff():
    # normal-ordered exponentials: <m|exp(g a^dag) exp(-g a)|n> does not depend on the cutoff
    small = models.displacement_factors(1.2, 4)
    big = models.displacement_factors(1.2, 12)
    for a, b in zip(small, big):
        np.testing.assert_allclose(a, b[:5, :5], atol=1e-12)


def test_dressing_adjoint():
    p = ModelParams(3, 0.1, g=0.8, phonon_cutoff=3)
    f01 = models.dressing_operator(p, 0, 1)
    f10 = models.dressing_operator(p, 1, 0)
    np.testing.assert_allclose(f01.conj().T, f10, atol=1e-13)


def test_interaction_zero_without_coupling():
    p = ModelParams(2, 0.1, g=0.0, phonon_cutoff=2)
    assert np.max(np.abs(models.build_interaction(p))) == 0


def test_split_pieces():
    p = ModelParams(2, 0.1, g=1.0, phonon_cutoff=3)
    split = models.build_split(p)
    for part in (split.h_s, split.h_env, split.h_i, split.h0):
        assert hilbert.check_hermitian(part)
    assert split.polaron_shift == pytest.approx(-0.5)
    assert hilbert.commutator_norm(split.h_s, split.h_env) < 1e-14


def test_split_residual_ladder():
    errs = [models.split_residual(ModelParams(2, 0.1, g=1.0, phonon_cutoff=m)) for m in (4, 6, 8)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-6


def test_split_exact_at_zero_coupling():
    p = ModelParams(2, 0.1, g=0.0, phonon_cutoff=3)
    assert models.split_residual(p) < 1e-15


def test_embedding_indices():
    idx = models.embedding_indices(2, 1, 3)
    small, big = hilbert.CompositeSpace(2, 1), hilbert.CompositeSpace(2, 3)
    for k, flat in enumerate(idx):
        assert big.decode(int(flat)) == small.decode(k)


@pytest.mark.parametrize("n,g", [(2, 0.0), (3, 1.0), (5, 2.0)])
def test_excitation_spectrum(n, g):
    p = ModelParams(n, 0.1, g=g)
    levels = models.hcb_excitation_spectrum(p)
    vals = np.sort(np.linalg.eigvalsh(models.single_particle_hopping_matrix(p)))
    np.testing.assert_allclose(vals[:-1], levels.epsilon_k, atol=1e-15)
    assert vals[-1] == pytest.approx(levels.epsilon_0, abs=1e-15)
    assert levels.gap == pytest.approx(levels.epsilon_0 - levels.epsilon_k)
    assert levels.gap == pytest.approx(0.5 * p.j_star * n / (n - 1) * np.exp(-g * g))
