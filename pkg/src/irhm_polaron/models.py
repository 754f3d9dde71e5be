"""Physical Hamiltonians, the Lang-Firsov frame and the H0 / H_I split."""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
import scipy.linalg

from . import hilbert
from .errors import UnsupportedConfigurationError
from .hilbert import CompositeSpace


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters; energies in units of ``omega`` (default 1).

    The pair exchange ``J = j_star / (N - 1)`` is derived, never stored.
    """

    n_sites: int
    j_star: float
    delta: float = 1.0
    g: float = 0.0
    omega: float = 1.0
    phonon_cutoff: int = 0

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError(f"n_sites must be >= 2, got {self.n_sites}")
        if not self.j_star > 0:
            raise ValueError(f"j_star must be positive, got {self.j_star}")
        if self.delta < 0:
            raise ValueError(f"delta must be non-negative, got {self.delta}")
        if self.g < 0:
            raise ValueError(f"g must be non-negative, got {self.g}")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.phonon_cutoff < 0:
            raise ValueError(f"phonon_cutoff must be non-negative, got {self.phonon_cutoff}")

    @property
    def j(self) -> float:
        return self.j_star / (self.n_sites - 1)

    @property
    def strong_coupling(self) -> bool:
        return self.g > 1

    @property
    def non_adiabatic(self) -> bool:
        return self.j_star / self.omega <= 1

    @property
    def space(self) -> CompositeSpace:
        return CompositeSpace(self.n_sites, self.phonon_cutoff)

    @property
    def polaron_hopping(self) -> float:
        """Renormalized pair hopping amplitude ``0.5 J exp(-g^2)``."""
        return 0.5 * self.j * np.exp(-self.g**2)

    @property
    def polaron_shift(self) -> float:
        """c-number ``-N g^2 omega / 4`` produced by the LF transform (``(n - 1/2)^2 = 1/4``)."""
        return -self.n_sites * self.g**2 * self.omega / 4

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "j_star": self.j_star,
            "delta": self.delta,
            "g": self.g,
            "omega": self.omega,
            "phonon_cutoff": self.phonon_cutoff,
        }


def _require_phonons(params: ModelParams):
    if params.phonon_cutoff < 1:
        raise UnsupportedConfigurationError("this construction needs phonon_cutoff >= 1")


# ---------------------------------------------------------------------------
# spin factor
# ---------------------------------------------------------------------------

def hop_operator(n_sites: int, i: int, j: int) -> np.ndarray:
    """``b_i^dagger b_j`` on the spin factor."""
    lows, _ = hilbert.hcb_factor_ops(n_sites)
    return lows[i].conj().T @ lows[j]


def hopping_sum(n_sites: int) -> np.ndarray:
    """``sum_{i<j} (b_i^dagger b_j + H.c.)``."""
    lows, _ = hilbert.hcb_factor_ops(n_sites)
    out = np.zeros((2**n_sites,) * 2, dtype=complex)
    for i in range(n_sites):
        for j in range(i + 1, n_sites):
            t = lows[i].conj().T @ lows[j]
            out += t + t.conj().T
    return out


def zz_sum(n_sites: int) -> np.ndarray:
    """``sum_{i<j} (n_i - 1/2)(n_j - 1/2)``, diagonal."""
    occ = (np.arange(2**n_sites)[:, None] >> np.arange(n_sites)) & 1
    sz = occ - 0.5
    tot = sz.sum(axis=1)
    return np.diag(0.5 * (tot**2 - (sz**2).sum(axis=1))).astype(complex)


def build_irhm(params: ModelParams) -> np.ndarray:
    """``J sum_{i<j} [S_i.S_j + (Delta - 1) S^z_i S^z_j]`` on the 2^N spin factor."""
    n = params.n_sites
    sx, sy, sz = hilbert.spin_components(n)
    out = np.zeros((2**n,) * 2, dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            out += sx[i] @ sx[j] + sy[i] @ sy[j] + params.delta * (sz[i] @ sz[j])
    return params.j * out


def build_irhm_hcb(params: ModelParams) -> np.ndarray:
    """The same model written with hard-core bosons, keeping the (n - 1/2)(n - 1/2) form."""
    return params.j * (0.5 * hopping_sum(params.n_sites) + params.delta * zz_sum(params.n_sites))


def interaction_constant(params: ModelParams) -> float:
    """Constant separating ``Delta (n_i - 1/2)(n_j - 1/2)`` from ``Delta (n_i n_j - (n_i + n_j)/2)``."""
    n = params.n_sites
    return params.delta * params.j * n * (n - 1) / 8


# ---------------------------------------------------------------------------
# composite space
# ---------------------------------------------------------------------------

def _phonon_sums(params: ModelParams):
    """(sum_j a_j^dagger a_j, [a_j]) on the phonon factor."""
    n, m = params.n_sites, params.phonon_cutoff
    a = hilbert.truncated_lowering(m)
    lows = [hilbert.site_operator(a, i, n) for i in range(n)]
    occ = params.space.phonon_occupations().sum(axis=1)
    return np.diag(occ.astype(complex)), lows


def build_total_hamiltonian(params: ModelParams, form: str = "hcb") -> np.ndarray:
    """Spin-phonon Hamiltonian on the composite space in the original frame.

    ``form="hcb"`` uses ``g omega (n_j - 1/2)(a_j + a_j^dagger)``; ``form="spin"``
    uses ``g omega S^z_j (a_j + a_j^dagger)`` with the spin-form IRHM.  The two
    coincide as matrices because the (n - 1/2)(n - 1/2) constant is kept.
    """
    _require_phonons(params)
    sp = params.space
    if form == "hcb":
        h_sys = build_irhm_hcb(params)
        _, nums = hilbert.hcb_factor_ops(params.n_sites)
        dens = [nk - 0.5 * np.eye(sp.dim_spin) for nk in nums]
    elif form == "spin":
        h_sys = build_irhm(params)
        dens = hilbert.spin_components(params.n_sites)[2]
    else:
        raise ValueError(f"unknown form {form!r}")
    n_ph, a_ops = _phonon_sums(params)
    h = hilbert.spin_to_composite(h_sys, sp) + params.omega * hilbert.phonon_to_composite(n_ph, sp)
    for dj, aj in zip(dens, a_ops):
        h += params.g * params.omega * np.kron(aj + aj.conj().T, dj)
    return h


def total_number_composite(params: ModelParams) -> np.ndarray:
    return hilbert.spin_to_composite(hilbert.total_number(params.n_sites), params.space)


def lf_generator(params: ModelParams) -> np.ndarray:
    """Anti-Hermitian ``S = -g sum_i (n_i - 1/2)(a_i - a_i^dagger)``."""
    _require_phonons(params)
    sp = params.space
    _, nums = hilbert.hcb_factor_ops(params.n_sites)
    _, a_ops = _phonon_sums(params)
    s = np.zeros((sp.dim_total,) * 2, dtype=complex)
    for nk, ak in zip(nums, a_ops):
        s -= params.g * np.kron(ak - ak.conj().T, nk - 0.5 * np.eye(sp.dim_spin))
    return s


def lf_transform(h: np.ndarray, s: np.ndarray) -> np.ndarray:
    """``exp(S) H exp(-S)`` by dense matrix exponential."""
    if h.shape != s.shape:
        raise ValueError(f"shape mismatch: {h.shape} vs {s.shape}")
    u = scipy.linalg.expm(s)
    return u @ h @ scipy.linalg.expm(-s)


def displacement_factors(g: float, cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """Local factors of ``S_+^{ij dagger} S_-^{ij}`` with ``S_pm = exp[pm g (a_i - a_j)]``.

    Returns ``(exp(g a^dag) exp(-g a), exp(-g a^dag) exp(g a))``: the factor on the
    site receiving the boson and the factor on the site it leaves.  Both are
    built from matrix exponentials of the truncated ladder operator; because the
    exponentials are normal ordered, their matrix elements below the cutoff are
    exact.
    """
    a = hilbert.truncated_lowering(cutoff)
    ad = a.conj().T
    gain = scipy.linalg.expm(g * ad) @ scipy.linalg.expm(-g * a)
    lose = scipy.linalg.expm(-g * ad) @ scipy.linalg.expm(g * a)
    return gain, lose


def dressing_operator(params: ModelParams, i: int, j: int) -> np.ndarray:
    """``S_+^{ij dagger} S_-^{ij}`` on the phonon factor."""
    gain, lose = displacement_factors(params.g, params.phonon_cutoff)
    n = params.n_sites
    return hilbert.site_operator(gain, i, n) @ hilbert.site_operator(lose, j, n)


@dataclass(frozen=True)
class HamiltonianSplit:
    """Original-frame ``h_total`` and the LF-frame pieces ``h0 = h_s + h_env`` and ``h_i``.

    The LF-frame Hamiltonian is ``h_s + h_env + h_i + polaron_shift * I``.
    """

    params: ModelParams
    h_total: np.ndarray
    h_s: np.ndarray
    h_env: np.ndarray
    h_i: np.ndarray
    polaron_shift: float

    @cached_property
    def h0(self) -> np.ndarray:
        return self.h_s + self.h_env

    def transformed(self) -> np.ndarray:
        return self.h_s + self.h_env + self.h_i + self.polaron_shift * np.eye(self.h_s.shape[0])


def build_system_hamiltonian(params: ModelParams) -> np.ndarray:
    """Polaron-frame system Hamiltonian on the spin factor (hopping scaled by exp(-g^2))."""
    j = params.j
    return j * (0.5 * np.exp(-params.g**2) * hopping_sum(params.n_sites) + params.delta * zz_sum(params.n_sites))


def build_interaction(params: ModelParams) -> np.ndarray:
    """``H_I = sum_{i != j} 0.5 J e^{-g^2} b_i^dag b_j (S_+^{ij dag} S_-^{ij} - 1)`` on the composite space."""
    _require_phonons(params)
    sp = params.space
    c = params.polaron_hopping
    eye_ph = np.eye(sp.dim_phonon)
    out = np.zeros((sp.dim_total,) * 2, dtype=complex)
    for i in range(params.n_sites):
        for j in range(params.n_sites):
            if i != j:
                out += c * np.kron(dressing_operator(params, i, j) - eye_ph, hop_operator(params.n_sites, i, j))
    return out


def build_split(params: ModelParams) -> HamiltonianSplit:
    _require_phonons(params)
    sp = params.space
    n_ph, _ = _phonon_sums(params)
    return HamiltonianSplit(
        params=params,
        h_total=build_total_hamiltonian(params),
        h_s=hilbert.spin_to_composite(build_system_hamiltonian(params), sp),
        h_env=params.omega * hilbert.phonon_to_composite(n_ph, sp),
        h_i=build_interaction(params),
        polaron_shift=params.polaron_shift,
    )


def embedding_indices(n_sites: int, cutoff: int, work_cutoff: int) -> np.ndarray:
    """Flat indices of the cutoff-``cutoff`` composite basis inside the ``work_cutoff`` one."""
    small = CompositeSpace(n_sites, cutoff)
    occ = small.phonon_occupations()
    big_ph = (occ * (work_cutoff + 1) ** np.arange(n_sites)).sum(axis=1)
    ds = small.dim_spin
    return (big_ph[:, None] * ds + np.arange(ds)[None, :]).ravel()


def lf_transform_projected(params: ModelParams, work_cutoff: int | None = None) -> np.ndarray:
    """Matrix elements of ``exp(S) H_T exp(-S)`` between states with occupations <= M.

    The transform is carried out at ``work_cutoff`` (default ``2M``) and projected
    back, which moves the Fock-ceiling artefacts of the truncated exponential
    away from the retained block.
    """
    _require_phonons(params)
    work = 2 * params.phonon_cutoff if work_cutoff is None else int(work_cutoff)
    if work < params.phonon_cutoff:
        raise ValueError("work_cutoff must be >= phonon_cutoff")
    big = params.replace(phonon_cutoff=work)
    ht = lf_transform(build_total_hamiltonian(big), lf_generator(big))
    idx = embedding_indices(params.n_sites, params.phonon_cutoff, work)
    return ht[np.ix_(idx, idx)]


def split_residual(params: ModelParams, work_cutoff: int | None = None) -> float:
    """``||(H_s + H_env + H_I + shift) - exp(S) H_T exp(-S)||_F / ||H_T||_F`` on the cutoff-M space."""
    split = build_split(params)
    ref = lf_transform_projected(params, work_cutoff)
    return float(np.linalg.norm(split.transformed() - ref) / np.linalg.norm(split.h_total))


@dataclass(frozen=True)
class ExcitationSpectrum:
    epsilon_0: float
    epsilon_k: float
    gap: float


def hcb_excitation_spectrum(params: ModelParams) -> ExcitationSpectrum:
    """Single-particle energies of the polaron-frame hopping term.

    ``k = 0`` sits at ``0.5 J* N/(N-1) e^{-g^2} - 0.5 J e^{-g^2}`` and the N-1
    states with ``k != 0`` at ``-0.5 J e^{-g^2}``.
    """
    n = params.n_sites
    red = np.exp(-params.g**2)
    gap = 0.5 * params.j_star * (n / (n - 1)) * red
    eps_k = -0.5 * params.j * red
    return ExcitationSpectrum(epsilon_0=gap + eps_k, epsilon_k=eps_k, gap=gap)


def single_particle_hopping_matrix(params: ModelParams) -> np.ndarray:
    n = params.n_sites
    return params.polaron_hopping * (np.ones((n, n)) - np.eye(n))
