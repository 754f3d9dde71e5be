"""Zero-temperature Born-Markov dynamics in the polaron frame and the exact joint-evolution oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels, models, perturbation
from .errors import InvalidStateError, OutOfScopeError, StepSizeError
from .hilbert import CompositeSpace
from .models import ModelParams

STABILITY_LIMIT = 0.1


def check_density_matrix(rho: np.ndarray, trace_tol: float = 1e-10, herm_tol: float = 1e-12,
                         pos_tol: float = 1e-8) -> np.ndarray:
    """Return ``rho`` as complex128 after checking trace, Hermiticity and positivity."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got shape {rho.shape}")
    if abs(np.trace(rho) - 1) > trace_tol:
        raise InvalidStateError(f"trace {np.trace(rho)} differs from 1")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise InvalidStateError("density matrix is not Hermitian")
    if np.linalg.eigvalsh(rho).min() < -pos_tol:
        raise InvalidStateError("density matrix has a negative eigenvalue")
    return rho


def pure_state(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    n_steps: int
    sample_stride: int = 1

    def __post_init__(self):
        if self.n_steps < 1 or self.sample_stride < 1:
            raise ValueError("n_steps and sample_stride must be positive")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        if self.n_steps % self.sample_stride:
            raise ValueError("n_steps must be a multiple of sample_stride")

    @property
    def step(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    @property
    def sample_times(self) -> np.ndarray:
        idx = np.arange(0, self.n_steps + 1, self.sample_stride)
        return self.t_start + idx * self.step


@dataclass(frozen=True)
class BathSpec:
    """Bath reference state.  Only T = 0 (phonon vacuum) is supported."""

    temperature: float = 0.0

    def __post_init__(self):
        if self.temperature != 0.0:
            raise OutOfScopeError("finite-temperature baths are outside the supported regime (k_B T / omega << 1)")

    def state(self, space: CompositeSpace) -> np.ndarray:
        vac = np.zeros(space.dim_phonon, dtype=complex)
        vac[0] = 1.0
        return vac


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    max_trace_deviation: float = 0.0
    min_eigenvalue: float = 0.0


@dataclass(frozen=True)
class MarkovianGenerator:
    """``d rho / dt = i [K, rho]`` with ``K = sum_n <0|H_I|n><n|H_I|0> / omega_n = -H^(2)``."""

    k: np.ndarray

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return 1j * (self.k @ rho - rho @ self.k)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.k, 2))


def markovian_generator(params: ModelParams, method: str = "closed", bath: BathSpec | None = None) -> MarkovianGenerator:
    """Zero-temperature TCL2 generator.

    ``method="closed"`` uses the f1/f2 closed form and needs no phonons;
    ``"sw"`` sums over phonon intermediate states (needs ``phonon_cutoff >= 2``).
    The generator is a pure commutator: there is no dissipator.
    """
    bath = bath or BathSpec()
    if method == "closed":
        h2 = perturbation.build_h2_closed(params)
    elif method == "sw":
        h2 = perturbation.build_h2_sw(params)
    else:
        raise ValueError(f"unknown method {method!r}")
    return MarkovianGenerator(-h2)


def evolve_markovian(rho0: np.ndarray, params: ModelParams, grid: TimeGrid,
                     generator: MarkovianGenerator | None = None) -> Trajectory:
    """Interaction-picture RK4 integration of the Markovian master equation."""
    rho0 = check_density_matrix(rho0)
    gen = generator or markovian_generator(params)
    if gen.k.shape != rho0.shape:
        raise ValueError(f"generator shape {gen.k.shape} does not match state shape {rho0.shape}")
    h = grid.step
    if h * gen.norm >= STABILITY_LIMIT:
        need = int(np.ceil((grid.t_end - grid.t_start) * gen.norm / STABILITY_LIMIT)) + 1
        need = -(-need // grid.sample_stride) * grid.sample_stride
        raise StepSizeError(f"step {h:g} times ||K|| = {h * gen.norm:g} >= {STABILITY_LIMIT}; use n_steps >= {need}", need)
    samples, trace_dev = _kernels.rk4_commutator(gen.k, rho0, h, grid.n_steps, grid.sample_stride)
    min_eig = min(float(np.linalg.eigvalsh(s).min()) for s in samples)
    if trace_dev > 1e-10:
        raise InvalidStateError(f"trace drifted by {trace_dev:g}")
    if min_eig < -1e-8:
        raise InvalidStateError(f"positivity lost: min eigenvalue {min_eig:g}")
    return Trajectory(grid.sample_times, samples, trace_dev, min_eig)


def to_schrodinger(traj: Trajectory, h_s: np.ndarray) -> Trajectory:
    """Undo the interaction picture: ``rho(t) = exp(-i H_s t) rho~(t) exp(i H_s t)``."""
    evals, vecs = np.linalg.eigh(h_s)
    out = np.empty_like(traj.states)
    for n, (t, rho) in enumerate(zip(traj.times, traj.states)):
        u = (vecs * np.exp(-1j * evals * t)) @ vecs.conj().T
        out[n] = u @ rho @ u.conj().T
    return Trajectory(traj.times, out, traj.max_trace_deviation, traj.min_eigenvalue)


def finite_eta_integrals(omega_n: float, eta: float) -> tuple[complex, complex]:
    """``(int_0^inf e^{-i(w - i eta) t} dt, int_0^inf e^{i(w + i eta) t} dt) = (1/(eta + i w), 1/(eta - i w))``."""
    if not omega_n > 0 or not eta > 0:
        raise ValueError("omega_n and eta must be positive")
    return 1.0 / (eta + 1j * omega_n), 1.0 / (eta - 1j * omega_n)


def evolve_exact(state0: np.ndarray, h: np.ndarray, times) -> np.ndarray:
    """Exact evolution under Hermitian ``h`` by one spectral decomposition.

    ``state0`` is a ket (1-D) or a density matrix (2-D); returns the stacked
    states at ``times``.
    """
    h = np.asarray(h)
    if np.max(np.abs(h - h.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(h))):
        raise ValueError("evolve_exact needs a Hermitian generator")
    evals, vecs = np.linalg.eigh(h)
    times = np.asarray(times, dtype=float)
    state0 = np.asarray(state0, dtype=complex)
    if state0.ndim == 1:
        coeff = vecs.conj().T @ state0
        phases = np.exp(-1j * np.outer(times, evals))
        return (phases * coeff) @ vecs.T
    rho_e = vecs.conj().T @ state0 @ vecs
    out = np.empty((times.size,) + state0.shape, dtype=complex)
    for n, t in enumerate(times):
        ph = np.exp(-1j * evals * t)
        out[n] = vecs @ (ph[:, None] * rho_e * ph.conj()[None, :]) @ vecs.conj().T
    return out


def partial_trace_phonons(joint: np.ndarray, space: CompositeSpace, ket: bool | None = None) -> np.ndarray:
    """Trace out the phonon factor of a joint ket or density matrix (or a stack of them).

    A 1-D input is a ket; for stacked kets pass ``ket=True``.
    """
    joint = np.asarray(joint)
    dp, ds = space.dim_phonon, space.dim_spin
    if joint.shape[-1] != space.dim_total:
        raise ValueError(f"state dimension {joint.shape[-1]} does not match the space ({space.dim_total})")
    if ket is None:
        ket = joint.ndim == 1
    if ket:
        psi = joint.reshape(joint.shape[:-1] + (dp, ds))
        return np.einsum("...ai,...aj->...ij", psi, psi.conj())
    rho = joint.reshape(joint.shape[:-2] + (dp, ds, dp, ds))
    return np.einsum("...aiaj->...ij", rho)


def coherent_bath(space: CompositeSpace, alpha) -> np.ndarray:
    """Normalized product of truncated coherent states.

    ``alpha`` is one complex amplitude for every site or a sequence with one per
    site.  A uniform real displacement leaves ``<H_I>`` at zero (the gain and
    loss factors cancel), so a useful negative control displaces sites
    differently with an imaginary part.
    """
    amps = np.broadcast_to(np.asarray(alpha, dtype=complex), (space.n_sites,))
    vec = np.array([1.0 + 0j])
    for a in amps:
        local = np.array([a**k / math.sqrt(math.factorial(k)) for k in range(space.local_phonon_dim)])
        vec = np.kron(local / np.linalg.norm(local), vec)
    return vec


def first_order_term_check(params: ModelParams, bath: np.ndarray | None = None) -> float:
    """``||Tr_R[H_I R]||_F`` with ``R = |phi><phi|``; ``phi`` defaults to the phonon vacuum."""
    if params.phonon_cutoff < 2:
        raise perturbation.InsufficientCutoffError("first-order check needs phonon_cutoff >= 2")
    if params.g == 0:
        return 0.0
    amp = perturbation.VacuumAmplitudes(params)
    phi = BathSpec().state(params.space) if bath is None else bath
    return float(np.linalg.norm(amp.expectation(phi)))


def lf_frame_initial_state(params: ModelParams, system_ket: np.ndarray, convention: str = "lf_vacuum") -> np.ndarray:
    """Joint LF-frame ket for a system state.

    ``"lf_vacuum"``: ``|psi> ⊗ |0>`` in the polaron frame (dressed state in the
    original frame).  ``"bare_vacuum"``: ``|psi> ⊗ |0>`` prepared in the original
    frame, i.e. ``exp(S)(|psi> ⊗ |0>)`` in the polaron frame.
    """
    sp = params.space
    vac = np.zeros(sp.dim_phonon, dtype=complex)
    vac[0] = 1.0
    ket = np.kron(vac, np.asarray(system_ket, dtype=complex))
    if convention == "lf_vacuum":
        return ket
    if convention == "bare_vacuum":
        return scipy.linalg.expm(models.lf_generator(params)) @ ket
    raise ValueError(f"unknown convention {convention!r}")


def exact_reduced_trajectory(params: ModelParams, system_ket: np.ndarray, times,
                             convention: str = "lf_vacuum", split: models.HamiltonianSplit | None = None) -> np.ndarray:
    """Reduced LF-frame system states under the full polaron-frame Hamiltonian."""
    split = split or models.build_split(params)
    psi0 = lf_frame_initial_state(params, system_ket, convention)
    kets = evolve_exact(psi0, split.transformed(), times)
    return partial_trace_phonons(kets, params.space, ket=True)
