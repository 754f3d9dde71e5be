"""Quantum-number labelled IRHM eigenbasis, coherence series and the two-qubit polaron example."""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.linalg

from . import hilbert, models
from .dynamics import partial_trace_phonons
from .errors import SamplingError
from .models import ModelParams

MAX_SITES = 6


@dataclass(frozen=True)
class EigenLabel:
    energy: float
    sz_total: float
    s_total: float
    multiplet_index: int

    def to_dict(self) -> dict:
        return {
            "energy": self.energy,
            "sz_total": self.sz_total,
            "s_total": self.s_total,
            "multiplet_index": self.multiplet_index,
        }


def _spin_from_casimir(value: float) -> float:
    # S(S+1) = value  ->  S rounded to the nearest half-integer
    s = 0.5 * (-1.0 + np.sqrt(1.0 + 4.0 * max(value, 0.0)))
    return round(2 * s) / 2


def _clusters(values: np.ndarray, tol: float) -> list[np.ndarray]:
    order = np.argsort(values, kind="stable")
    groups, current = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if values[b] - values[a] > tol:
            groups.append(np.array(current))
            current = []
        current.append(b)
    groups.append(np.array(current))
    return groups


def _canonical_basis(block: np.ndarray, sector: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of span(block): project sector basis states in index order and orthogonalize."""
    proj = block @ block.conj().T
    vecs: list[np.ndarray] = []
    for k in range(sector.size):
        v = proj[:, k].copy()
        for w in vecs:
            v -= (w.conj() @ v) * w
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            vecs.append(v / norm)
        if len(vecs) == block.shape[1]:
            break
    return np.stack(vecs, axis=1)


def irhm_eigenbasis(params: ModelParams, max_sites: int = MAX_SITES) -> list[tuple[EigenLabel, np.ndarray]]:
    """Simultaneous eigenbasis of ``H_IRHM``, ``S^z_total`` and ``S^2_total``.

    Each S^z sector is diagonalized in S^2, each S block in H; inside a
    degenerate block the vectors are fixed by orthogonalizing the projections of
    the occupation basis states in index order.  Ordering: energy, S^z, S,
    multiplet index.
    """
    n = params.n_sites
    if n > max_sites:
        raise ValueError(f"n_sites={n} exceeds the configured maximum {max_sites}")
    h = models.build_irhm(params)
    _, s2 = hilbert.total_spin(n)
    occ = (np.arange(2**n)[:, None] >> np.arange(n)) & 1
    counts = occ.sum(axis=1)
    scale = max(1.0, float(np.max(np.abs(h))))
    out = []
    for p in range(n + 1):
        sector = np.flatnonzero(counts == p)
        sz = p - n / 2
        s2_vals, s2_vecs = np.linalg.eigh(s2[np.ix_(sector, sector)])
        for s_group in _clusters(s2_vals, 1e-8):
            s_val = _spin_from_casimir(float(np.mean(s2_vals[s_group])))
            sub = s2_vecs[:, s_group]
            e_vals, e_vecs = np.linalg.eigh(sub.conj().T @ h[np.ix_(sector, sector)] @ sub)
            for e_group in _clusters(e_vals, 1e-9 * scale):
                block = _canonical_basis(sub @ e_vecs[:, e_group], sector)
                energy = float(np.mean(e_vals[e_group]))
                for idx in range(block.shape[1]):
                    vec = np.zeros(2**n, dtype=complex)
                    vec[sector] = block[:, idx]
                    out.append((EigenLabel(energy, sz, s_val, idx), vec))
    out.sort(key=lambda item: (round(item[0].energy / scale, 9), item[0].sz_total, item[0].s_total, item[0].multiplet_index))
    return out


def basis_matrix(basis) -> np.ndarray:
    return np.stack([vec for _, vec in basis], axis=1)


def multiplet_count(n_sites: int, s_total: float) -> int:
    """Number of spin-S multiplets of N spin-1/2 (the ballot / Catalan-triangle numbers)."""
    k = n_sites / 2 - s_total
    if k < 0 or k != int(k):
        return 0
    k = int(k)
    return comb(n_sites, k) - (comb(n_sites, k - 1) if k >= 1 else 0)


@dataclass(frozen=True)
class CoherenceSeries:
    pair: tuple[EigenLabel, EigenLabel]
    times: np.ndarray
    magnitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        if not (len(self.times) == len(self.magnitudes) == len(self.phases)):
            raise ValueError("times, magnitudes and phases must have equal length")


def coherence_profile(trajectory, basis, pair: tuple[int, int]) -> CoherenceSeries:
    """``|<n|rho(t)|m>|`` and its nearest-branch unwrapped phase at every sample.

    ``trajectory`` is a :class:`~irhm_polaron.dynamics.Trajectory` or a
    ``(times, states)`` tuple; ``basis`` comes from :func:`irhm_eigenbasis`.
    """
    times, states = (trajectory.times, trajectory.states) if hasattr(trajectory, "states") else trajectory
    n, m = pair
    if not (0 <= n < len(basis) and 0 <= m < len(basis)):
        raise ValueError(f"pair {pair} out of range for a basis of size {len(basis)}")
    vn, vm = basis[n][1], basis[m][1]
    elems = np.einsum("i,tij,j->t", vn.conj(), np.asarray(states), vm)
    return CoherenceSeries(
        pair=(basis[n][0], basis[m][0]),
        times=np.asarray(times, dtype=float),
        magnitudes=np.abs(elems),
        phases=np.unwrap(np.angle(elems)),
    )


def phase_residual(series: CoherenceSeries, predicted_gap: float) -> float:
    """Largest ``|phi(t) - phi(0) + gap (t - t0)|`` over the samples.

    Raises :class:`SamplingError` when the predicted phase advance between two
    samples reaches pi, where nearest-branch unwrapping is ambiguous.
    """
    if len(series.times) == 0:
        raise ValueError("empty series")
    dt = np.diff(series.times)
    if dt.size and np.max(np.abs(predicted_gap * dt)) >= np.pi:
        raise SamplingError("phase advance per sample >= pi; sample more densely")
    t = series.times - series.times[0]
    resid = series.phases - series.phases[0] + predicted_gap * t
    return float(np.max(np.abs(resid)))


# ---------------------------------------------------------------------------
# two-qubit example (N = 2)
# ---------------------------------------------------------------------------

def singlet_triplet() -> tuple[np.ndarray, np.ndarray]:
    """``(|10> - |01>)/sqrt 2`` and ``(|10> + |01>)/sqrt 2`` with ``|10>`` = boson on site 0."""
    e10 = np.zeros(4, dtype=complex)
    e01 = np.zeros(4, dtype=complex)
    e10[0b01] = 1.0
    e01[0b10] = 1.0
    return (e10 - e01) / np.sqrt(2), (e10 + e01) / np.sqrt(2)


def polaron_displacement(params: ModelParams) -> np.ndarray:
    """Local ``X = exp[(g/2)(a - a^dag)]`` on the truncated Fock space."""
    a = hilbert.truncated_lowering(params.phonon_cutoff)
    return scipy.linalg.expm(0.5 * params.g * (a - a.conj().T))


def dressing_product(params: ModelParams) -> np.ndarray:
    """``prod_i [n_i X_i + (1 - n_i) X_i^dag]`` on the composite space."""
    n = params.n_sites
    x = polaron_displacement(params)
    xs = [hilbert.site_operator(x, i, n) for i in range(n)]
    _, nums = hilbert.hcb_factor_ops(n)
    eye_s = np.eye(2**n)
    out = np.eye(params.space.dim_total, dtype=complex)
    for xi, ni in zip(xs, nums):
        out = out @ (np.kron(xi, ni) + np.kron(xi.conj().T, eye_s - ni))
    return out


def two_qubit_polaron_element(params: ModelParams, rho_joint: np.ndarray) -> complex:
    """Singlet-triplet element of the polaron-frame reduced state, from the original-frame ``rho_joint``.

    Evaluated as a sum over phonon occupations ``(m1, m2)`` of dressed
    singlet / triplet vectors ``X_1 X_2^dag |10> -/+ X_2 X_1^dag |01>``.
    """
    if params.n_sites != 2:
        raise ValueError("the two-qubit element needs n_sites == 2")
    x = polaron_displacement(params)
    x1 = hilbert.site_operator(x, 0, 2)
    x2 = hilbert.site_operator(x, 1, 2)
    a = x1 @ x2.conj().T
    b = x2 @ x1.conj().T
    e10 = np.zeros((4, 1), dtype=complex)
    e01 = np.zeros((4, 1), dtype=complex)
    e10[0b01, 0] = 1.0
    e01[0b10, 0] = 1.0
    plus = np.kron(a, e10) + np.kron(b, e01)
    minus = np.kron(a, e10) - np.kron(b, e01)
    return complex(0.5 * np.trace(minus.conj().T @ np.asarray(rho_joint) @ plus))


def lf_frame_element(params: ModelParams, rho_joint: np.ndarray) -> complex:
    """Same element via ``Tr_ph[exp(S) rho exp(-S)]`` and the bare singlet / triplet vectors."""
    if params.n_sites != 2:
        raise ValueError("the two-qubit element needs n_sites == 2")
    u = scipy.linalg.expm(models.lf_generator(params))
    rho_s = partial_trace_phonons(u @ np.asarray(rho_joint) @ u.conj().T, params.space)
    singlet, triplet = singlet_triplet()
    return complex(singlet.conj() @ rho_s @ triplet)
