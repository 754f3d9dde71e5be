"""Bases and elementary operators for spins / hard-core bosons and truncated phonons.

Basis convention
----------------
The composite space is ``phonon ⊗ spin`` with the spin index running fastest::

    flat = spin_index + 2**N * phonon_index
    spin_index   = sum_i n_i * 2**i           (n_i in {0, 1})
    phonon_index = sum_i m_i * (M + 1)**i     (m_i in [0, M])

so site 0 is least significant inside each factor.  In Kronecker form an
operator ``P ⊗ S`` is ``np.kron(P, S)`` and a single-site operator on site
``i`` of an N-site factor is ``kron(o_{N-1}, ..., o_1, o_0)``.

Operators are plain ``complex128`` ndarrays.  Hermiticity and unitarity are
never assumed; use :func:`check_hermitian` / :func:`check_unitary`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import UnsupportedConfigurationError

HCB_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
# |0> = empty = spin down, |1> = occupied = spin up
SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)


@dataclass(frozen=True)
class BasisIndex:
    spin_bits: tuple[int, ...]
    phonon_occ: tuple[int, ...]


@dataclass(frozen=True)
class CompositeSpace:
    """N sites of spin-1/2 (HCB) times per-site Fock spaces truncated at ``phonon_cutoff``.

    ``phonon_cutoff == 0`` means no phonon factor (dim_phonon == 1).
    """

    n_sites: int
    phonon_cutoff: int = 0

    def __post_init__(self):
        if int(self.n_sites) < 1:
            raise ValueError(f"n_sites must be positive, got {self.n_sites}")
        if int(self.phonon_cutoff) < 0:
            raise ValueError(f"phonon_cutoff must be non-negative, got {self.phonon_cutoff}")

    @property
    def local_phonon_dim(self) -> int:
        return self.phonon_cutoff + 1

    @property
    def dim_spin(self) -> int:
        return 2 ** self.n_sites

    @property
    def dim_phonon(self) -> int:
        return self.local_phonon_dim ** self.n_sites

    @property
    def dim_total(self) -> int:
        return self.dim_spin * self.dim_phonon

    def check_site(self, site: int) -> int:
        if not 0 <= site < self.n_sites:
            raise ValueError(f"site {site} out of range for N={self.n_sites}")
        return int(site)

    def encode(self, index: BasisIndex) -> int:
        if len(index.spin_bits) != self.n_sites or len(index.phonon_occ) != self.n_sites:
            raise ValueError("basis index length does not match n_sites")
        spin = 0
        phon = 0
        base = self.local_phonon_dim
        for i in range(self.n_sites - 1, -1, -1):
            bit, occ = index.spin_bits[i], index.phonon_occ[i]
            if bit not in (0, 1) or not 0 <= occ <= self.phonon_cutoff:
                raise ValueError(f"invalid occupation at site {i}: {bit}, {occ}")
            spin = 2 * spin + bit
            phon = base * phon + occ
        return spin + self.dim_spin * phon

    def decode(self, flat: int) -> BasisIndex:
        if not 0 <= flat < self.dim_total:
            raise ValueError(f"flat index {flat} out of range")
        spin, phon = flat % self.dim_spin, flat // self.dim_spin
        base = self.local_phonon_dim
        bits = tuple((spin >> i) & 1 for i in range(self.n_sites))
        occ = tuple((phon // base**i) % base for i in range(self.n_sites))
        return BasisIndex(bits, occ)

    def phonon_occupations(self) -> np.ndarray:
        """(dim_phonon, N) array of per-site occupations of every phonon basis state."""
        idx = np.arange(self.dim_phonon)
        base = self.local_phonon_dim
        return np.stack([(idx // base**i) % base for i in range(self.n_sites)], axis=1)

    def spin_occupations(self) -> np.ndarray:
        idx = np.arange(self.dim_spin)
        return np.stack([(idx >> i) & 1 for i in range(self.n_sites)], axis=1)


def truncated_lowering(cutoff: int) -> np.ndarray:
    """Single-mode ``a`` on ``{|0>, ..., |cutoff>}``; the transition out of ``|cutoff>`` is dropped."""
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1).astype(complex)


def site_operator(local: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Embed a single-site operator into one N-site tensor factor."""
    eye = np.eye(local.shape[0], dtype=complex)
    factors = [local if k == site else eye for k in range(n_sites)]
    return reduce(np.kron, reversed(factors))


def _factor_ops(ops, n_sites, local_dim, kind):
    placed = {}
    for site, local in ops:
        local = np.asarray(local, dtype=complex)
        if not 0 <= site < n_sites:
            raise ValueError(f"site {site} out of range for N={n_sites}")
        if site in placed:
            raise ValueError(f"site {site} appears twice in the {kind} factor")
        if local.shape != (local_dim, local_dim):
            raise ValueError(
                f"{kind} operator at site {site} has shape {local.shape}, expected ({local_dim}, {local_dim})"
            )
        placed[site] = local
    eye = np.eye(local_dim, dtype=complex)
    return reduce(np.kron, [placed.get(k, eye) for k in reversed(range(n_sites))])


def embed_product(ops, space: CompositeSpace) -> np.ndarray:
    """Kronecker-embed a product of single-site operators into the composite space.

    Each entry of ``ops`` is ``(site, local)`` for the spin factor or
    ``(site, local, "phonon")`` for the phonon factor.  Unlisted sites carry
    the identity, so ``embed_product([], space)`` is the identity.
    """
    spin_ops, phon_ops = [], []
    for op in ops:
        if len(op) == 2:
            spin_ops.append(op)
        elif len(op) == 3 and op[2] in ("spin", "phonon"):
            (spin_ops if op[2] == "spin" else phon_ops).append(op[:2])
        else:
            raise ValueError(f"malformed operator entry {op!r}")
    spin = _factor_ops(spin_ops, space.n_sites, 2, "spin")
    phon = _factor_ops(phon_ops, space.n_sites, space.local_phonon_dim, "phonon")
    return np.kron(phon, spin)


def spin_to_composite(op: np.ndarray, space: CompositeSpace) -> np.ndarray:
    return np.kron(np.eye(space.dim_phonon, dtype=complex), op)


def phonon_to_composite(op: np.ndarray, space: CompositeSpace) -> np.ndarray:
    return np.kron(op, np.eye(space.dim_spin, dtype=complex))


def hcb_lowering(space: CompositeSpace, site: int) -> np.ndarray:
    """``b_site`` on the composite space (identity on the phonon factor)."""
    space.check_site(site)
    return embed_product([(site, HCB_LOWER)], space)


def phonon_lowering(space: CompositeSpace, site: int) -> np.ndarray:
    """``a_site`` on the composite space with ``<m-1|a|m> = sqrt(m)`` up to the cutoff."""
    if space.phonon_cutoff < 1:
        raise UnsupportedConfigurationError("phonon operators need phonon_cutoff >= 1")
    space.check_site(site)
    return embed_product([(site, truncated_lowering(space.phonon_cutoff), "phonon")], space)


def hcb_factor_ops(n_sites: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Lowering operators and number operators on the bare 2^N spin factor."""
    lows = [site_operator(HCB_LOWER, i, n_sites) for i in range(n_sites)]
    nums = [b.conj().T @ b for b in lows]
    return lows, nums


def total_number(n_sites: int) -> np.ndarray:
    occ = (np.arange(2**n_sites)[:, None] >> np.arange(n_sites)) & 1
    return np.diag(occ.sum(axis=1).astype(complex))


def spin_components(n_sites: int) -> tuple[list[np.ndarray], list[np.ndarray], list[np.ndarray]]:
    """Per-site (S^x, S^y, S^z) on the spin factor, with S = sigma / 2."""
    sx = [site_operator(SIGMA_X / 2, i, n_sites) for i in range(n_sites)]
    sy = [site_operator(SIGMA_Y / 2, i, n_sites) for i in range(n_sites)]
    sz = [site_operator(SIGMA_Z / 2, i, n_sites) for i in range(n_sites)]
    return sx, sy, sz


def total_spin(n_sites: int) -> tuple[np.ndarray, np.ndarray]:
    """``(S^z_total, S^2_total)`` on the spin factor."""
    sx, sy, sz = spin_components(n_sites)
    tx, ty, tz = sum(sx), sum(sy), sum(sz)
    return tz, tx @ tx + ty @ ty + tz @ tz


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius norm of ``AB - BA``."""
    return float(np.linalg.norm(commutator(np.asarray(a), np.asarray(b))))


def check_hermitian(a: np.ndarray, rtol: float = 1e-12) -> bool:
    a = np.asarray(a)
    scale = np.max(np.abs(a)) if a.size else 0.0
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= rtol * scale)


def check_unitary(u: np.ndarray, atol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= atol)
