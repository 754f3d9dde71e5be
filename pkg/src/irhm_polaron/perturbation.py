"""Second- and third-order effective Hamiltonians in the polaron frame.

Two independent routes are provided for the second-order term: the closed
form in terms of ``f1`` / ``f2`` and a direct sum over phonon intermediate
states.  The phonon sums are evaluated either densely from the composite
``H_I`` (``method="dense"``, small systems only) or through vacuum amplitudes
on the phonon factor (``method="blocks"``), which scales to N = 5.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import _kernels, hilbert, models
from .errors import InsufficientCutoffError, SeriesOverflowError
from .models import ModelParams

G_MAX = 10.0


class SeriesValue(NamedTuple):
    value: float
    terms: int
    tail_bound: float


def _guard(g: float, tol: float):
    if g < 0:
        raise ValueError(f"g must be non-negative, got {g}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if g > G_MAX:
        raise SeriesOverflowError(f"g={g} exceeds the guarded range g <= {G_MAX}")


def f1_series(g: float, tol: float = 1e-14) -> SeriesValue:
    """``sum_{n>=1} g^{2n} / (n! n)``, summed until the next term is below ``tol (1 + |S|)``."""
    _guard(g, tol)
    x = g * g
    if x == 0.0:
        return SeriesValue(0.0, 0, 0.0)
    total = 0.0
    power = x  # x^n / n!
    n = 1
    while True:
        total += power / n
        nxt = power * x / (n + 1)
        if nxt / (n + 1) < tol * (1.0 + abs(total)) and n + 1 > x:
            # remaining terms decrease at least geometrically with ratio x / (n + 2)
            ratio = x / (n + 2)
            return SeriesValue(total, n, nxt / (n + 1) / (1.0 - ratio))
        power = nxt
        n += 1


def f2_series(g: float, tol: float = 1e-14, max_index: int | None = None) -> SeriesValue:
    """``sum_{n,m>=1} g^{2(n+m)} / [n! m! (n+m)]`` over a growing square ``n, m <= K``.

    Shells ``max(n, m) = K`` are added until a shell falls below ``tol (1 + |S|)``
    past the peak of ``x^K / K!``.  ``tail_bound`` bounds everything outside the
    final square.  ``max_index`` fixes ``K`` instead (no convergence test).
    """
    _guard(g, tol)
    x = g * g
    if x == 0.0:
        return SeriesValue(0.0, 0, 0.0)
    p = [1.0]  # p[n] = x^n / n!
    total = 0.0
    k = 0
    while True:
        k += 1
        p.append(p[-1] * x / k)
        shell = p[k] * p[k] / (2 * k)
        for n in range(1, k):
            shell += 2.0 * p[n] * p[k] / (n + k)
        total += shell
        if max_index is not None:
            if k >= max_index:
                break
            continue
        if k > x and shell < tol * (1.0 + abs(total)):
            break
    ratio = x / (k + 2)
    tail_p = p[k] * x / (k + 1) / (1.0 - ratio) if ratio < 1 else math.inf
    bound = 2.0 * math.exp(x) * tail_p / (k + 1)
    return SeriesValue(total, k, bound)


@dataclass(frozen=True)
class EffectiveCouplings:
    j_perp2: float
    j_par2: float
    f1: float
    f2: float
    series_terms_used: tuple[int, int]


def second_order_couplings(params: ModelParams, tol: float = 1e-14) -> EffectiveCouplings:
    f1 = f1_series(params.g, tol)
    f2 = f2_series(params.g, tol)
    scale = params.j**2 * np.exp(-2 * params.g**2) / (2 * params.omega)
    return EffectiveCouplings(
        j_perp2=-(params.n_sites - 2) * f1.value * scale,
        j_par2=(2 * f1.value + f2.value) * scale,
        f1=f1.value,
        f2=f2.value,
        series_terms_used=(f1.terms, f2.terms),
    )


def _flip_sum(n_sites: int) -> np.ndarray:
    """``sum_{i<j} [n_i (1 - n_j) + n_j (1 - n_i)]``, diagonal."""
    occ = (np.arange(2**n_sites)[:, None] >> np.arange(n_sites)) & 1
    tot = occ.sum(axis=1)
    return np.diag((tot * (n_sites - tot)).astype(complex))


def build_h2_closed(params: ModelParams, couplings: EffectiveCouplings | None = None) -> np.ndarray:
    c = couplings or second_order_couplings(params)
    n = params.n_sites
    return 0.5 * c.j_perp2 * models.hopping_sum(n) - 0.5 * c.j_par2 * _flip_sum(n)


# ---------------------------------------------------------------------------
# sums over phonon intermediate states
# ---------------------------------------------------------------------------

class VacuumAmplitudes:
    """Phonon-factor contractions of ``H_I = c sum_{i != j} b_i^dag b_j F_ij``.

    ``F_ij = S_+^{ij dag} S_-^{ij} - 1`` and ``c = 0.5 J exp(-g^2)``; because
    ``F_ij^dag = F_ji`` exactly, ``<0|F_ij = (F_ji |0>)^dag``.  Intermediate
    energies are ``omega * (total phonon occupation)``.
    """

    def __init__(self, params: ModelParams):
        if params.phonon_cutoff < 1:
            raise InsufficientCutoffError("phonon sums need phonon_cutoff >= 1")
        self.params = params
        n = params.n_sites
        self.base = params.phonon_cutoff + 1
        self.pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        self.reverse = np.array([self.pairs.index((j, i)) for i, j in self.pairs])
        self.gain, self.lose = models.displacement_factors(params.g, params.phonon_cutoff)
        occ = params.space.phonon_occupations().sum(axis=1)
        self.inv_energy = np.zeros(occ.shape[0])
        self.inv_energy[1:] = 1.0 / (params.omega * occ[1:])
        self.vacuum = np.zeros((1, occ.shape[0]), dtype=complex)
        self.vacuum[0, 0] = 1.0
        self.hops = np.stack([models.hop_operator(n, i, j) for i, j in self.pairs])

    def apply_dressing(self, vecs: np.ndarray, pair_index: int) -> np.ndarray:
        """``F_ij`` applied to each row of ``vecs``."""
        i, j = self.pairs[pair_index]
        out = _kernels.apply_two_site(vecs, self.gain, self.lose, i, j, self.params.n_sites, self.base)
        return out - vecs

    @cached_property
    def kets(self) -> np.ndarray:
        """Row ``a`` is ``F_a |0>``."""
        return np.concatenate([self.apply_dressing(self.vacuum, a) for a in range(len(self.pairs))])

    @cached_property
    def bras(self) -> np.ndarray:
        """Row ``a`` is ``(<0| F_a)^*``, so ``<0|F_a|v> = bras[a].conj() @ v``."""
        return self.kets[self.reverse]

    def second_order_weights(self) -> np.ndarray:
        """``W[a, b] = <0| F_a D F_b |0>`` with ``D = sum_{m != 0} |m><m| / omega_m``."""
        return self.bras.conj() @ (self.inv_energy * self.kets).T

    def third_order_weights(self) -> np.ndarray:
        """``W[a, b, c] = <0| F_a D F_b D F_c |0>``."""
        p = len(self.pairs)
        right = self.inv_energy * self.kets
        out = np.empty((p, p, p), dtype=complex)
        for b in range(p):
            mid = self.inv_energy * self.apply_dressing(right, b)
            out[:, b, :] = self.bras.conj() @ mid.T
        return out

    def expectation(self, bath: np.ndarray) -> np.ndarray:
        """System operator ``<phi| H_I |phi>`` for a normalized phonon vector ``phi``."""
        bath = np.asarray(bath, dtype=complex).reshape(1, -1)
        c = self.params.polaron_hopping
        vals = np.array([(bath.conj() @ self.apply_dressing(bath, a).T)[0, 0] for a in range(len(self.pairs))])
        return c * np.einsum("a,aij->ij", vals, self.hops)


def _dense_blocks(params: ModelParams):
    h_i = models.build_interaction(params)
    ds = params.space.dim_spin
    occ = params.space.phonon_occupations().sum(axis=1)
    inv = np.zeros(occ.shape[0])
    inv[1:] = 1.0 / (params.omega * occ[1:])
    d = np.repeat(inv, ds)
    return h_i, d, ds


def build_h2_sw(params: ModelParams, method: str = "blocks") -> np.ndarray:
    """``-sum_{m != 0} <0|H_I|m><m|H_I|0> / omega_m`` as a spin-factor operator."""
    if params.phonon_cutoff < 2:
        raise InsufficientCutoffError("second-order phonon sum needs phonon_cutoff >= 2")
    if method == "dense":
        h_i, d, ds = _dense_blocks(params)
        return -(h_i[:ds, :] * d) @ h_i[:, :ds]
    if method != "blocks":
        raise ValueError(f"unknown method {method!r}")
    amp = VacuumAmplitudes(params)
    c = params.polaron_hopping
    w = amp.second_order_weights()
    return -(c**2) * np.einsum("ab,aij,bjk->ik", w, amp.hops, amp.hops)


def build_h3_sw(params: ModelParams, method: str = "blocks") -> np.ndarray:
    """``sum_{m,n != 0} <0|H_I|m><m|H_I|n><n|H_I|0> / (dE_m dE_n)`` as a spin-factor operator."""
    if params.phonon_cutoff < 3:
        raise InsufficientCutoffError("third-order phonon sum needs phonon_cutoff >= 3")
    if method == "dense":
        h_i, d, ds = _dense_blocks(params)
        return (h_i[:ds, :] * d) @ ((h_i * d) @ h_i[:, :ds])
    if method != "blocks":
        raise ValueError(f"unknown method {method!r}")
    amp = VacuumAmplitudes(params)
    c = params.polaron_hopping
    w = amp.third_order_weights()
    right = np.einsum("abc,ckl->abkl", w, amp.hops)
    right = np.einsum("bjk,abkl->ajl", amp.hops, right)
    return c**3 * np.einsum("aij,ajl->il", amp.hops, right)


# ---------------------------------------------------------------------------
# hopping-string operator identities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityReport:
    identity_name: str
    n_sites: int
    particle_number: int | None
    max_abs_deviation: float
    exact: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _string(n_sites, ops):
    sites = [s for s, _ in ops]
    creates = [c for _, c in ops]
    return _kernels.hcb_string_matrix(n_sites, sites, creates)


def _number_diag(n_sites):
    occ = (np.arange(2**n_sites)[:, None] >> np.arange(n_sites)) & 1
    return np.diag(occ.sum(axis=1)).astype(np.int64)


def _c(s):
    return (s, True)


def _a(s):
    return (s, False)


# Each open/closed-loop string is written left to right in operator order.
_T_STRINGS = {
    "T1": lambda l, i, j, k: [_c(l), _a(k), _c(k), _a(j), _c(j), _a(i)],
    "T2": lambda l, i, j, k: [_c(j), _a(i), _c(l), _a(k), _c(k), _a(j)],
    "T3": lambda l, i, j, k: [_c(l), _a(k), _c(j), _a(i), _c(k), _a(j)],
    "T4": lambda l, i, j, k: [_c(k), _a(j), _c(j), _a(i), _c(l), _a(k)],
    "T5": lambda l, i, j, k: [_c(k), _a(j), _c(l), _a(k), _c(j), _a(i)],
    "T6": lambda l, i, j, k: [_c(j), _a(i), _c(k), _a(j), _c(l), _a(k)],
}
_V_STRINGS = {
    "V1": lambda i, j, k: [_c(i), _a(k), _c(k), _a(j), _c(j), _a(i)],
    "V2": lambda i, j, k: [_c(i), _a(k), _c(j), _a(i), _c(k), _a(j)],
    "V3": lambda i, j, k: [_c(k), _a(j), _c(i), _a(k), _c(j), _a(i)],
}

IDENTITY_NAMES = ("T1", "T2", "T3", "T4", "T5", "T6", "V1", "V2", "V3", "TC1", "TC2", "TC3")
EQUALITY_CHECKS = (("T3", "T2"), ("T4", "T2"), ("T5", "T4"), ("V3", "V2"), ("TC2", "TC1"))


def raw_identity_operator(name: str, n_sites: int, first: int, second: int | None = None) -> np.ndarray:
    """Literal nested-loop sum of operator strings.

    For ``T*`` / ``TC*`` the arguments are ``(l, i)`` (boson ends on ``l``);
    for ``V*`` only ``first = i`` is used.
    """
    n = n_sites
    dim = 2**n
    out = np.zeros((dim, dim), dtype=np.int64)
    if name in _T_STRINGS:
        l, i = first, second
        make = _T_STRINGS[name]
        for j in range(n):
            if j in (i, l):
                continue
            for k in range(n):
                if k in (i, l, j):
                    continue
                out += _string(n, make(l, i, j, k))
    elif name in _V_STRINGS:
        i = first
        make = _V_STRINGS[name]
        for j in range(n):
            if j == i:
                continue
            for k in range(n):
                if k in (i, j):
                    continue
                out += _string(n, make(i, j, k))
    elif name == "TC1":
        l, i = first, second
        for j in range(n):
            if j not in (i, l):
                out += _string(n, [_c(l), _a(i), _c(i), _a(j), _c(j), _a(i)])
    elif name == "TC2":
        l, i = first, second
        for k in range(n):
            if k not in (i, l):
                out += _string(n, [_c(l), _a(k), _c(k), _a(l), _c(l), _a(i)])
    elif name == "TC3":
        l, i = first, second
        out += _string(n, [_c(l), _a(i), _c(i), _a(l), _c(l), _a(i)])
    else:
        raise ValueError(f"unknown identity {name!r}")
    return out


def closed_identity_operator(name: str, n_sites: int, first: int, second: int | None = None) -> np.ndarray:
    """Right-hand side: a polynomial in the total number times ``b_l^dag b_i`` or ``n_i``."""
    n = n_sites
    tot = _number_diag(n)
    eye = np.eye(2**n, dtype=np.int64)
    if name.startswith("V"):
        i = first
        tail = _string(n, [_c(i), _a(i)])
        if name == "V1":
            poly = (n * eye - tot) @ ((n - 1) * eye - tot)
        else:
            poly = (tot - eye) @ (n * eye - tot)
        return poly @ tail
    l, i = first, second
    tail = _string(n, [_c(l), _a(i)])
    if name == "T1":
        poly = ((n - 1) * eye - tot) @ ((n - 2) * eye - tot)
    elif name in ("T2", "T3", "T4", "T5"):
        poly = (tot - eye) @ ((n - 1) * eye - tot)
    elif name == "T6":
        poly = (tot - eye) @ (tot - 2 * eye)
    elif name in ("TC1", "TC2"):
        poly = (n - 1) * eye - tot
    elif name == "TC3":
        poly = eye
    else:
        raise ValueError(f"unknown identity {name!r}")
    return poly @ tail


def _min_sites(name: str) -> int:
    return 4 if name.startswith("T") and not name.startswith("TC") else 3


def _index_sets(name: str, n_sites: int):
    if name.startswith("V"):
        return [(i, None) for i in range(n_sites)]
    return [(l, i) for l in range(n_sites) for i in range(n_sites) if l != i]


def _sector_mask(n_sites: int, particle_number: int | None) -> np.ndarray:
    occ = (np.arange(2**n_sites)[:, None] >> np.arange(n_sites)) & 1
    if particle_number is None:
        return np.ones(2**n_sites, dtype=bool)
    return occ.sum(axis=1) == particle_number


def _report(name, n_sites, particle_number, pairs_of_mats):
    mask = _sector_mask(n_sites, particle_number)
    dev = 0
    for lhs, rhs in pairs_of_mats:
        diff = (lhs - rhs)[np.ix_(mask, mask)]
        if diff.size:
            dev = max(dev, int(np.max(np.abs(diff))))
    return IdentityReport(name, n_sites, particle_number, float(dev), dev == 0)


def appendix_a_identity(name: str, n_sites: int, particle_number: int | None = None) -> IdentityReport:
    """Compare the raw operator-string sum with its closed form (exact integer arithmetic).

    ``name`` may also be an equality such as ``"T3=T2"``, comparing two raw sums.
    The deviation is the largest entry over every site assignment, restricted
    to the given particle-number sector (``None`` = whole space).
    """
    if "=" in name:
        left, right = name.split("=")
        base = left
    else:
        left, right, base = name, None, name
    for nm in (left, right):
        if nm is not None and nm not in IDENTITY_NAMES:
            raise ValueError(f"unknown identity {nm!r}")
    need = max(_min_sites(left), _min_sites(right) if right else 0)
    if n_sites < need:
        raise ValueError(f"{name} needs n_sites >= {need}, got {n_sites}")
    mats = []
    for first, second in _index_sets(base, n_sites):
        lhs = raw_identity_operator(left, n_sites, first, second)
        rhs = (
            raw_identity_operator(right, n_sites, first, second)
            if right
            else closed_identity_operator(left, n_sites, first, second)
        )
        mats.append((lhs, rhs))
    return _report(name, n_sites, particle_number, mats)


def verify_identities(sizes=(4, 5)) -> list[IdentityReport]:
    """All twelve identities and the five equalities, per particle-number sector."""
    names = list(IDENTITY_NAMES) + [f"{a}={b}" for a, b in EQUALITY_CHECKS]
    reports = []
    for n in sizes:
        for name in names:
            for p in range(n + 1):
                reports.append(appendix_a_identity(name, n, p))
    return reports


# ---------------------------------------------------------------------------
# coefficient estimates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoefficientScales:
    t_n: float
    v_n: float
    t_cn: float
    valid: bool


def coefficient_scales(params: ModelParams) -> CoefficientScales:
    """Order-of-magnitude third-order coefficients: open-loop hop, closed loop, hop with loop."""
    if params.g == 0:
        return CoefficientScales(math.nan, math.nan, math.nan, False)
    j, g, w = params.j, params.g, params.omega
    red = math.exp(-g * g)
    return CoefficientScales(
        t_n=j**3 * red / (g * g * w) ** 2,
        v_n=j**3 / (g * g * w) ** 2,
        t_cn=j**3 * red / (g * w) ** 2,
        valid=True,
    )


def hermitian_part_error(h: np.ndarray) -> float:
    scale = np.max(np.abs(h)) or 1.0
    return float(np.max(np.abs(h - h.conj().T)) / scale)


def number_commutator(h: np.ndarray, n_sites: int) -> float:
    return hilbert.commutator_norm(h, hilbert.total_number(n_sites))
