"""Hot inner loops, with a numba path and a pure-numpy path.

The numba path is used when numba imports cleanly and the environment variable
``IRHM_POLARON_DISABLE_NUMBA`` is unset (or ``0``). Both paths are always
importable as ``*_numba`` / ``*_numpy`` so they can be compared directly.
"""
import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f


def _flag_disabled():
    return os.environ.get("IRHM_POLARON_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")


USE_NUMBA = NUMBA_AVAILABLE and not _flag_disabled()
BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# Hard-core boson operator strings on the 2^N occupation basis.
#
# An operator string is given as parallel arrays (sites, creates) read left to
# right in operator order; it is applied right to left.
# ---------------------------------------------------------------------------

@njit(cache=True)
def hcb_string_matrix_numba(n_sites, sites, creates):
    dim = 1 << n_sites
    out = np.zeros((dim, dim), dtype=np.int64)
    n_ops = sites.shape[0]
    for state in range(dim):
        s = state
        alive = True
        for k in range(n_ops - 1, -1, -1):
            mask = 1 << sites[k]
            if creates[k]:
                if s & mask:
                    alive = False
                    break
                s |= mask
            else:
                if not (s & mask):
                    alive = False
                    break
                s &= ~mask
        if alive:
            out[s, state] += 1
    return out


def hcb_string_matrix_numpy(n_sites, sites, creates):
    dim = 1 << n_sites
    states = np.arange(dim, dtype=np.int64)
    alive = np.ones(dim, dtype=bool)
    s = states.copy()
    for site, create in zip(sites[::-1], creates[::-1]):
        mask = np.int64(1) << np.int64(site)
        occupied = (s & mask) != 0
        if create:
            alive &= ~occupied
            s = s | mask
        else:
            alive &= occupied
            s = s & ~mask
    out = np.zeros((dim, dim), dtype=np.int64)
    np.add.at(out, (s[alive], states[alive]), 1)
    return out


# ---------------------------------------------------------------------------
# Two-site local operator acting on a batch of phonon-space vectors.
# Flat phonon index = sum_k occ_k * base**k (site 0 least significant).
# ---------------------------------------------------------------------------

@njit(cache=True)
def _apply_one_site_numba(vecs, op, stride, base):
    n_vec, dim = vecs.shape
    out = np.zeros_like(vecs)
    block = stride * base
    for v in range(n_vec):
        for hi in range(0, dim, block):
            for p in range(base):
                for q in range(base):
                    c = op[p, q]
                    if c == 0:
                        continue
                    src = hi + q * stride
                    dst = hi + p * stride
                    for lo in range(stride):
                        out[v, dst + lo] += c * vecs[v, src + lo]
    return out


@njit(cache=True)
def apply_two_site_numba(vecs, left, right, site_a, site_b, n_sites, base):
    # two single-site passes: O(dim * base) per vector instead of O(dim * base^2)
    tmp = _apply_one_site_numba(vecs, left, base**site_a, base)
    return _apply_one_site_numba(tmp, right, base**site_b, base)


def apply_two_site_numpy(vecs, left, right, site_a, site_b, n_sites, base):
    n_vec = vecs.shape[0]
    # C-order reshape puts site k on axis 1 + (n_sites - 1 - k)
    t = vecs.reshape((n_vec,) + (base,) * n_sites)
    ax_a = 1 + n_sites - 1 - site_a
    ax_b = 1 + n_sites - 1 - site_b
    t = np.moveaxis(np.tensordot(left, t, axes=([1], [ax_a])), 0, ax_a)
    t = np.moveaxis(np.tensordot(right, t, axes=([1], [ax_b])), 0, ax_b)
    return np.ascontiguousarray(t).reshape(n_vec, -1)


# ---------------------------------------------------------------------------
# Fixed-step RK4 for d(rho)/dt = i [K, rho] with per-step symmetrization.
# Returns sampled states plus the largest trace deviation seen at any step.
# ---------------------------------------------------------------------------

@njit(cache=True)
def rk4_commutator_numba(k_op, rho0, step, n_steps, stride):
    n_samples = n_steps // stride + 1
    dim = rho0.shape[0]
    samples = np.empty((n_samples, dim, dim), dtype=np.complex128)
    rho = rho0.copy()
    samples[0] = rho
    trace_dev = abs(np.trace(rho) - 1.0)
    ik = 1j * k_op
    half = 0.5 * step
    out_i = 1
    for n in range(1, n_steps + 1):
        k1 = ik @ rho - rho @ ik
        r = rho + half * k1
        k2 = ik @ r - r @ ik
        r = rho + half * k2
        k3 = ik @ r - r @ ik
        r = rho + step * k3
        k4 = ik @ r - r @ ik
        rho = rho + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
        dev = abs(np.trace(rho) - 1.0)
        if dev > trace_dev:
            trace_dev = dev
        if n % stride == 0:
            samples[out_i] = rho
            out_i += 1
    return samples, trace_dev


def rk4_commutator_numpy(k_op, rho0, step, n_steps, stride):
    n_samples = n_steps // stride + 1
    dim = rho0.shape[0]
    samples = np.empty((n_samples, dim, dim), dtype=np.complex128)
    rho = rho0.copy()
    samples[0] = rho
    trace_dev = abs(np.trace(rho) - 1.0)
    ik = 1j * k_op
    half = 0.5 * step
    out_i = 1
    for n in range(1, n_steps + 1):
        k1 = ik @ rho - rho @ ik
        r = rho + half * k1
        k2 = ik @ r - r @ ik
        r = rho + half * k2
        k3 = ik @ r - r @ ik
        r = rho + step * k3
        k4 = ik @ r - r @ ik
        rho = rho + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
        trace_dev = max(trace_dev, abs(np.trace(rho) - 1.0))
        if n % stride == 0:
            samples[out_i] = rho
            out_i += 1
    return samples, trace_dev


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def hcb_string_matrix(n_sites, sites, creates):
    """Integer matrix of the HCB operator string ``prod_k op(sites[k], creates[k])``."""
    sites = np.ascontiguousarray(sites, dtype=np.int64)
    creates = np.ascontiguousarray(creates, dtype=np.bool_)
    if USE_NUMBA:
        return hcb_string_matrix_numba(n_sites, sites, creates)
    return hcb_string_matrix_numpy(n_sites, sites, creates)


def apply_two_site(vecs, left, right, site_a, site_b, n_sites, base):
    """Apply ``left`` on phonon site ``site_a`` and ``right`` on ``site_b`` to each row of ``vecs``."""
    if site_a == site_b:
        raise ValueError("two-site kernel needs distinct sites")
    vecs = np.ascontiguousarray(vecs, dtype=np.complex128)
    left = np.ascontiguousarray(left, dtype=np.complex128)
    right = np.ascontiguousarray(right, dtype=np.complex128)
    # the tensordot path reaches BLAS and beats the compiled loop at every size
    # measured (see benchmarks/bench_kernels.py), so it is used on both backends
    return apply_two_site_numpy(vecs, left, right, site_a, site_b, n_sites, base)


def rk4_commutator(k_op, rho0, step, n_steps, stride):
    k_op = np.ascontiguousarray(k_op, dtype=np.complex128)
    rho0 = np.ascontiguousarray(rho0, dtype=np.complex128)
    if USE_NUMBA:
        return rk4_commutator_numba(k_op, rho0, float(step), int(n_steps), int(stride))
    return rk4_commutator_numpy(k_op, rho0, float(step), int(n_steps), int(stride))
