"""Hot numeric kernels.

Every kernel has a numba ``@njit`` version and a pure-numpy version with the
same signature. The numba path is used when numba imports and the
environment variable ``ENCAQC_DISABLE_NUMBA`` is unset (or ``0``); setting it
to ``1`` forces the numpy path. Both are always importable through
``IMPLEMENTATIONS`` so tests and benchmarks can compare them directly.

Bit convention: qubit ``q`` of an ``n``-qubit Pauli lives in bit ``n-1-q``
of the packed mask, so the mask lines up with the computational-basis index
of a dense matrix whose leftmost tensor factor is qubit 0.
"""
import os

import numpy as np

_PHASES = np.array([1.0, 1.0j, -1.0, -1.0j])


def _flag_disabled():
    return os.environ.get("ENCAQC_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")


# --------------------------------------------------------------------------
# numpy implementations
# --------------------------------------------------------------------------

def _parity_np(a):
    return (np.bitwise_count(a) & 1).astype(np.int8)


def pauli_dense_np(n, x, z, phase):
    """Dense matrix of ``i**phase * prod_q sigma(x_q, z_q)``."""
    dim = 1 << n
    cols = np.arange(dim, dtype=np.uint64)
    rows = cols ^ np.uint64(x)
    # sigma(x,z) = i^{x.z} X^x Z^z; Z^z acts first on the column index
    exponent = (phase + int(bin(x & z).count("1"))) % 4
    signs = 1.0 - 2.0 * _parity_np(cols & np.uint64(z))
    out = np.zeros((dim, dim), dtype=np.complex128)
    out[rows.astype(np.int64), cols.astype(np.int64)] = _PHASES[exponent] * signs
    return out


def bohr_sum_np(omega, tau, g):
    """``K[a, b] = sum_k g[k] * exp(-1j * omega[a, b] * tau[k])``."""
    return np.exp(-1j * omega[..., None] * tau) @ g


def anticommutation_np(xa, za, xb, zb):
    """Symplectic form between two Pauli lists; 1 where the pair anticommutes."""
    xa = np.asarray(xa, dtype=np.uint64)
    za = np.asarray(za, dtype=np.uint64)
    xb = np.asarray(xb, dtype=np.uint64)
    zb = np.asarray(zb, dtype=np.uint64)
    form = (xa[:, None] & zb[None, :]) ^ (za[:, None] & xb[None, :])
    return _parity_np(form)


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------

try:
    import numba as nb

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


if HAVE_NUMBA:

    @nb.njit(cache=True)
    def _popcount(v):
        c = 0
        while v:
            v &= v - np.uint64(1)
            c += 1
        return c

    @nb.njit(cache=True)
    def _pauli_dense_nb(n, x, z, phase):
        dim = 1 << n
        out = np.zeros((dim, dim), dtype=np.complex128)
        ux = np.uint64(x)
        uz = np.uint64(z)
        exponent = (phase + _popcount(ux & uz)) % 4
        if exponent == 0:
            base = 1.0 + 0.0j
        elif exponent == 1:
            base = 1.0j
        elif exponent == 2:
            base = -1.0 + 0.0j
        else:
            base = -1.0j
        for col in range(dim):
            ucol = np.uint64(col)
            row = ucol ^ ux
            if _popcount(ucol & uz) & 1:
                out[row, col] = -base
            else:
                out[row, col] = base
        return out

    @nb.njit(cache=True)
    def _bohr_sum_nb(omega, tau, g):
        d0, d1 = omega.shape
        out = np.zeros((d0, d1), dtype=np.complex128)
        for a in range(d0):
            for b in range(d1):
                w = omega[a, b]
                acc = 0.0j
                for k in range(tau.shape[0]):
                    ph = w * tau[k]
                    acc += g[k] * (np.cos(ph) - 1.0j * np.sin(ph))
                out[a, b] = acc
        return out

    @nb.njit(cache=True)
    def _anticommutation_nb(xa, za, xb, zb):
        out = np.zeros((xa.shape[0], xb.shape[0]), dtype=np.int8)
        for i in range(xa.shape[0]):
            for j in range(xb.shape[0]):
                out[i, j] = _popcount((xa[i] & zb[j]) ^ (za[i] & xb[j])) & 1
        return out

    def pauli_dense_nb(n, x, z, phase):
        return _pauli_dense_nb(int(n), np.uint64(x), np.uint64(z), int(phase))

    def bohr_sum_nb(omega, tau, g):
        return _bohr_sum_nb(
            np.ascontiguousarray(omega, dtype=np.float64),
            np.ascontiguousarray(tau, dtype=np.float64),
            np.ascontiguousarray(g, dtype=np.complex128),
        )

    def anticommutation_nb(xa, za, xb, zb):
        return _anticommutation_nb(
            np.asarray(xa, dtype=np.uint64), np.asarray(za, dtype=np.uint64),
            np.asarray(xb, dtype=np.uint64), np.asarray(zb, dtype=np.uint64),
        )


IMPLEMENTATIONS = {
    "numpy": {
        "pauli_dense": pauli_dense_np,
        "bohr_sum": bohr_sum_np,
        "anticommutation": anticommutation_np,
    },
}
if HAVE_NUMBA:
    IMPLEMENTATIONS["numba"] = {
        "pauli_dense": pauli_dense_nb,
        "bohr_sum": bohr_sum_nb,
        "anticommutation": anticommutation_nb,
    }

BACKEND = "numba" if HAVE_NUMBA and not _flag_disabled() else "numpy"

pauli_dense = IMPLEMENTATIONS[BACKEND]["pauli_dense"]
bohr_sum = IMPLEMENTATIONS[BACKEND]["bohr_sum"]
anticommutation = IMPLEMENTATIONS[BACKEND]["anticommutation"]
