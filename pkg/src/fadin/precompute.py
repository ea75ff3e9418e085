"""Parameter-independent tensors that make solver iterations event-count free.

Expanding the squared discrete intensity in the least-squares loss isolates
three constants that depend only on the projected counts z:

* ``phi_g[j, k]``     = sum_s z_j[s - tau]                  (tau = k + 1)
* ``psi[j, k, a, b]`` = sum_s z_j[s - tau] * z_k[s - tau']  (tau = a + 1, tau' = b + 1)
* ``phi_ev[i, j, k]`` = sum over process-i event bins t of z_j[t - tau]

with s running over 1..G and z treated as zero at negative indices.  Once
these are built, every loss and gradient evaluation costs O(p^3 L^2)
regardless of the number of events or the grid size.

Two equivalent construction routes are provided.  The dense route scans
shifted copies of the full count arrays (cost O(p^2 L G), linear in G); the
sparse route enumerates pairs of occupied bins closer than the kernel
support (cost scales with the number of such pairs) and is selected
automatically when the dense workspace would be too large.  Both produce
identical integers.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.linalg import toeplitz

from .discretization import DiscreteGrid, DiscretizedCounts
from .errors import ConfigurationError, ResourceLimitError

DEFAULT_MEM_CAP_BYTES = 4 << 30

# Dense-route shifted-copy workspace threshold, in bytes.
_DENSE_WORKSPACE_BYTES = 256 << 20
# Pair-enumeration chunk size for the sparse route.
_PAIR_CHUNK = 4_000_000


@dataclass
class Precomputations:
    """Constant tensors shared by all solver iterations on one dataset.

    ``psi_flat`` stores the big symmetric block matrix with block (j, k)
    holding all (tau, tau') sums; the ``psi`` property views it as the
    (p, p, L, L) tensor.  Keeping the flat layout lets the solver contract
    kernels against it with a single matrix product.
    """

    phi_g: np.ndarray     # (p, L)
    psi_flat: np.ndarray  # (p*L, p*L)
    phi_ev: np.ndarray    # (p, p, L)
    n_events: np.ndarray  # (p,)
    grid: DiscreteGrid
    method: str = "dense"
    elapsed_seconds: float = 0.0

    @property
    def p(self) -> int:
        return self.phi_g.shape[0]

    @property
    def L(self) -> int:
        return self.phi_g.shape[1]

    @property
    def n_total(self) -> int:
        return int(self.n_events.sum())

    @property
    def psi(self) -> np.ndarray:
        p, L = self.phi_g.shape
        return self.psi_flat.reshape(p, L, p, L).transpose(0, 2, 1, 3)


def _estimate_bytes(p: int, L: int) -> int:
    # psi plus the per-pair upper-triangular scratch blocks dominate
    return 2 * p * p * L * L * 8 + p * L * 8 + p * p * L * 8


def _pair_chunks(idx_a, w_a, idx_b, w_b, d_min, d_max, need_a=False):
    """Yield (d, w[, a]) for all index pairs with idx_a - idx_b in [d_min, d_max]."""
    n_a = idx_a.size
    if n_a == 0 or idx_b.size == 0:
        return
    lo = np.searchsorted(idx_b, idx_a - d_max, side="left")
    hi = np.searchsorted(idx_b, idx_a - d_min, side="right")
    lens = hi - lo
    cum = np.cumsum(lens)
    start = 0
    base = 0
    while start < n_a:
        end = int(np.searchsorted(cum, base + _PAIR_CHUNK, side="left")) + 1
        end = min(max(end, start + 1), n_a)
        sub = lens[start:end]
        m = int(sub.sum())
        base = cum[end - 1]
        if m == 0:
            start = end
            continue
        rows = np.repeat(np.arange(start, end), sub)
        offsets = np.concatenate(([0], np.cumsum(sub[:-1])))
        cols = np.arange(m) - np.repeat(offsets, sub) + np.repeat(lo[start:end], sub)
        d = idx_a[rows] - idx_b[cols]
        w = w_a[rows] * w_b[cols]
        if need_a:
            yield d, w, idx_a[rows]
        else:
            yield d, w
        start = end


def _sparse_arrays(counts: DiscretizedCounts):
    idx = [np.asarray(ii, dtype=np.int64) for ii in counts.bin_index]
    wts = [np.asarray(cc, dtype=float) for cc in counts.bin_count]
    return idx, wts


def _phi_g_sparse(idx, wts, G, L):
    p = len(idx)
    phi_g = np.zeros((p, L))
    taus = np.arange(1, L + 1)
    for j in range(p):
        if idx[j].size == 0:
            continue
        cumw = np.cumsum(wts[j])
        pos = np.searchsorted(idx[j], G - taus, side="right")
        phi_g[j] = np.where(pos > 0, cumw[np.maximum(pos - 1, 0)], 0.0)
    return phi_g


def _phi_ev_sparse(idx, wts, L):
    p = len(idx)
    phi_ev = np.zeros((p, p, L))
    for i in range(p):
        for j in range(p):
            acc = np.zeros(L + 1)
            for d, w in _pair_chunks(idx[i], wts[i], idx[j], wts[j], 1, L):
                acc += np.bincount(d, weights=w, minlength=L + 1)
            phi_ev[i, j] = acc[1:]
    return phi_ev


def _upper_block_sparse(idx_j, w_j, idx_k, w_k, G, L):
    """Upper-triangular block U[a, b] = Psi(tau=a+1, tau'=b+1) for b >= a."""
    totals = np.zeros(L)
    corr_d, corr_pos, corr_w = [], [], []
    for d, w, a_val in _pair_chunks(idx_j, w_j, idx_k, w_k, 0, L - 1, need_a=True):
        totals += np.bincount(d, weights=w, minlength=L)[:L]
        # pairs whose diagonal run is cut short by the s <= G boundary
        sel = a_val > G - L + d
        if np.any(sel):
            corr_d.append(d[sel])
            corr_pos.append(G - a_val[sel])  # first 0-based diag slot excluded
            corr_w.append(w[sel])
    col = np.zeros(L)
    col[0] = totals[0]
    U = toeplitz(col, totals)
    if corr_d:
        corr_d = np.concatenate(corr_d)
        corr_pos = np.concatenate(corr_pos)
        corr_w = np.concatenate(corr_w)
        for d in np.unique(corr_d):
            sel = corr_d == d
            n_diag = L - int(d)
            diff = np.zeros(n_diag)
            np.add.at(diff, corr_pos[sel], corr_w[sel])
            excl = np.cumsum(diff)
            rows = np.arange(n_diag)
            U[rows, rows + d] -= excl
    return U


def _upper_block_dense(z_j, z_k, G, L):
    zp = np.concatenate([z_j, np.zeros(L)])
    shifted = sliding_window_view(zp, G + 1)[:L]
    M = shifted * z_k[None, :]
    np.cumsum(M, axis=1, out=M)
    U = np.zeros((L, L))
    for c in range(L):
        U[: c + 1, c] = M[c::-1, G - 1 - c]
    return U


def _phi_ev_dense(z, idx, wts, L, chunk_rows=200_000):
    p = z.shape[0]
    phi_ev = np.zeros((p, p, L))
    taus = np.arange(1, L + 1)
    for i in range(p):
        for start in range(0, idx[i].size, chunk_rows):
            rows = idx[i][start : start + chunk_rows]
            w = wts[i][start : start + chunk_rows]
            cols = rows[:, None] - taus[None, :]
            valid = cols >= 0
            np.clip(cols, 0, None, out=cols)
            for j in range(p):
                vals = z[j][cols] * valid
                phi_ev[i, j] += w @ vals
    return phi_ev


def precompute(
    counts: DiscretizedCounts,
    grid: DiscreteGrid,
    method: str = "auto",
    mem_cap_bytes: int = DEFAULT_MEM_CAP_BYTES,
) -> Precomputations:
    """Build the constant tensors for the given projected counts.

    ``method`` is "auto", "dense" or "sparse"; auto picks dense whenever the
    shifted-copy workspace fits comfortably in memory.  A
    :class:`ResourceLimitError` is raised before any large allocation if the
    p^2 L^2 estimate exceeds ``mem_cap_bytes``.
    """
    t_start = time.perf_counter()
    p, G, L = counts.p, grid.G, grid.L
    if counts.G != G:
        raise ConfigurationError(
            f"counts were projected on G={counts.G} but grid has G={G}"
        )
    if L > G:
        raise ConfigurationError(f"kernel support L={L} exceeds grid size G={G}")

    needed = _estimate_bytes(p, L)
    if needed > mem_cap_bytes:
        raise ResourceLimitError(
            f"precomputation needs about {needed / 2**30:.2f} GiB for p={p}, L={L}, "
            f"above the cap of {mem_cap_bytes / 2**30:.2f} GiB"
        )
    if method == "auto":
        workspace = ((L + 1) * (G + 1) + p * (G + 1)) * 8
        method = "dense" if workspace <= min(_DENSE_WORKSPACE_BYTES, mem_cap_bytes) else "sparse"
    if method not in ("dense", "sparse"):
        raise ConfigurationError(f"unknown precompute method {method!r}")

    idx, wts = _sparse_arrays(counts)
    uppers = {}
    if method == "dense":
        z = counts.to_dense().astype(float)
        cums = np.cumsum(z, axis=1)
        phi_g = cums[:, G - L : G][:, ::-1].copy()
        phi_ev = _phi_ev_dense(z, idx, wts, L)
        for j in range(p):
            for k in range(p):
                uppers[j, k] = _upper_block_dense(z[j], z[k], G, L)
    else:
        phi_g = _phi_g_sparse(idx, wts, G, L)
        phi_ev = _phi_ev_sparse(idx, wts, L)
        for j in range(p):
            for k in range(p):
                uppers[j, k] = _upper_block_sparse(idx[j], wts[j], idx[k], wts[k], G, L)

    psi_flat = np.empty((p * L, p * L))
    diag = np.arange(L)
    for j in range(p):
        for k in range(p):
            block = psi_flat[j * L : (j + 1) * L, k * L : (k + 1) * L]
            np.copyto(block, uppers[k, j].T)
            block[diag, diag] = 0.0
            block += uppers[j, k]
    del uppers

    return Precomputations(
        phi_g=phi_g,
        psi_flat=psi_flat,
        phi_ev=phi_ev,
        n_events=counts.n_events,
        grid=grid,
        method=method,
        elapsed_seconds=time.perf_counter() - t_start,
    )


def precompute_naive(counts: DiscretizedCounts, grid: DiscreteGrid) -> Precomputations:
    """Literal triple-loop construction; reference oracle for small instances."""
    p, G, L = counts.p, grid.G, grid.L
    z = counts.to_dense()
    phi_g = np.zeros((p, L))
    psi = np.zeros((p, p, L, L))
    phi_ev = np.zeros((p, p, L))
    for j in range(p):
        for tau in range(1, L + 1):
            phi_g[j, tau - 1] = sum(
                int(z[j, s - tau]) for s in range(1, G + 1) if s - tau >= 0
            )
    for j in range(p):
        for k in range(p):
            for tau in range(1, L + 1):
                for tau2 in range(1, L + 1):
                    acc = 0
                    for s in range(max(tau, tau2), G + 1):
                        acc += int(z[j, s - tau]) * int(z[k, s - tau2])
                    psi[j, k, tau - 1, tau2 - 1] = acc
    for i in range(p):
        for j in range(p):
            for a, c in zip(counts.bin_index[i], counts.bin_count[i]):
                for tau in range(1, L + 1):
                    if a - tau >= 0:
                        phi_ev[i, j, tau - 1] += int(c) * int(z[j, a - tau])
    psi_flat = psi.transpose(0, 2, 1, 3).reshape(p * L, p * L).copy()
    return Precomputations(
        phi_g=phi_g,
        psi_flat=psi_flat,
        phi_ev=phi_ev,
        n_events=counts.n_events,
        grid=grid,
        method="naive",
    )
