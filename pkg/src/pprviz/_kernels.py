"""Numba kernels: residue pushes over CSR adjacency and seeded random walks.

Residue propagation follows a FIFO frontier (ring buffer + in-queue flags); a
node already queued is not re-enqueued.  Kernels mutate dense per-node
``res``/``est`` arrays so callers can aggregate or inspect partial states.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / (1 << 53)


@njit(cache=True, nogil=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True, inline="always")
def _next_double(state):
    # splitmix64 step; returns (new_state, uniform in [0,1))
    state = state + _GOLDEN
    z = _mix64(state)
    return state, np.float64(z >> np.uint64(11)) * _INV53


@njit(cache=True, nogil=True)
def forward_push(indptr, indices, deg, alpha, r_max, res, est,
                 max_pushes, sweep_sums):
    """Push residues along out-edges until res[v] <= deg[v]*r_max everywhere.

    Each push converts alpha*res into est at the pushed node and spreads the
    rest evenly over its out-neighbors.  Stops early after ``max_pushes``
    pushes when non-negative.  When ``sweep_sums`` is non-empty, records the
    total residue after each full frontier sweep.  Returns
    (pushes, converted_mass, sweeps_recorded).
    """
    n = deg.shape[0]
    cap = n + 2
    queue = np.empty(cap, np.int64)
    inq = np.zeros(n, np.bool_)
    front = 0
    rear = 0
    for v in range(n):
        if res[v] > deg[v] * r_max:
            queue[rear] = v
            rear = (rear + 1) % cap
            inq[v] = True
    record = sweep_sums.shape[0] > 0
    sweeps = 0
    if record and front != rear:
        queue[rear] = -1
        rear = (rear + 1) % cap
    pushes = 0
    converted = 0.0
    while front != rear:
        v = queue[front]
        front = (front + 1) % cap
        if v < 0:
            if sweeps < sweep_sums.shape[0]:
                total = 0.0
                for i in range(n):
                    total += res[i]
                sweep_sums[sweeps] = total
            sweeps += 1
            if front != rear:
                queue[rear] = -1
                rear = (rear + 1) % cap
            continue
        inq[v] = False
        rv = res[v]
        res[v] = 0.0
        est[v] += alpha * rv
        converted += alpha * rv
        share = (1.0 - alpha) * rv / deg[v]
        for idx in range(indptr[v], indptr[v + 1]):
            u = indices[idx]
            res[u] += share
            if not inq[u] and res[u] > deg[u] * r_max:
                queue[rear] = u
                rear = (rear + 1) % cap
                inq[u] = True
        pushes += 1
        if max_pushes >= 0 and pushes >= max_pushes:
            break
    return pushes, converted, sweeps


@njit(cache=True, nogil=True)
def backward_push(in_indptr, in_indices, deg, alpha, r_b_max, res, est,
                  max_pushes, sweep_sums):
    """Push residues along in-edges until res[v] <= r_b_max everywhere.

    The pushed node gains alpha*deg[v]*res into est; each in-neighbor u
    receives (1-alpha)*res / deg[u] (u's own out-degree).  Returns
    (pushes, converted_mass, sweeps_recorded).
    """
    n = deg.shape[0]
    cap = n + 2
    queue = np.empty(cap, np.int64)
    inq = np.zeros(n, np.bool_)
    front = 0
    rear = 0
    for v in range(n):
        if res[v] > r_b_max:
            queue[rear] = v
            rear = (rear + 1) % cap
            inq[v] = True
    record = sweep_sums.shape[0] > 0
    sweeps = 0
    if record and front != rear:
        queue[rear] = -1
        rear = (rear + 1) % cap
    pushes = 0
    converted = 0.0
    while front != rear:
        v = queue[front]
        front = (front + 1) % cap
        if v < 0:
            if sweeps < sweep_sums.shape[0]:
                total = 0.0
                for i in range(n):
                    total += res[i]
                sweep_sums[sweeps] = total
            sweeps += 1
            if front != rear:
                queue[rear] = -1
                rear = (rear + 1) % cap
            continue
        inq[v] = False
        rv = res[v]
        res[v] = 0.0
        est[v] += alpha * deg[v] * rv
        converted += alpha * rv
        for idx in range(in_indptr[v], in_indptr[v + 1]):
            u = in_indices[idx]
            res[u] += (1.0 - alpha) * rv / deg[u]
            if not inq[u] and res[u] > r_b_max:
                queue[rear] = u
                rear = (rear + 1) % cap
                inq[u] = True
        pushes += 1
        if max_pushes >= 0 and pushes >= max_pushes:
            break
    return pushes, converted, sweeps


@njit(cache=True, nogil=True)
def residue_walks(out_indptr, out_indices, slot, nslots, start_nodes,
                  start_cum, alpha, num_walks, seed):
    """Seeded restart walks from residue-weighted start nodes.

    Walk ``w`` draws its whole randomness from a splitmix64 stream keyed by
    (seed, w), so results are reproducible and order-independent.  Returns
    landing counts per child slot (slot < 0 means outside the scope).
    """
    counts = np.zeros(nslots, np.int64)
    for w in range(num_walks):
        state = _mix64(np.uint64(seed) + np.uint64(w) * _GOLDEN)
        state, u = _next_double(state)
        # residue-weighted start: invert the cumulative distribution
        lo, hi = 0, start_cum.shape[0] - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if start_cum[mid] <= u:
                lo = mid + 1
            else:
                hi = mid
        node = start_nodes[lo]
        while True:
            state, t = _next_double(state)
            if t < alpha:
                break
            begin = out_indptr[node]
            d = out_indptr[node + 1] - begin
            state, p = _next_double(state)
            step = np.int64(p * d)
            if step >= d:
                step = d - 1
            node = out_indices[begin + step]
        s = slot[node]
        if s >= 0:
            counts[s] += 1
    return counts
