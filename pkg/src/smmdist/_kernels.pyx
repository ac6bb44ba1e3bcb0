# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the distance iteration.

Mirrors ``_kernels_py``: a float transportation simplex (north-west corner
start, potentials, Bland's rule) and the synchronous operator sweep.
"""
from libc.stdlib cimport free, malloc
from libc.string cimport memset

BACKEND = "cython"

cdef enum:
    _ONE = 0
    _ZERO = 1

PINNED_ONE = _ONE
PINNED_ZERO = _ZERO
FREE = 2

cdef double EPS = 1e-12


cdef struct Work:
    int n
    double* a
    double* b
    double* c
    double* x
    char* basic
    double* pot
    char* seen
    int* prev
    int* queue
    int* ri
    int* ci


cdef int work_init(Work* w, int n) noexcept nogil:
    w.n = n
    w.a = <double*> malloc(n * sizeof(double))
    w.b = <double*> malloc(n * sizeof(double))
    w.c = <double*> malloc(n * n * sizeof(double))
    w.x = <double*> malloc(n * n * sizeof(double))
    w.basic = <char*> malloc(n * n * sizeof(char))
    w.pot = <double*> malloc(2 * n * sizeof(double))
    w.seen = <char*> malloc(2 * n * sizeof(char))
    w.prev = <int*> malloc(2 * n * sizeof(int))
    w.queue = <int*> malloc(2 * n * sizeof(int))
    w.ri = <int*> malloc(n * sizeof(int))
    w.ci = <int*> malloc(n * sizeof(int))
    if (w.a == NULL or w.b == NULL or w.c == NULL or w.x == NULL or w.basic == NULL
            or w.pot == NULL or w.seen == NULL or w.prev == NULL or w.queue == NULL
            or w.ri == NULL or w.ci == NULL):
        return -1
    return 0


cdef void work_free(Work* w) noexcept nogil:
    free(w.a); free(w.b); free(w.c); free(w.x); free(w.basic)
    free(w.pot); free(w.seen); free(w.prev); free(w.queue)
    free(w.ri); free(w.ci)


cdef int _bfs(Work* w, int m, int k, int start, int goal) noexcept nogil:
    """Tree search from ``start``; fills pot (when goal < 0) or prev."""
    cdef int head = 0, tail = 1, node, jj, ii, col
    memset(w.seen, 0, (m + k) * sizeof(char))
    w.seen[start] = 1
    w.queue[0] = start
    w.prev[start] = -1
    if goal < 0:
        w.pot[start] = 0.0
    while head < tail:
        node = w.queue[head]
        head += 1
        if node == goal:
            return 0
        if node < m:
            for jj in range(k):
                if w.basic[node * k + jj] and not w.seen[m + jj]:
                    w.seen[m + jj] = 1
                    w.prev[m + jj] = node
                    if goal < 0:
                        w.pot[m + jj] = w.c[node * k + jj] - w.pot[node]
                    w.queue[tail] = m + jj
                    tail += 1
        else:
            col = node - m
            for ii in range(m):
                if w.basic[ii * k + col] and not w.seen[ii]:
                    w.seen[ii] = 1
                    w.prev[ii] = node
                    if goal < 0:
                        w.pot[ii] = w.c[ii * k + col] - w.pot[node]
                    w.queue[tail] = ii
                    tail += 1
    return 0


cdef int _solve(Work* w, int m, int k) noexcept nogil:
    """Optimal basic plan into w.x / w.basic; a, b, c are the m x k subproblem."""
    cdef int i = 0, j = 0, it, ea, eb, node, p, t, length, cell, leave
    cdef int max_iter = 50 * (m + k) * (m + k) + 100
    cdef double q, theta
    memset(w.x, 0, m * k * sizeof(double))
    memset(w.basic, 0, m * k * sizeof(char))
    while True:
        q = w.a[i] if w.a[i] <= w.b[j] else w.b[j]
        w.x[i * k + j] = q
        w.basic[i * k + j] = 1
        w.a[i] -= q
        w.b[j] -= q
        if i == m - 1 and j == k - 1:
            break
        if j == k - 1 or (i < m - 1 and w.a[i] == 0.0):
            i += 1
        else:
            j += 1

    for it in range(max_iter):
        _bfs(w, m, k, 0, -1)
        ea = -1
        eb = -1
        for i in range(m):
            for j in range(k):
                if not w.basic[i * k + j] and w.c[i * k + j] - w.pot[i] - w.pot[m + j] < -EPS:
                    ea = i
                    eb = j
                    break
            if ea >= 0:
                break
        if ea < 0:
            return 0
        _bfs(w, m, k, ea, m + eb)
        # walk back from the goal column; store path nodes in queue[] reversed
        length = 0
        node = m + eb
        while node != -1:
            w.queue[length] = node
            length += 1
            node = w.prev[node]
        # queue[length-1] is the start row; cell t joins nodes (length-1-t, length-2-t)
        theta = -1.0
        leave = -1
        for t in range(length - 1):
            node = w.queue[length - 1 - t]
            p = w.queue[length - 2 - t]
            cell = node * k + (p - m) if node < m else p * k + (node - m)
            if t % 2 == 0:
                if leave < 0 or w.x[cell] < theta or (w.x[cell] == theta and cell < leave):
                    theta = w.x[cell]
                    leave = cell
        for t in range(length - 1):
            node = w.queue[length - 1 - t]
            p = w.queue[length - 2 - t]
            cell = node * k + (p - m) if node < m else p * k + (node - m)
            if t % 2 == 0:
                w.x[cell] -= theta
            else:
                w.x[cell] += theta
        w.x[ea * k + eb] += theta
        w.x[leave] = 0.0
        w.basic[leave] = 0
        w.basic[ea * k + eb] = 1
    return -1


cdef double _kantorovich(Work* w, const double[:] mu, const double[:] nu,
                         const double[:, :] cost) noexcept nogil:
    cdef int n = mu.shape[0], m = 0, k = 0, i, j
    cdef double val = 0.0
    for i in range(n):
        if mu[i] > 0.0:
            w.ri[m] = i
            w.a[m] = mu[i]
            m += 1
        if nu[i] > 0.0:
            w.ci[k] = i
            w.b[k] = nu[i]
            k += 1
    for i in range(m):
        for j in range(k):
            w.c[i * k + j] = cost[w.ri[i], w.ci[j]]
    if _solve(w, m, k) != 0:
        return -1.0
    for i in range(m * k):
        if w.basic[i]:
            val += w.c[i] * w.x[i]
    return val


def kantorovich_value(const double[:] mu, const double[:] nu, const double[:, :] cost):
    """Optimal transport cost between float marginals over one support."""
    cdef Work w
    cdef double val
    if work_init(&w, mu.shape[0]) != 0:
        work_free(&w)
        raise MemoryError()
    with nogil:
        val = _kantorovich(&w, mu, nu, cost)
    work_free(&w)
    if val < 0.0:
        raise RuntimeError("transportation simplex did not terminate")
    return val


def g_sweep(const double[:, :] tau, const double[:, :] alpha, const int[:, :] kind,
            const double[:, :] d, double[:, :] out, int start=0, int step=1):
    """One synchronous application of the distance operator into ``out``.

    Only rows ``start, start + step, ...`` (and their mirrored entries) are
    written, so disjoint strides can run on separate threads.
    """
    cdef int n = tau.shape[0], i, j, failed = 0
    cdef double a, v, kd
    cdef Work w
    if work_init(&w, n) != 0:
        work_free(&w)
        raise MemoryError()
    with nogil:
        i = start
        while i < n:
            out[i, i] = 0.0
            for j in range(i + 1, n):
                if kind[i, j] == _ONE:
                    v = 1.0
                elif kind[i, j] == _ZERO:
                    v = 0.0
                else:
                    a = alpha[i, j]
                    if a >= 1.0:
                        v = 1.0
                    else:
                        kd = _kantorovich(&w, tau[i], tau[j], d)
                        if kd < 0.0:
                            failed = 1
                            kd = 0.0
                        v = a + (1.0 - a) * kd
                out[i, j] = v
                out[j, i] = v
            i += step
    work_free(&w)
    if failed:
        raise RuntimeError("transportation simplex did not terminate")
