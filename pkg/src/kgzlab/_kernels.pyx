# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""FFTW-backed RK4 stepper for the first-order KGZ system.

The state is packed as one float64 vector ``[u (interleaved re/im), v
(interleaved), n, m]`` of length ``6N`` and advanced in place.
"""
from libc.math cimport fabs, isfinite, M_PI
from libc.string cimport memcpy
from libc.stdlib cimport malloc, free

cdef extern from "fftw3.h":
    ctypedef double fftw_complex[2]
    ctypedef void* fftw_plan
    fftw_plan fftw_plan_dft_1d(int n, fftw_complex* inp, fftw_complex* out, int sign, unsigned flags)
    fftw_plan fftw_plan_dft_r2c_1d(int n, double* inp, fftw_complex* out, unsigned flags)
    fftw_plan fftw_plan_dft_c2r_1d(int n, fftw_complex* inp, double* out, unsigned flags)
    void fftw_execute(const fftw_plan p) nogil
    void fftw_destroy_plan(fftw_plan p)
    void* fftw_malloc(size_t n)
    void fftw_free(void* p)
    int FFTW_FORWARD
    int FFTW_BACKWARD
    unsigned FFTW_ESTIMATE

BACKEND = "fftw"


cdef struct Work:
    int N
    int Nh
    int dealias
    double c0sq
    double* cbuf
    double* rbuf
    double* hbuf
    fftw_plan cf
    fftw_plan cb
    fftw_plan rf
    fftw_plan rb
    double* lap      # -k²/N, full spectrum
    double* lap_h    # -k²/N, half spectrum
    double* mask     # dealias mask / N
    double* mask_h
    double* tmpc
    double* tmpr


cdef void c_filter(Work* w, const double* x, double* out, const double* sym) noexcept nogil:
    cdef int j
    memcpy(w.cbuf, x, 2 * w.N * sizeof(double))
    fftw_execute(w.cf)
    for j in range(w.N):
        w.cbuf[2 * j] *= sym[j]
        w.cbuf[2 * j + 1] *= sym[j]
    fftw_execute(w.cb)
    memcpy(out, w.cbuf, 2 * w.N * sizeof(double))


cdef void r_filter(Work* w, const double* x, double* out, const double* sym) noexcept nogil:
    cdef int j
    memcpy(w.rbuf, x, w.N * sizeof(double))
    fftw_execute(w.rf)
    for j in range(w.Nh):
        w.hbuf[2 * j] *= sym[j]
        w.hbuf[2 * j + 1] *= sym[j]
    fftw_execute(w.rb)
    memcpy(out, w.rbuf, w.N * sizeof(double))


cdef void rhs(Work* w, const double* y, double* dy) noexcept nogil:
    cdef int i
    cdef int N = w.N
    cdef const double* u = y
    cdef const double* v = y + 2 * N
    cdef const double* n = y + 4 * N
    cdef const double* m = y + 5 * N
    cdef double* du = dy
    cdef double* dv = dy + 2 * N
    cdef double* dn = dy + 4 * N
    cdef double* dm = dy + 5 * N
    memcpy(du, v, 2 * N * sizeof(double))
    c_filter(w, u, dv, w.lap)
    for i in range(N):
        w.tmpc[2 * i] = n[i] * u[2 * i]
        w.tmpc[2 * i + 1] = n[i] * u[2 * i + 1]
    if w.dealias:
        c_filter(w, w.tmpc, w.tmpc, w.mask)
    for i in range(2 * N):
        dv[i] -= u[i] + w.tmpc[i]
    r_filter(w, m, dn, w.lap_h)
    for i in range(N):
        w.tmpr[i] = u[2 * i] * u[2 * i] + u[2 * i + 1] * u[2 * i + 1]
    if w.dealias:
        r_filter(w, w.tmpr, w.tmpr, w.mask_h)
    for i in range(N):
        dm[i] = w.c0sq * (n[i] + w.tmpr[i])


cdef long rk4(Work* w, double* y, double dt, long nsteps, double blowup,
             double* k, double* ytmp, double* acc) noexcept nogil:
    """Advance ``y``; return the number of steps taken, negated on blow-up."""
    cdef long s
    cdef int i
    cdef int M = 6 * w.N
    cdef double h2 = 0.5 * dt
    cdef double h6 = dt / 6.0
    cdef double h3 = dt / 3.0
    for s in range(nsteps):
        rhs(w, y, k)
        for i in range(M):
            acc[i] = y[i] + h6 * k[i]
            ytmp[i] = y[i] + h2 * k[i]
        rhs(w, ytmp, k)
        for i in range(M):
            acc[i] += h3 * k[i]
            ytmp[i] = y[i] + h2 * k[i]
        rhs(w, ytmp, k)
        for i in range(M):
            acc[i] += h3 * k[i]
            ytmp[i] = y[i] + dt * k[i]
        rhs(w, ytmp, k)
        for i in range(M):
            y[i] = acc[i] + h6 * k[i]
        for i in range(M):
            if not isfinite(y[i]) or fabs(y[i]) > blowup:
                return -(s + 1)
    return nsteps


def advance(double[::1] y, double length, double dt, long nsteps, double c0=1.0,
            bint dealias=True, double blowup=1e6):
    """RK4-advance the packed state ``y`` in place.

    Returns ``(steps_taken, blew_up)``.
    """
    cdef int N = y.shape[0] // 6
    if 6 * N != y.shape[0] or N < 2 or N % 2:
        raise ValueError("packed state must have length 6N with N even")
    cdef Work w
    cdef int j, Nh = N // 2 + 1
    cdef double kk, jj
    w.N = N
    w.Nh = Nh
    w.dealias = dealias
    w.c0sq = c0 * c0
    w.cbuf = <double*> fftw_malloc(2 * N * sizeof(double))
    w.rbuf = <double*> fftw_malloc(N * sizeof(double))
    w.hbuf = <double*> fftw_malloc(2 * Nh * sizeof(double))
    cdef double* scratch = <double*> malloc((23 * N + 2 * Nh) * sizeof(double))
    if w.cbuf == NULL or w.rbuf == NULL or w.hbuf == NULL or scratch == NULL:
        raise MemoryError()
    w.lap = scratch
    w.mask = scratch + N
    w.lap_h = scratch + 2 * N
    w.mask_h = scratch + 2 * N + Nh
    w.tmpc = scratch + 2 * N + 2 * Nh
    w.tmpr = w.tmpc + 2 * N
    cdef double* k = w.tmpr + N
    cdef double* ytmp = k + 6 * N
    cdef double* acc = ytmp + 6 * N
    for j in range(N):
        jj = j if j < N // 2 else j - N
        kk = 2.0 * M_PI * jj / length
        w.lap[j] = -kk * kk / N
        w.mask[j] = (1.0 / N) if fabs(jj) <= N / 3.0 else 0.0
    for j in range(Nh):
        jj = j if j < N // 2 else j - N
        kk = 2.0 * M_PI * jj / length
        w.lap_h[j] = -kk * kk / N
        w.mask_h[j] = (1.0 / N) if fabs(jj) <= N / 3.0 else 0.0
    w.cf = fftw_plan_dft_1d(N, <fftw_complex*> w.cbuf, <fftw_complex*> w.cbuf, FFTW_FORWARD, FFTW_ESTIMATE)
    w.cb = fftw_plan_dft_1d(N, <fftw_complex*> w.cbuf, <fftw_complex*> w.cbuf, FFTW_BACKWARD, FFTW_ESTIMATE)
    w.rf = fftw_plan_dft_r2c_1d(N, w.rbuf, <fftw_complex*> w.hbuf, FFTW_ESTIMATE)
    w.rb = fftw_plan_dft_c2r_1d(N, <fftw_complex*> w.hbuf, w.rbuf, FFTW_ESTIMATE)
    cdef long res
    with nogil:
        res = rk4(&w, &y[0], dt, nsteps, blowup, k, ytmp, acc)
    fftw_destroy_plan(w.cf)
    fftw_destroy_plan(w.cb)
    fftw_destroy_plan(w.rf)
    fftw_destroy_plan(w.rb)
    fftw_free(w.cbuf)
    fftw_free(w.rbuf)
    fftw_free(w.hbuf)
    free(scratch)
    if res < 0:
        return -res, True
    return res, False
