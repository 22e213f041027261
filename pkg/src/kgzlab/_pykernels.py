"""Pure NumPy RK4 stepper, same contract as the compiled ``_kernels`` module."""
from __future__ import annotations

import numpy as np

BACKEND = "numpy"


class _Rhs:
    def __init__(self, N, length, c0, dealias):
        j = np.fft.fftfreq(N) * N
        k = 2 * np.pi * j / length
        self.N = N
        self.lap = -k ** 2
        self.lap_h = -k[: N // 2 + 1] ** 2
        keep = np.abs(j) <= N / 3.0
        self.mask = keep.astype(float)
        self.mask_h = self.mask[: N // 2 + 1].copy()
        self.c0sq = c0 * c0
        self.dealias = dealias

    def __call__(self, y):
        N = self.N
        u = y[: 2 * N].view(complex)
        v = y[2 * N: 4 * N].view(complex)
        n = y[4 * N: 5 * N]
        m = y[5 * N:]
        nu = n * u
        sq = u.real ** 2 + u.imag ** 2
        if self.dealias:
            nu = np.fft.ifft(self.mask * np.fft.fft(nu))
            sq = np.fft.irfft(self.mask_h * np.fft.rfft(sq), n=N)
        dv = np.fft.ifft(self.lap * np.fft.fft(u)) - u - nu
        dn = np.fft.irfft(self.lap_h * np.fft.rfft(m), n=N)
        dm = self.c0sq * (n + sq)
        return np.concatenate([v.view(float), dv.view(float), dn, dm])


def advance(y, length, dt, nsteps, c0=1.0, dealias=True, blowup=1e6):
    """RK4-advance the packed state ``y`` in place.

    Returns ``(steps_taken, blew_up)``.
    """
    if y.ndim != 1 or y.dtype != np.float64 or not y.flags.c_contiguous:
        raise ValueError("packed state must be a contiguous float64 vector")
    N = y.shape[0] // 6
    if 6 * N != y.shape[0] or N < 2 or N % 2:
        raise ValueError("packed state must have length 6N with N even")
    f = _Rhs(N, length, c0, dealias)
    for s in range(int(nsteps)):
        k = f(y)
        acc = y + dt / 6.0 * k
        k = f(y + 0.5 * dt * k)
        acc += dt / 3.0 * k
        k = f(y + 0.5 * dt * k)
        acc += dt / 3.0 * k
        k = f(y + dt * k)
        y[:] = acc + dt / 6.0 * k
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > blowup:
            return s + 1, True
    return int(nsteps), False
