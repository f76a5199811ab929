# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pure.py``; identical signatures and arithmetic order."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, isfinite, NAN, fmax, fmin, pow

cnp.import_array()


def riccati_fixed(double mu_re, double mu_im, double b, double rho, double sigma,
                  double t, long n_steps):
    cdef double complex mu = mu_re + 1j * mu_im
    cdef double complex a0 = 0.5 * (mu * mu - mu)
    cdef double complex a1 = rho * sigma * mu - b
    cdef double a2 = 0.5 * sigma * sigma
    cdef double h = t / n_steps
    cdef double complex psi = 0, phi = 0, k1, k2, k3, k4, p2, p3, p4
    cdef long i
    for i in range(n_steps):
        k1 = a0 + psi * (a1 + a2 * psi)
        p2 = psi + 0.5 * h * k1
        k2 = a0 + p2 * (a1 + a2 * p2)
        p3 = psi + 0.5 * h * k2
        k3 = a0 + p3 * (a1 + a2 * p3)
        p4 = psi + h * k3
        k4 = a0 + p4 * (a1 + a2 * p4)
        phi += h * (psi + 2.0 * p2 + 2.0 * p3 + p4) / 6.0
        psi += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    return complex(phi), complex(psi)


cdef inline void _rk4_step(double psi, double phi, double h, double a0, double a1,
                           double a2, double* out_psi, double* out_phi) nogil:
    cdef double k1, k2, k3, k4, p2, p3, p4
    k1 = a0 + psi * (a1 + a2 * psi)
    p2 = psi + 0.5 * h * k1
    k2 = a0 + p2 * (a1 + a2 * p2)
    p3 = psi + 0.5 * h * k2
    k3 = a0 + p3 * (a1 + a2 * p3)
    p4 = psi + h * k3
    k4 = a0 + p4 * (a1 + a2 * p4)
    out_psi[0] = psi + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    out_phi[0] = phi + h * (psi + 2.0 * p2 + 2.0 * p3 + p4) / 6.0


def riccati_adaptive(double mu, double b, double rho, double sigma, double t_max,
                     double tol, double threshold, long max_steps):
    cdef double a0 = 0.5 * (mu * mu - mu)
    cdef double a1 = rho * sigma * mu - b
    cdef double a2 = 0.5 * sigma * sigma
    cdef double t = 0.0, psi = 0.0, phi = 0.0
    cdef double h = fmin(1e-3, t_max)
    cdef double blow = NAN
    cdef double full_psi, full_phi, half_psi, half_phi, two_psi, two_phi
    cdef double err, scale, lo, hi, mid, hp, hphi, hp2, hphi2
    cdef long n = 0
    cdef int j
    times = [0.0]
    psis = [0.0]
    phis = [0.0]
    while t < t_max and n < max_steps:
        n += 1
        if t + h > t_max:
            h = t_max - t
        _rk4_step(psi, phi, h, a0, a1, a2, &full_psi, &full_phi)
        _rk4_step(psi, phi, 0.5 * h, a0, a1, a2, &half_psi, &half_phi)
        _rk4_step(half_psi, half_phi, 0.5 * h, a0, a1, a2, &two_psi, &two_phi)
        if not (isfinite(two_psi) and isfinite(full_psi)):
            h *= 0.25
            continue
        err = fabs(two_psi - full_psi) / 15.0
        scale = tol * fmax(1.0, fabs(two_psi))
        if err > scale:
            h *= fmax(0.1, 0.9 * pow(scale / err, 0.2))
            continue
        if fabs(two_psi) > threshold:
            lo = 0.0
            hi = h
            for j in range(80):
                mid = 0.5 * (lo + hi)
                _rk4_step(psi, phi, 0.5 * mid, a0, a1, a2, &hp, &hphi)
                _rk4_step(hp, 0.0, 0.5 * mid, a0, a1, a2, &hp2, &hphi2)
                if fabs(hp2) > threshold:
                    hi = mid
                else:
                    lo = mid
            blow = t + hi + 1.0 / (a2 * threshold)
            break
        t += h
        psi = two_psi
        phi = two_phi
        times.append(t)
        psis.append(psi)
        phis.append(phi)
        if err > 0.0:
            h *= fmin(2.0, 0.9 * pow(scale / err, 0.2))
        else:
            h *= 2.0
    return np.asarray(times), np.asarray(psis), np.asarray(phis), blow


def heston_block(double[:, ::1] z_v, double[:, ::1] z_s, double v0, double a, double b,
                 double sigma, double rho, double dt):
    cdef Py_ssize_t n_steps = z_v.shape[0]
    cdef Py_ssize_t n_paths = z_v.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n_paths)
    cdef double[::1] x = out
    cdef double sq = sqrt(dt)
    cdef double rc = sqrt(1.0 - rho * rho)
    cdef double v, vp, sv, xx
    cdef Py_ssize_t i, j
    with nogil:
        for j in range(n_paths):
            v = v0
            xx = 0.0
            for i in range(n_steps):
                vp = fmax(v, 0.0)
                sv = sqrt(vp) * sq
                xx += -0.5 * vp * dt + sv * (rho * z_v[i, j] + rc * z_s[i, j])
                v = v + (a - b * vp) * dt + sigma * sv * z_v[i, j]
            x[j] = xx
    return out
