"""Reference (pure Python / NumPy) implementations of the hot kernels.

The compiled module ``_ckernels`` mirrors these signatures exactly; the
package picks whichever is importable.
"""
import math

import numpy as np


def riccati_fixed(mu_re, mu_im, b, rho, sigma, t, n_steps):
    """Classical RK4 for the Heston Riccati pair at a (possibly complex) tilt.

    Integrates ``psi' = (mu^2 - mu)/2 + (rho*sigma*mu - b) psi + sigma^2 psi^2 / 2``
    and ``phi' = psi`` from zero on ``[0, t]`` with ``n_steps`` equal steps.
    Returns ``(phi, psi)`` as complex numbers.
    """
    mu = complex(mu_re, mu_im)
    a0 = 0.5 * (mu * mu - mu)
    a1 = rho * sigma * mu - b
    a2 = 0.5 * sigma * sigma
    h = t / n_steps
    psi = 0j
    phi = 0j
    for _ in range(n_steps):
        k1 = a0 + psi * (a1 + a2 * psi)
        p2 = psi + 0.5 * h * k1
        k2 = a0 + p2 * (a1 + a2 * p2)
        p3 = psi + 0.5 * h * k2
        k3 = a0 + p3 * (a1 + a2 * p3)
        p4 = psi + h * k3
        k4 = a0 + p4 * (a1 + a2 * p4)
        phi += h * (psi + 2.0 * p2 + 2.0 * p3 + p4) / 6.0
        psi += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    return phi, psi


def _rk4_step(psi, phi, h, a0, a1, a2):
    k1 = a0 + psi * (a1 + a2 * psi)
    p2 = psi + 0.5 * h * k1
    k2 = a0 + p2 * (a1 + a2 * p2)
    p3 = psi + 0.5 * h * k2
    k3 = a0 + p3 * (a1 + a2 * p3)
    p4 = psi + h * k3
    k4 = a0 + p4 * (a1 + a2 * p4)
    return (psi + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0,
            phi + h * (psi + 2.0 * p2 + 2.0 * p3 + p4) / 6.0)


def riccati_adaptive(mu, b, rho, sigma, t_max, tol, threshold, max_steps):
    """Step-doubling adaptive RK4 for a real tilt with blow-up detection.

    Returns ``(times, psis, phis, blow_up_time)`` where ``blow_up_time`` is
    NaN when ``|psi|`` stays below ``threshold`` on ``[0, t_max]``.
    """
    a0 = 0.5 * (mu * mu - mu)
    a1 = rho * sigma * mu - b
    a2 = 0.5 * sigma * sigma
    times = [0.0]
    psis = [0.0]
    phis = [0.0]
    t = 0.0
    psi = 0.0
    phi = 0.0
    h = min(1e-3, t_max)
    blow = math.nan
    n = 0
    while t < t_max and n < max_steps:
        n += 1
        if t + h > t_max:
            h = t_max - t
        full_psi, full_phi = _rk4_step(psi, phi, h, a0, a1, a2)
        half_psi, half_phi = _rk4_step(psi, phi, 0.5 * h, a0, a1, a2)
        two_psi, two_phi = _rk4_step(half_psi, half_phi, 0.5 * h, a0, a1, a2)
        if not (math.isfinite(two_psi) and math.isfinite(full_psi)):
            h *= 0.25
            continue
        err = abs(two_psi - full_psi) / 15.0
        scale = tol * max(1.0, abs(two_psi))
        if err > scale:
            h *= max(0.1, 0.9 * (scale / err) ** 0.2)
            continue
        if abs(two_psi) > threshold:
            # bisect the sub-step at which |psi| crosses the threshold
            lo, hi = 0.0, h
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                hp, _ = _rk4_step(psi, phi, 0.5 * mid, a0, a1, a2)
                hp2, _ = _rk4_step(hp, 0.0, 0.5 * mid, a0, a1, a2)
                if abs(hp2) > threshold:
                    hi = mid
                else:
                    lo = mid
            # beyond the crossing psi ~ 2/(sigma^2 (T - s)) to leading order
            blow = t + hi + 1.0 / (a2 * threshold)
            break
        t += h
        psi, phi = two_psi, two_phi
        times.append(t)
        psis.append(psi)
        phis.append(phi)
        if err > 0.0:
            h *= min(2.0, 0.9 * (scale / err) ** 0.2)
        else:
            h *= 2.0
    return np.asarray(times), np.asarray(psis), np.asarray(phis), blow


def heston_block(z_v, z_s, v0, a, b, sigma, rho, dt):
    """Full-truncation Euler for the variance and log-Euler for the price.

    ``z_v`` and ``z_s`` are independent standard normals of shape
    ``(n_steps, n_paths)``; the price shock is correlated internally.
    Returns terminal log-prices of shape ``(n_paths,)``.
    """
    n_steps, n_paths = z_v.shape
    x = np.zeros(n_paths)
    v = np.full(n_paths, float(v0))
    sq = math.sqrt(dt)
    rc = math.sqrt(1.0 - rho * rho)
    for i in range(n_steps):
        vp = np.maximum(v, 0.0)
        sv = np.sqrt(vp) * sq
        x += -0.5 * vp * dt + sv * (rho * z_v[i] + rc * z_s[i])
        v = v + (a - b * vp) * dt + sigma * sv * z_v[i]
    return x
