"""Pure-Python twin of the compiled leapfrog kernel."""

import numpy as np


def leapfrog(system, m, coupling, l, r0, p0, phi0, dt, n_steps):
    """Integrate ``n_steps`` steps; returns ``(r, p_r, phi)`` arrays of length ``n_steps + 1``.

    ``system`` is 0 for Kepler, 1 for the oscillator.
    """
    k = coupling
    l2 = l * l
    half = 0.5 * dt
    c_phi = 0.5 * dt * l / m
    kepler = system == 0

    r_out = [0.0] * (n_steps + 1)
    p_out = [0.0] * (n_steps + 1)
    phi_out = [0.0] * (n_steps + 1)
    r, p, phi = r0, p0, phi0
    r_out[0], p_out[0], phi_out[0] = r, p, phi
    w_old = 1.0 / (r * r)
    for i in range(1, n_steps + 1):
        if kepler:
            p += half * (-k / (r * r) + l2 / (m * r * r * r))
            r += dt * p / m
            p += half * (-k / (r * r) + l2 / (m * r * r * r))
        else:
            p += half * (-k * r + l2 / (m * r * r * r))
            r += dt * p / m
            p += half * (-k * r + l2 / (m * r * r * r))
        w_new = 1.0 / (r * r)
        phi += c_phi * (w_old + w_new)
        w_old = w_new
        r_out[i] = r
        p_out[i] = p
        phi_out[i] = phi
    return np.array(r_out), np.array(p_out), np.array(phi_out)
