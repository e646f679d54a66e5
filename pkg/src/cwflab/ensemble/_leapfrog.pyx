# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kick-drift-kick integrator for the radial equations of motion."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _force(int system, double m, double k, double l2, double r) nogil:
    # -dV_eff/dr
    if system == 0:
        return -k / (r * r) + l2 / (m * r * r * r)
    return -k * r + l2 / (m * r * r * r)


def leapfrog(int system, double m, double coupling, double l, double r0, double p0,
             double phi0, double dt, Py_ssize_t n_steps):
    """Integrate ``n_steps`` steps; returns ``(r, p_r, phi)`` arrays of length ``n_steps + 1``.

    ``system`` is 0 for Kepler, 1 for the oscillator.  ``phi`` is accumulated
    with the trapezoid rule on ``l / (m r**2)``.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r_out = np.empty(n_steps + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p_out = np.empty(n_steps + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] phi_out = np.empty(n_steps + 1)
    cdef double r = r0, p = p0, phi = phi0, w_old, w_new
    cdef double l2 = l * l, half = 0.5 * dt, c_phi = 0.5 * dt * l / m
    cdef Py_ssize_t i
    r_out[0] = r
    p_out[0] = p
    phi_out[0] = phi
    with nogil:
        w_old = 1.0 / (r * r)
        for i in range(n_steps):
            p += half * _force(system, m, coupling, l2, r)
            r += dt * p / m
            p += half * _force(system, m, coupling, l2, r)
            w_new = 1.0 / (r * r)
            phi += c_phi * (w_old + w_new)
            w_old = w_new
            r_out[i + 1] = r
            p_out[i + 1] = p
            phi_out[i + 1] = phi
    return r_out, p_out, phi_out
