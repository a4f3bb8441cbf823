# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled scan kernel: per-point assembly and LU solve of the coherence system.

Contract identical to nucav._kernel_py.scan_reflectance. The linear system is
at most 8x8, so a fixed-size Gaussian elimination with partial pivoting on
stack buffers avoids all per-point allocation.
"""

from libc.math cimport sqrt

import numpy as np

DEF MAXDIM = 8


def scan_reflectance(energies, double gamma, w, b_unit, d_vec, delta, delta_c,
                     double kappa, double kappa_r, double complex pol):
    cdef const double[::1] e_v = np.ascontiguousarray(energies, dtype=np.float64)
    cdef const double complex[:, ::1] w_v = np.ascontiguousarray(w, dtype=np.complex128)
    cdef const double complex[::1] b_v = np.ascontiguousarray(b_unit, dtype=np.complex128)
    cdef const double complex[::1] d_v = np.ascontiguousarray(d_vec, dtype=np.complex128)
    cdef const double[::1] delta_v = np.ascontiguousarray(delta, dtype=np.float64)
    cdef const double[::1] dc_v = np.ascontiguousarray(delta_c, dtype=np.float64)

    cdef Py_ssize_t m = e_v.shape[0]
    cdef Py_ssize_t n = delta_v.shape[0]
    if m > MAXDIM:
        raise ValueError(f"kernel supports at most {MAXDIM} states, got {m}")

    out = np.empty(n, dtype=np.complex128)
    ok = np.ones(n, dtype=np.uint8)
    cdef double complex[::1] out_v = out
    cdef unsigned char[::1] ok_v = ok

    cdef double complex a[MAXDIM][MAXDIM]
    cdef double complex rhs[MAXDIM]
    cdef double complex z, inv_z, coup, fac, acc, r_el, drive, swp
    cdef double sq2kr = sqrt(2.0 * kappa_r)
    cdef double amax, mag, big
    cdef Py_ssize_t i, row, col, k, piv
    cdef bint singular

    for i in range(n):
        z = kappa + 1j * dc_v[i]
        inv_z = 1.0 / z
        coup = 1j * inv_z
        r_el = (2.0 * kappa_r * inv_z - 1.0) * pol
        if m == 0:
            out_v[i] = r_el
            continue
        drive = sq2kr * inv_z

        amax = 0.0
        for row in range(m):
            for col in range(m):
                a[row][col] = coup * w_v[row, col]
            a[row][row] = a[row][row] + (delta_v[i] - e_v[row] + 0.5j * gamma)
            rhs[row] = drive * b_v[row]
            for col in range(m):
                mag = abs(a[row][col])
                if mag > amax:
                    amax = mag

        # Gaussian elimination with partial pivoting; pivot rule fixed so the
        # output is bit-reproducible for identical inputs.
        singular = amax == 0.0
        for col in range(m):
            if singular:
                break
            piv = col
            big = abs(a[col][col])
            for row in range(col + 1, m):
                mag = abs(a[row][col])
                if mag > big:
                    big = mag
                    piv = row
            if big <= 1e-14 * amax:
                singular = True
                break
            if piv != col:
                for k in range(col, m):
                    swp = a[col][k]
                    a[col][k] = a[piv][k]
                    a[piv][k] = swp
                swp = rhs[col]
                rhs[col] = rhs[piv]
                rhs[piv] = swp
            for row in range(col + 1, m):
                fac = a[row][col] / a[col][col]
                for k in range(col + 1, m):
                    a[row][k] = a[row][k] - fac * a[col][k]
                rhs[row] = rhs[row] - fac * rhs[col]

        if singular:
            out_v[i] = <double complex> (float("nan") + 1j * float("nan"))
            ok_v[i] = 0
            continue

        for col in range(m - 1, -1, -1):
            acc = rhs[col]
            for k in range(col + 1, m):
                acc = acc - a[col][k] * rhs[k]
            rhs[col] = acc / a[col][col]

        acc = 0.0
        for k in range(m):
            acc = acc + d_v[k] * rhs[k]
        out_v[i] = r_el + (-1j * sq2kr * inv_z) * acc

    return out, ok
