"""Pure-numpy scan kernel: per-point assembly and solve of the coherence system.

Fallback used when the compiled extension is unavailable (or disabled via
NUCAV_PURE_PYTHON=1). Same contract as nucav._kernel.scan_reflectance: for
every grid point i build

    A = diag(delta[i] - energies + i gamma/2) + (i / z) W,   z = kappa + i delta_c[i]

solve A x = (sqrt(2 kappa_r) / z) b_unit and return

    r[i] = (2 kappa_r / z - 1) pol + (-i sqrt(2 kappa_r) / z) (d_vec . x)

with ok[i] = 0 and r[i] = nan for points where A is numerically singular.
"""

import numpy as np


def _solve_pointwise(a, rhs):
    """Row-by-row solve used only when the batched solve hits a singular point."""
    n = a.shape[0]
    x = np.empty_like(rhs)
    ok = np.ones(n, dtype=np.uint8)
    for i in range(n):
        try:
            x[i] = np.linalg.solve(a[i], rhs[i])
        except np.linalg.LinAlgError:
            x[i] = np.nan
            ok[i] = 0
    return x, ok


def scan_reflectance(energies, gamma, w, b_unit, d_vec, delta, delta_c, kappa, kappa_r, pol):
    energies = np.asarray(energies, dtype=float)
    w = np.asarray(w, dtype=complex)
    b_unit = np.asarray(b_unit, dtype=complex)
    d_vec = np.asarray(d_vec, dtype=complex)
    delta = np.asarray(delta, dtype=float)
    delta_c = np.asarray(delta_c, dtype=float)
    n = delta.shape[0]
    m = energies.shape[0]

    z = kappa + 1j * delta_c
    inv_z = 1.0 / z
    sq2kr = np.sqrt(2.0 * kappa_r)
    r_el = (2.0 * kappa_r * inv_z - 1.0) * pol
    if m == 0:
        return r_el.astype(complex), np.ones(n, dtype=np.uint8)

    a = (1j * inv_z)[:, None, None] * w[None, :, :]
    idx = np.arange(m)
    a[:, idx, idx] += delta[:, None] - energies[None, :] + 0.5j * gamma
    rhs = (sq2kr * inv_z)[:, None] * b_unit[None, :]
    try:
        x = np.linalg.solve(a, rhs[:, :, None])[:, :, 0]
        ok = np.ones(n, dtype=np.uint8)
    except np.linalg.LinAlgError:
        x, ok = _solve_pointwise(a, rhs)

    nuclear = (-1j * sq2kr * inv_z) * (x @ d_vec)
    r = r_el + nuclear
    r[ok == 0] = np.nan
    return r, ok
