"""Experiment frame, transverse projector and transition dipole vectors.

All directions are complex 3-vectors in the lab frame. The beam triad is
(a1, a2, k) with a2 = a1 x k; polarizations live in span{a1, a2}. Because
the grazing angle is a few mrad, incident, reflected and transmitted beams
share the propagation direction k for polarization purposes.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGeometryError

UNIT_TOL = 1e-9

# Polarization class of transition mu = 1..6 (sigma-, pi0, sigma+ pattern of
# the M1 sextet, lowest transition energy first).
TRANSITION_POLARIZATIONS = ("sigma-", "pi0", "sigma+", "sigma-", "pi0", "sigma+")


def _as_vec(v) -> np.ndarray:
    vec = np.asarray(v, dtype=complex)
    if vec.shape != (3,):
        raise InvalidGeometryError(f"expected a 3-vector, got shape {vec.shape}")
    return vec


def norm(v) -> float:
    v = _as_vec(v)
    return float(np.sqrt(np.real(np.vdot(v, v))))


def normalize(v) -> np.ndarray:
    v = _as_vec(v)
    n = norm(v)
    if n == 0.0:
        raise InvalidGeometryError("cannot normalize the zero vector")
    return v / n


def _check_unit(v, name: str) -> np.ndarray:
    v = _as_vec(v)
    if abs(norm(v) - 1.0) > UNIT_TOL:
        raise InvalidGeometryError(f"{name} must be a unit vector (|{name}| = {norm(v):.6g})")
    return v


@dataclass(frozen=True)
class ExperimentGeometry:
    """Orthonormal beam triad plus polarization and magnetization axes.

    k is the propagation direction, a1 the surface-normal component
    transverse to it, a2 = a1 x k. a_in / a_out are the incident and
    detected polarizations (unit, transverse to k). b_axis is the real
    hyperfine magnetization direction, or None for unmagnetized samples.
    Instances are immutable and safe for concurrent reads.
    """

    k: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    a_in: np.ndarray
    a_out: np.ndarray
    b_axis: np.ndarray | None = field(default=None)

    def __post_init__(self):
        for name in ("k", "a1", "a2", "a_in", "a_out"):
            vec = _check_unit(getattr(self, name), name)
            vec.setflags(write=False)
            object.__setattr__(self, name, vec)
        cross = np.cross(self.a1, self.k)
        if np.max(np.abs(cross - self.a2)) > UNIT_TOL:
            raise InvalidGeometryError("a2 must equal a1 x k")
        for name in ("a1", "a_in", "a_out"):
            if abs(np.vdot(self.k, getattr(self, name))) > UNIT_TOL:
                raise InvalidGeometryError(f"{name} must be transverse to k")
        if self.b_axis is not None:
            b = _check_unit(self.b_axis, "b_axis")
            if np.max(np.abs(b.imag)) > UNIT_TOL:
                raise InvalidGeometryError("b_axis must be a real direction")
            b = b.real.astype(float)
            b.setflags(write=False)
            object.__setattr__(self, "b_axis", b)


def build_frame(surface_normal, propagation, a_in=None, a_out=None, b_axis=None) -> ExperimentGeometry:
    """Build the experiment frame from the layer normal and beam direction.

    Inputs need not be normalized. The grazing angle is ignored for the
    polarization plane: k is taken along the in-plane beam direction and
    a1 along the transverse part of the surface normal. a_in/a_out default
    to a1. Raises InvalidGeometryError for zero or parallel inputs.
    """
    normal = _as_vec(surface_normal)
    prop = _as_vec(propagation)
    if np.max(np.abs(normal.imag)) > UNIT_TOL or np.max(np.abs(prop.imag)) > UNIT_TOL:
        raise InvalidGeometryError("surface normal and propagation must be real directions")
    if norm(normal) == 0.0 or norm(prop) == 0.0:
        raise InvalidGeometryError("surface normal and propagation must be nonzero")
    k = normalize(prop)
    a1 = normal - (normal @ k) * k
    if norm(a1) < 1e-12 * norm(normal):
        raise InvalidGeometryError("surface normal parallel to propagation direction")
    a1 = normalize(a1)
    a2 = np.cross(a1, k)
    a_in = a1 if a_in is None else normalize(a_in)
    a_out = a1 if a_out is None else normalize(a_out)
    b = None if b_axis is None else normalize(b_axis)
    return ExperimentGeometry(k=k, a1=a1, a2=a2, a_in=a_in, a_out=a_out, b_axis=b)


def transverse_projector(k) -> np.ndarray:
    """Projector onto the plane transverse to the unit vector k.

    P = 1 - |k><k| built from outer products, so P is Hermitian,
    idempotent and annihilates k.
    """
    k = _check_unit(k, "k")
    proj = np.eye(3, dtype=complex) - np.outer(k, np.conj(k))
    proj.setflags(write=False)
    return proj


def magnetization_frame(b_axis, azimuth: float = 0.0):
    """Right-handed orthonormal frame (x_b, y_b, b) around the quantization axis.

    x_b is built by Gram-Schmidt against a fixed reference (z, falling back
    to x when b is parallel to z) and then rotated by `azimuth` about b.
    The azimuth is a pure gauge: all observables are invariant under it.
    """
    b = _check_unit(b_axis, "b_axis")
    if np.max(np.abs(b.imag)) > UNIT_TOL:
        raise InvalidGeometryError("quantization axis must be real")
    b = b.real.astype(float)
    ref = np.array([0.0, 0.0, 1.0])
    if abs(b @ ref) > 1.0 - 1e-9:
        ref = np.array([1.0, 0.0, 0.0])
    x_b = ref - (ref @ b) * b
    x_b = x_b / np.sqrt(x_b @ x_b)
    y_b = np.cross(b, x_b)
    if azimuth != 0.0:
        c, s = np.cos(azimuth), np.sin(azimuth)
        x_b, y_b = c * x_b + s * y_b, -s * x_b + c * y_b
    return x_b, y_b, b


def dipole_vectors(b_axis, azimuth: float = 0.0, classes=TRANSITION_POLARIZATIONS) -> np.ndarray:
    """Lab-frame unit dipole vectors of the six transitions, shape (6, 3).

    Spherical basis with Condon-Shortley phases relative to the
    quantization axis b: pi0 -> b, sigma+ -> -(x_b + i y_b)/sqrt(2),
    sigma- -> (x_b - i y_b)/sqrt(2). Absolute phases are a gauge choice;
    every reflectance observable is invariant under `azimuth`.
    """
    x_b, y_b, b = magnetization_frame(b_axis, azimuth)
    basis = {
        "pi0": b.astype(complex),
        "sigma+": -(x_b + 1j * y_b) / np.sqrt(2.0),
        "sigma-": (x_b - 1j * y_b) / np.sqrt(2.0),
    }
    out = np.array([basis[c] for c in classes])
    out.setflags(write=False)
    return out


def projected_overlap(left, projector, right) -> complex:
    """conj(left) . P . right with scalar complex arithmetic.

    Avoids BLAS fused-multiply-add reassociation so that the symmetric
    cancellations behind decoupled polarization blocks (magnetization
    parallel or perpendicular to k) produce exact zeros, not 1e-17 dust.
    """
    total = 0j
    for a in range(3):
        projected = 0j
        for b in range(3):
            p_ab = complex(projector[a, b])
            if p_ab != 0j:
                projected += p_ab * complex(right[b])
        if projected != 0j:
            total += complex(left[a]).conjugate() * projected
    return total


def geometry_coupling(mu: int, nu: int, projector, dipoles, cg) -> complex:
    """Coupling weight c_mu c_nu (d_mu* . P . d_nu) for transitions mu, nu in 1..6."""
    if not (1 <= mu <= 6 and 1 <= nu <= 6):
        raise IndexError("transition indices must lie in 1..6")
    i, j = mu - 1, nu - 1
    return cg[i] * cg[j] * projected_overlap(dipoles[i], projector, dipoles[j])


def coupling_matrix(projector, dipoles, cg) -> np.ndarray:
    """6x6 Gram matrix G with G[mu, nu] = c_mu c_nu (d_mu* . P . d_nu).

    Hermitian and positive semidefinite for any projector P = B B* with
    B the transverse basis; exact zero blocks appear between polarization
    classes whenever the magnetization is parallel or perpendicular to k.
    """
    n = len(dipoles)
    out = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            out[i, j] = cg[i] * cg[j] * projected_overlap(dipoles[i], projector, dipoles[j])
    return out
