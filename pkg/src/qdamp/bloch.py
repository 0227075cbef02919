"""One-qubit amplitude-damping geometry on the Bloch sphere.

A pure qubit state is a point r on the unit sphere S2, parametrized by the
polar angle theta (measured from the north pole, the ground state) and the
azimuthal angle phi.  Amplitude damping of strength gamma acts affinely on
the Bloch ball,

    x' = sqrt(1-gamma) x,  y' = sqrt(1-gamma) y,  z' = (1-gamma) z + gamma,

shrinking the vector and translating it toward the north pole.  Projecting
the damped vector radially back onto the surface, r'' = r'/|r'|, turns the
channel into a deterministic nonlinear map of the sphere.  The azimuthal
angle is passive, so the map reduces to theta -> theta' with

    cos(theta') = ((1-gamma) cos(theta) + gamma) / N(theta),
    N(theta)^2  = (1-gamma) sin^2(theta) + ((1-gamma) cos(theta) + gamma)^2,

where N is the norm of the damped vector.  The local area scaling of the
composed map has the closed form

    L(theta; gamma) = (1-gamma) |1 - gamma (1 - cos theta)| / N(theta)^3,

which is below 1 in a cap around the north pole and, exactly when
0 < gamma < 3/4, above 1 in a region around the south pole.  The boundary
angle where L = 1 has no simple closed form and is found by bracketing and
bisection.

All functions here are pure functions of their arguments with no shared
mutable state; they are safe to call concurrently.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import UndefinedPointError, ZeroNormError

TWO_PI = 2.0 * math.pi

# Slack for "is on or inside the unit ball" checks.
NORM_SLACK = 1e-12

# Below this norm a Bloch vector is treated as the maximally mixed state,
# whose radial projection is undefined.
ZERO_NORM_CUTOFF = 1e-12

# The area-expansion region disappears at this damping strength.
EXPANSION_THRESHOLD = 0.75


def _gamma_value(g) -> float:
    """Accept either a bare float or a DampingParameter."""
    gamma = g.gamma if isinstance(g, DampingParameter) else float(g)
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"damping strength must lie in [0, 1], got {gamma}")
    return gamma


@dataclass(frozen=True)
class DampingParameter:
    """Amplitude-damping strength gamma in [0, 1]; `a` is the survival 1-gamma."""

    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", float(self.gamma))
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"damping strength must lie in [0, 1], got {self.gamma}")

    @property
    def a(self) -> float:
        return 1.0 - self.gamma


@dataclass(frozen=True)
class BlochVector:
    """Cartesian Bloch vector; valid states satisfy |r| <= 1."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "z", float(self.z))
        if self.norm() > 1.0 + NORM_SLACK:
            raise ValueError(f"Bloch vector has norm {self.norm()} > 1")

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class PurePoint:
    """Point on the sphere surface: theta in [0, pi], phi normalized to [0, 2*pi)."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = float(self.theta)
        if -NORM_SLACK <= theta < 0.0:
            theta = 0.0
        elif math.pi < theta <= math.pi + NORM_SLACK:
            theta = math.pi
        if not 0.0 <= theta <= math.pi:
            raise ValueError(f"polar angle must lie in [0, pi], got {theta}")
        phi = float(self.phi) % TWO_PI
        if phi >= TWO_PI:  # fmod can round up to the modulus itself
            phi -= TWO_PI
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)


@dataclass
class ExpansionProfile:
    """Area-expansion factor sampled on a uniform polar grid for one gamma."""

    gamma: float
    thetas: np.ndarray
    lambdas: np.ndarray
    log_lambdas: np.ndarray
    theta_c: float | None

    def to_csv(self) -> str:
        lines = ["theta,lambda,log_lambda"]
        for t, lam, ll in zip(self.thetas, self.lambdas, self.log_lambdas):
            lines.append(f"{format_float(t)},{format_float(lam)},{format_float(ll)}")
        return "\n".join(lines) + "\n"

    def to_json_doc(self) -> dict:
        # JSON has no -inf, so nonfinite log values are emitted as null.
        grid = [
            [float(t), float(lam), float(ll) if math.isfinite(ll) else None]
            for t, lam, ll in zip(self.thetas, self.lambdas, self.log_lambdas)
        ]
        return {"gamma": self.gamma, "theta_c": self.theta_c, "grid": grid}


def format_float(x: float) -> str:
    """Shortest decimal string that round-trips back to the same double."""
    return repr(float(x))


def bloch_from_angles(p: PurePoint) -> BlochVector:
    """Unit Cartesian vector (sin t cos p, sin t sin p, cos t) of a surface point."""
    s = math.sin(p.theta)
    return BlochVector(s * math.cos(p.phi), s * math.sin(p.phi), math.cos(p.theta))


def angles_from_bloch(r: BlochVector) -> PurePoint:
    """Angular coordinates of a nonzero Bloch vector; phi is 0 at the poles."""
    n = r.norm()
    if n < ZERO_NORM_CUTOFF:
        raise ZeroNormError("cannot assign angles to a zero Bloch vector")
    ct = min(1.0, max(-1.0, r.z / n))
    theta = math.acos(ct)
    phi = math.atan2(r.y, r.x) % TWO_PI
    if phi >= TWO_PI:
        phi -= TWO_PI
    return PurePoint(theta, phi)


def ad_affine(r: BlochVector, g) -> BlochVector:
    """Affine Bloch-ball action of the damping channel: contract and lift in z."""
    gamma = _gamma_value(g)
    sa = math.sqrt(1.0 - gamma)
    return BlochVector(sa * r.x, sa * r.y, (1.0 - gamma) * r.z + gamma)


def purity(r: BlochVector) -> float:
    """Tr(rho^2) = (1 + |r|^2) / 2; ranges from 1/2 (mixed) to 1 (pure)."""
    n = r.norm()
    return 0.5 * (1.0 + n * n)


def _damped_norm_squared(cos_theta: float, gamma: float) -> float:
    # Sum of two nonnegative terms: (1-g) sin^2 t + ((1-g) cos t + g)^2.
    # Unlike the expanded 1 - g(1-g)(1-cos t)^2 form this has no cancellation,
    # so it stays accurate arbitrarily close to (gamma=1/2, theta=pi).
    u = 1.0 - cos_theta
    transverse = (1.0 - gamma) * u * (1.0 + cos_theta)
    axial = cos_theta + gamma * u
    return transverse + axial * axial


def intermediate_norm(theta: float, g) -> float:
    """Norm N(theta) of the damped image of a surface point; phi-independent."""
    gamma = _gamma_value(g)
    return math.sqrt(_damped_norm_squared(math.cos(theta), gamma))


def renormalize(r: BlochVector) -> BlochVector:
    """Radial projection r / |r| onto the sphere surface.

    Raises ZeroNormError for the maximally mixed state, where no direction is
    preferred.  That input arises exactly when the south pole is damped with
    gamma = 1/2.
    """
    n = r.norm()
    if n < ZERO_NORM_CUTOFF:
        raise ZeroNormError("radial projection of the maximally mixed state is undefined")
    return BlochVector(r.x / n, r.y / n, r.z / n)


def f_gamma(p: PurePoint, g) -> PurePoint:
    """Damping followed by radial projection, as a map of the sphere surface.

    phi is unchanged; theta maps through cos(theta') = ((1-g) cos t + g)/N(t).
    The single undefined point (gamma = 1/2, theta = pi) raises
    UndefinedPointError instead of returning a NaN.
    """
    gamma = _gamma_value(g)
    c = math.cos(p.theta)
    n2 = _damped_norm_squared(c, gamma)
    if n2 <= 0.0:
        raise UndefinedPointError(
            "the damped vector has zero norm (gamma = 1/2 at the south pole)"
        )
    ct = (c + gamma * (1.0 - c)) / math.sqrt(n2)
    ct = min(1.0, max(-1.0, ct))
    return PurePoint(math.acos(ct), p.phi)


def dtheta_dtheta(theta: float, g) -> float:
    """Signed derivative of the polar-angle map theta -> theta'.

    Equal to sqrt(1-g) (1 - g (1 - cos t)) / N(t)^2.  The sign flips for
    gamma > 1/2 near the south pole, where the map folds the pole through
    the axis; area bookkeeping uses the absolute value.
    """
    gamma = _gamma_value(g)
    c = math.cos(theta)
    n2 = _damped_norm_squared(c, gamma)
    if n2 <= 0.0:
        raise UndefinedPointError(
            "derivative undefined where the damped vector has zero norm"
        )
    return math.sqrt(1.0 - gamma) * (1.0 - gamma * (1.0 - c)) / n2


def lambda_factor(theta: float, g) -> float:
    """Local area expansion factor of the renormalized map.

    L(t; g) = (1-g) |1 - g (1 - cos t)| / N(t)^3.  Values above 1 mark
    expanding regions, values below 1 contracting ones.  At theta = 0 the
    closed form evaluates to 1 - gamma, the continuous limit of the
    (sin theta'/sin theta) |dtheta'/dtheta| definition.
    """
    gamma = _gamma_value(g)
    c = math.cos(theta)
    n2 = _damped_norm_squared(c, gamma)
    if n2 <= 0.0:
        raise UndefinedPointError(
            "expansion factor undefined where the damped vector has zero norm"
        )
    return (1.0 - gamma) * abs(1.0 - gamma * (1.0 - c)) / (n2 * math.sqrt(n2))


def expansion_exists(g) -> bool:
    """True when some polar angle expands area, i.e. 0 < gamma < 3/4."""
    gamma = _gamma_value(g)
    return 0.0 < gamma < EXPANSION_THRESHOLD


def _lambda_or_inf(theta: float, gamma: float) -> float:
    try:
        return lambda_factor(theta, gamma)
    except UndefinedPointError:
        return math.inf


def theta_c(g, scan_points: int = 4096, tol: float = 1e-12) -> float | None:
    """Boundary angle where the expansion factor crosses 1, or None.

    For 0 < gamma < 3/4 the factor is below 1 at the north pole and above 1
    at the south pole, so a crossing exists; it is bracketed on a uniform
    scan grid and refined by bisection to `tol` in theta.  Outside that
    range of gamma there is no expanding region and None is returned.  If
    the scan grid shows more than one crossing, a warning reports it and the
    crossing closest to the north pole is returned.
    """
    gamma = _gamma_value(g)
    if not expansion_exists(gamma):
        return None
    grid = np.linspace(0.0, math.pi, scan_points)
    vals = [_lambda_or_inf(t, gamma) - 1.0 for t in grid]

    up_brackets = []
    crossings = 0
    for i in range(scan_points - 1):
        lo, hi = vals[i], vals[i + 1]
        if (lo < 0.0 <= hi) or (lo > 0.0 >= hi):
            crossings += 1
            if lo < 0.0 <= hi:
                up_brackets.append(i)
    if crossings > 1:
        warnings.warn(
            f"expansion boundary scan found {crossings} crossings for "
            f"gamma={gamma}; returning the one nearest the north pole",
            RuntimeWarning,
        )
    if not up_brackets:
        return None

    i = up_brackets[0]
    a, b = float(grid[i]), float(grid[i + 1])
    fa = vals[i]
    if vals[i + 1] == 0.0:
        return b
    while b - a > tol:
        mid = 0.5 * (a + b)
        fm = _lambda_or_inf(mid, gamma) - 1.0
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (fa < 0.0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def expansion_profile(g, resolution: int) -> ExpansionProfile:
    """Expansion factor on a uniform theta grid including both poles.

    Each grid value is the scalar `lambda_factor`, so recomputation
    reproduces the profile bit for bit.  For gamma = 1/2 the grid endpoint
    theta = pi is the undefined point and UndefinedPointError propagates.
    """
    gamma = _gamma_value(g)
    if resolution < 2:
        raise ValueError(f"resolution must be at least 2, got {resolution}")
    thetas = np.linspace(0.0, math.pi, resolution)
    lambdas = np.array([lambda_factor(t, gamma) for t in thetas])
    with np.errstate(divide="ignore"):
        log_lambdas = np.log(lambdas)
    return ExpansionProfile(gamma, thetas, lambdas, log_lambdas, theta_c(gamma))


def sphere_map_triples(profile: ExpansionProfile, phi_points: int) -> np.ndarray:
    """(theta, phi, log lambda) rows covering the sphere.

    The factor does not depend on phi, so the polar profile is replicated
    over a uniform azimuthal grid; useful for full-sphere color maps.
    """
    if phi_points < 1:
        raise ValueError(f"phi_points must be positive, got {phi_points}")
    phis = np.linspace(0.0, TWO_PI, phi_points, endpoint=False)
    rows = np.empty((len(profile.thetas) * phi_points, 3))
    k = 0
    for t, ll in zip(profile.thetas, profile.log_lambdas):
        for p in phis:
            rows[k] = (t, p, ll)
            k += 1
    return rows


def lambda_north(g) -> float:
    """Expansion factor at the north pole: 1 - gamma."""
    return lambda_factor(0.0, g)


def lambda_south(g) -> float:
    """Expansion factor at the south pole: (1-gamma)/|1-2 gamma|^2.

    Diverges as gamma -> 1/2; at gamma = 1/2 exactly the point is undefined
    and UndefinedPointError is raised.
    """
    return lambda_factor(math.pi, g)
