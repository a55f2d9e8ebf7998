"""Bounded convex domains: membership, dilations, boundary distance and the
volume of the symmetric overlap ``m(D ∩ (x - D))``.

Every domain carries an explicit ``scale`` so that dilations about the origin
(``2D``, ``D/2``) are cheap value copies.  Arrays of points have shape
``(..., n)``; scalar-point calls return scalars.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np
import shapely
from scipy import optimize

KINDS = ("BoxN", "Polygon2D", "Disc2D", "SmoothCurve2D")

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


# --------------------------------------------------------------------------
# Boundary parametrisations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RawCurve:
    """A closed C² curve s ↦ c(s), s ∈ [0, 1], with vectorised derivatives."""

    point: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    second: Callable[[np.ndarray], np.ndarray]
    description: dict = field(default_factory=dict)
    # For star-shaped curves c(s) = r(2πs)(cos 2πs, sin 2πs): the radius r(θ).
    polar_radius: Callable[[np.ndarray], np.ndarray] | None = None


def _cross(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


class BoundaryParam:
    """Constant-speed parametrisation γ:[0,1] → ℝ² of a closed convex curve.

    ``|γ'(t)| == total_length`` for every t and the orientation is
    counterclockwise.
    """

    def __init__(self, raw: RawCurve, intervals: int = 2048):
        self.raw = raw
        s = np.linspace(0.0, 1.0, intervals + 1)
        speed = lambda x: np.linalg.norm(raw.deriv(x), axis=-1)
        half = 0.5 / intervals
        mids = (s[:-1] + s[1:]) / 2
        pts = mids[:, None] + half * _GL_NODES[None, :]
        pieces = (speed(pts) * _GL_WEIGHTS).sum(axis=1) * half
        self._s = s
        self._ell = np.concatenate([[0.0], np.cumsum(pieces)])
        self._speed = speed
        self.total_length = float(self._ell[-1])

        gap = np.linalg.norm(raw.point(np.array(0.0)) - raw.point(np.array(1.0)))
        if gap > 1e-10 * max(1.0, self.total_length):
            raise ValueError(f"curve is not closed (gap {gap:.3g})")
        area2 = (_cross(raw.point(pts), raw.deriv(pts)) * _GL_WEIGHTS).sum() * half
        if area2 <= 0:
            raise ValueError("curve must be oriented counterclockwise")
        self.enclosed_area = float(area2 / 2)

        probe = np.linspace(0.0, 1.0, 8192, endpoint=False)
        d1, d2 = raw.deriv(probe), raw.second(probe)
        kappa = _cross(d1, d2) / np.linalg.norm(d1, axis=-1) ** 3
        if kappa.min() <= 0:
            raise ValueError("curve must have strictly positive curvature")
        self.curvature_bounds = (float(kappa.min()), float(kappa.max()))

    def _param(self, t):
        """Raw parameter s whose arc length from s=0 equals t·L."""
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        target = t * self.total_length
        k = np.clip(np.searchsorted(self._ell, target, side="right") - 1, 0, len(self._s) - 2)
        s0, s1 = self._s[k], self._s[k + 1]
        l0, l1 = self._ell[k], self._ell[k + 1]
        v0, v1 = 1.0 / self._speed(s0), 1.0 / self._speed(s1)
        dl = l1 - l0
        x = (target - l0) / dl
        h00, h10 = 2 * x**3 - 3 * x**2 + 1, x**3 - 2 * x**2 + x
        h01, h11 = -2 * x**3 + 3 * x**2, x**3 - x**2
        s = h00 * s0 + h10 * dl * v0 + h01 * s1 + h11 * dl * v1
        for _ in range(2):
            half = (s - s0) / 2
            pts = s0[..., None] + half[..., None] * (_GL_NODES + 1)
            ell = l0 + (self._speed(pts) * _GL_WEIGHTS).sum(axis=-1) * half
            s = s - (ell - target) / self._speed(s)
        return s

    def eval(self, t):
        return self.raw.point(self._param(t))

    def deriv(self, t):
        s = self._param(t)
        d = self.raw.deriv(s)
        return self.total_length * d / np.linalg.norm(d, axis=-1)[..., None]

    def second_deriv(self, t):
        s = self._param(t)
        d1, d2 = self.raw.deriv(s), self.raw.second(s)
        sp = np.linalg.norm(d1, axis=-1)[..., None]
        u = d1 / sp
        normal_part = d2 - (d2 * u).sum(axis=-1)[..., None] * u
        return self.total_length**2 * normal_part / sp**2


class CircleParam(BoundaryParam):
    """Closed-form constant-speed parametrisation of a circle."""

    def __init__(self, radius: float = 1.0, center=(0.0, 0.0)):
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)
        self.total_length = 2 * math.pi * self.radius
        self.enclosed_area = math.pi * self.radius**2
        self.curvature_bounds = (1 / self.radius, 1 / self.radius)
        r, c = self.radius, self.center
        self.raw = RawCurve(
            lambda s: c + r * np.stack([np.cos(2 * np.pi * s), np.sin(2 * np.pi * s)], -1),
            lambda s: 2 * np.pi * r * np.stack([-np.sin(2 * np.pi * s), np.cos(2 * np.pi * s)], -1),
            lambda s: -4 * np.pi**2 * r * np.stack([np.cos(2 * np.pi * s), np.sin(2 * np.pi * s)], -1),
            {"type": "circle", "radius": r, "center": c.tolist()},
        )

    def _param(self, t):
        return np.mod(np.asarray(t, dtype=float), 1.0)

    def deriv(self, t):
        return self.raw.deriv(self._param(t))

    def second_deriv(self, t):
        return self.raw.second(self._param(t))


def arclength_reparametrize(curve: RawCurve, intervals: int = 2048) -> BoundaryParam:
    """Constant-speed reparametrisation of a closed, strictly convex C² curve."""
    return BoundaryParam(curve, intervals)


def ellipse_curve(a: float, b: float) -> RawCurve:
    w = 2 * np.pi
    return RawCurve(
        lambda s: np.stack([a * np.cos(w * s), b * np.sin(w * s)], -1),
        lambda s: w * np.stack([-a * np.sin(w * s), b * np.cos(w * s)], -1),
        lambda s: -w * w * np.stack([a * np.cos(w * s), b * np.sin(w * s)], -1),
        {"type": "ellipse", "a": a, "b": b},
    )


def radial_fourier_curve(r0: float, cos_coeffs=(), sin_coeffs=()) -> RawCurve:
    """Star-shaped curve r(θ)(cos θ, sin θ) with a trigonometric radius."""
    cc = np.asarray(cos_coeffs, dtype=float)
    sc = np.asarray(sin_coeffs, dtype=float)
    k = np.arange(1, max(len(cc), len(sc)) + 1)
    cc = np.pad(cc, (0, len(k) - len(cc)))
    sc = np.pad(sc, (0, len(k) - len(sc)))

    def radius(theta, order):
        kt = np.multiply.outer(theta, k)
        cos, sin = np.cos(kt), np.sin(kt)
        if order == 0:
            return r0 + (cc * cos + sc * sin).sum(axis=-1)
        if order == 1:
            return (k * (sc * cos - cc * sin)).sum(axis=-1)
        return (-k**2 * (cc * cos + sc * sin)).sum(axis=-1)

    def point(s):
        th = 2 * np.pi * np.asarray(s, dtype=float)
        r = radius(th, 0)
        return np.stack([r * np.cos(th), r * np.sin(th)], -1)

    def deriv(s):
        th = 2 * np.pi * np.asarray(s, dtype=float)
        r, dr = radius(th, 0), radius(th, 1)
        c, sn = np.cos(th), np.sin(th)
        return 2 * np.pi * np.stack([dr * c - r * sn, dr * sn + r * c], -1)

    def second(s):
        th = 2 * np.pi * np.asarray(s, dtype=float)
        r, dr, ddr = radius(th, 0), radius(th, 1), radius(th, 2)
        c, sn = np.cos(th), np.sin(th)
        x = ddr * c - 2 * dr * sn - r * c
        y = ddr * sn + 2 * dr * c - r * sn
        return 4 * np.pi**2 * np.stack([x, y], -1)

    return RawCurve(point, deriv, second,
                    {"type": "radial_fourier", "r0": r0, "cos": cc.tolist(), "sin": sc.tolist()},
                    lambda theta: radius(np.asarray(theta, dtype=float), 0))


# --------------------------------------------------------------------------
# Domains
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConvexDomain:
    kind: str
    dimension: int
    scale: float = 1.0
    half_widths: np.ndarray | None = None
    center: np.ndarray | None = None
    radius: float | None = None
    vertices: np.ndarray | None = None
    curve: BoundaryParam | None = None
    # Linear map L with (unscaled) domain = L(unit disc); set for ellipses.
    disc_map: np.ndarray | None = None

    def scaled(self, q: float) -> "ConvexDomain":
        if q <= 0:
            raise ValueError("scale factor must be positive")
        return replace(self, scale=self.scale * q)

    # effective geometry --------------------------------------------------
    @property
    def eff_center(self) -> np.ndarray:
        if self.center is None:
            return np.zeros(self.dimension)
        return self.scale * self.center

    @property
    def eff_half_widths(self):
        return self.scale * self.half_widths

    @property
    def eff_radius(self):
        return self.scale * self.radius

    @property
    def eff_vertices(self):
        return self.scale * self.vertices

    def boundary(self) -> BoundaryParam:
        """Boundary parametrisation of the unscaled base set (planar domains)."""
        if self.kind == "Disc2D":
            return CircleParam(self.radius, self.center)
        if self.kind == "SmoothCurve2D":
            return self.curve
        raise ValueError(f"{self.kind} has no smooth boundary parametrisation")

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "BoxN":
            c, w = self.eff_center, self.eff_half_widths
            return c - w, c + w
        if self.kind == "Polygon2D":
            v = self.eff_vertices
            return v.min(axis=0), v.max(axis=0)
        if self.kind == "Disc2D":
            c, r = self.eff_center, self.eff_radius
            return c - r, c + r
        if self.disc_map is not None:
            ext = self.scale * np.linalg.norm(self.disc_map, axis=1)
            return -ext, ext
        pts = self.scale * self.curve.eval(np.linspace(0, 1, 8192, endpoint=False))
        pad = 1e-9 * np.abs(pts).max()
        return pts.min(axis=0) - pad, pts.max(axis=0) + pad

    def volume(self) -> float:
        if self.kind == "BoxN":
            return float(np.prod(2 * self.eff_half_widths))
        if self.kind == "Polygon2D":
            return polygon_area(self.eff_vertices)
        if self.kind == "Disc2D":
            return math.pi * self.eff_radius**2
        return self.scale**2 * self.curve.enclosed_area

    def diameter(self) -> float:
        if self.kind == "BoxN":
            return float(2 * np.linalg.norm(self.eff_half_widths))
        if self.kind == "Disc2D":
            return 2 * self.eff_radius
        pts = self.boundary_points(1024)
        if self.kind == "Polygon2D":
            pts = self.eff_vertices
        d = pts[:, None, :] - pts[None, :, :]
        return float(np.sqrt((d**2).sum(-1)).max())

    def symmetry_center(self) -> np.ndarray | None:
        """Centre of central symmetry, or None when the domain is not symmetric."""
        if self.kind in ("BoxN", "Disc2D"):
            return self.eff_center
        if self.kind == "SmoothCurve2D":
            if self.disc_map is not None:
                return np.zeros(2)
            t = np.linspace(0, 1, 257)[:-1]
            p = self.curve.eval(t)
            q = -self.curve.eval(t + 0.5)
            if np.allclose(p, q, atol=1e-10 * np.abs(p).max()):
                return np.zeros(2)
            return None
        v = self.eff_vertices
        if len(v) % 2:
            return None
        c = v.mean(axis=0)
        half = len(v) // 2
        if np.allclose(v[:half] + v[half:], 2 * c, atol=1e-12 * np.abs(v).max()):
            return c
        return None

    def boundary_points(self, count: int) -> np.ndarray:
        """Points on the boundary, roughly evenly spread."""
        if self.kind == "BoxN":
            n = self.dimension
            per_face = max(2, int(round((count / (2 * n)) ** (1 / max(n - 1, 1)))))
            lo, hi = self.bounding_box()
            out = []
            for axis in range(n):
                grids = np.meshgrid(*[np.linspace(lo[k], hi[k], per_face) for k in range(n) if k != axis],
                                    indexing="ij") if n > 1 else []
                flat = [g.ravel() for g in grids]
                m = flat[0].size if flat else 1
                for side in (lo[axis], hi[axis]):
                    cols, it = [], iter(flat)
                    for k in range(n):
                        cols.append(np.full(m, side) if k == axis else next(it))
                    out.append(np.stack(cols, -1))
            return np.concatenate(out)
        if self.kind == "Polygon2D":
            v = self.eff_vertices
            w = np.roll(v, -1, axis=0)
            per = max(1, count // len(v))
            s = np.linspace(0, 1, per, endpoint=False)
            return (v[:, None, :] + s[None, :, None] * (w - v)[:, None, :]).reshape(-1, 2)
        t = np.linspace(0, 1, count, endpoint=False)
        if self.kind == "Disc2D":
            return self.eff_center + self.eff_radius * np.stack([np.cos(2 * np.pi * t), np.sin(2 * np.pi * t)], -1)
        return self.scale * self.curve.eval(t)


def box(half_widths, center=None) -> ConvexDomain:
    w = np.atleast_1d(np.asarray(half_widths, dtype=float))
    if np.any(w <= 0):
        raise ValueError("box half-widths must be positive")
    c = np.zeros_like(w) if center is None else np.asarray(center, dtype=float)
    return ConvexDomain("BoxN", len(w), half_widths=w, center=c)


def polygon(vertices) -> ConvexDomain:
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        raise ValueError("polygon needs at least three planar vertices")
    e = np.roll(v, -1, axis=0) - v
    turns = _cross(e, np.roll(e, -1, axis=0))
    if np.all(turns < 0):
        v = v[::-1].copy()
    elif not np.all(turns > 0):
        raise ValueError("polygon vertices are not in strictly convex position")
    return ConvexDomain("Polygon2D", 2, vertices=v)


def disc(radius: float = 1.0, center=(0.0, 0.0)) -> ConvexDomain:
    if radius <= 0:
        raise ValueError("radius must be positive")
    return ConvexDomain("Disc2D", 2, radius=float(radius), center=np.asarray(center, dtype=float))


def smooth_domain(raw: RawCurve, disc_map=None) -> ConvexDomain:
    param = arclength_reparametrize(raw)
    return ConvexDomain("SmoothCurve2D", 2, curve=param,
                        disc_map=None if disc_map is None else np.asarray(disc_map, dtype=float))


def ellipse(a: float, b: float) -> ConvexDomain:
    return smooth_domain(ellipse_curve(a, b), disc_map=np.diag([a, b]))


def domain_from_dict(spec: dict) -> ConvexDomain:
    kind = spec["kind"]
    scale = float(spec.get("scale", 1.0))
    if kind == "BoxN":
        dom = box(spec["half_widths"], spec.get("center"))
    elif kind == "Polygon2D":
        dom = polygon(spec["vertices"])
    elif kind == "Disc2D":
        dom = disc(spec.get("radius", 1.0), spec.get("center", (0.0, 0.0)))
    elif kind == "SmoothCurve2D":
        c = spec["curve"]
        if c["type"] == "ellipse":
            dom = ellipse(c["a"], c["b"])
        elif c["type"] == "radial_fourier":
            dom = smooth_domain(radial_fourier_curve(c["r0"], c.get("cos", ()), c.get("sin", ())))
        else:
            raise ValueError(f"unknown curve type {c['type']!r}")
    else:
        raise ValueError(f"unknown domain kind {kind!r}; expected one of {KINDS}")
    if "dimension" in spec and int(spec["dimension"]) != dom.dimension:
        raise ValueError("declared dimension does not match geometry")
    return dom.scaled(scale) if scale != 1.0 else dom


def domain_to_dict(dom: ConvexDomain) -> dict:
    out = {"kind": dom.kind, "dimension": dom.dimension, "scale": dom.scale}
    if dom.kind == "BoxN":
        out.update(half_widths=dom.half_widths.tolist(), center=dom.center.tolist())
    elif dom.kind == "Polygon2D":
        out["vertices"] = dom.vertices.tolist()
    elif dom.kind == "Disc2D":
        out.update(radius=dom.radius, center=dom.center.tolist())
    else:
        out["curve"] = dom.curve.raw.description
    return out


def load_domain(source) -> ConvexDomain:
    if isinstance(source, dict):
        return domain_from_dict(source)
    return domain_from_dict(json.loads(Path(source).read_text()))


# --------------------------------------------------------------------------
# Planar polygon helpers
# --------------------------------------------------------------------------

def polygon_area(v: np.ndarray) -> float:
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return float(0.5 * (np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def clip_convex(subject: list, clip: list) -> list:
    """Sutherland–Hodgman clipping of a polygon against a CCW convex polygon.

    Both polygons are lists of (x, y) tuples; plain floats keep this fast for
    the handful of vertices involved.
    """
    out = subject
    m = len(clip)
    for k in range(m):
        if not out:
            break
        ax, ay = clip[k]
        bx, by = clip[(k + 1) % m]
        ex, ey = bx - ax, by - ay
        inp, out = out, []
        px, py = inp[-1]
        pin = ex * (py - ay) - ey * (px - ax)
        for qx, qy in inp:
            qin = ex * (qy - ay) - ey * (qx - ax)
            if qin >= 0:
                if pin < 0:
                    s = pin / (pin - qin)
                    out.append((px + s * (qx - px), py + s * (qy - py)))
                out.append((qx, qy))
            elif pin >= 0:
                s = pin / (pin - qin)
                out.append((px + s * (qx - px), py + s * (qy - py)))
            px, py, pin = qx, qy, qin
    return out


def _shoelace(pts: list) -> float:
    s = 0.0
    n = len(pts)
    for k in range(n):
        x0, y0 = pts[k]
        x1, y1 = pts[(k + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------

def _as_points(dom: ConvexDomain, x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != dom.dimension:
        raise ValueError(f"expected points of dimension {dom.dimension}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("points must be finite")
    return x


def polar_coordinates(dom: ConvexDomain, x):
    """(r, t) with x = r·γ(t), γ the (scaled) boundary; requires 0 ∈ D."""
    x = _as_points(dom, x)
    if dom.kind == "Disc2D" and not np.any(dom.center):
        r = np.linalg.norm(x, axis=-1) / dom.eff_radius
        t = np.mod(np.arctan2(x[..., 1], x[..., 0]) / (2 * np.pi), 1.0)
        return r, t
    if dom.kind not in ("Disc2D", "SmoothCurve2D"):
        raise ValueError("polar coordinates need a planar domain with a smooth boundary")
    gamma = dom.boundary()
    table = _angle_table(gamma)
    theta = np.mod(np.arctan2(x[..., 1], x[..., 0]), 2 * np.pi)
    t_tab, th_tab = table
    shifted = np.where(theta < th_tab[0], theta + 2 * np.pi, theta)
    t = np.interp(shifted, th_tab, t_tab)
    nx = x / np.maximum(np.linalg.norm(x, axis=-1), 1e-300)[..., None]
    for _ in range(4):
        g, dg = gamma.eval(t), gamma.deriv(t)
        f = np.arctan2(_cross(g, nx), (g * nx).sum(-1))
        fp = -_cross(g, dg) / (g * g).sum(-1)
        t = t - f / fp
    t = np.mod(t, 1.0)
    r = np.linalg.norm(x, axis=-1) / (dom.scale * np.linalg.norm(gamma.eval(t), axis=-1))
    return r, t


_ANGLE_CACHE: dict[int, tuple] = {}


def _angle_table(gamma: BoundaryParam):
    key = id(gamma)
    if key not in _ANGLE_CACHE:
        t = np.linspace(0, 1, 4097)
        p = gamma.eval(t)
        th = np.unwrap(np.arctan2(p[:, 1], p[:, 0]))
        if th[0] < 0:
            th = th + 2 * np.pi
        _ANGLE_CACHE[key] = (t, th)
    return _ANGLE_CACHE[key]


def contains(dom: ConvexDomain, x):
    """Membership in the open (scaled) domain."""
    x = _as_points(dom, x)
    if dom.kind == "BoxN":
        out = np.all(np.abs(x - dom.eff_center) < dom.eff_half_widths, axis=-1)
    elif dom.kind == "Polygon2D":
        v = dom.eff_vertices
        e = np.roll(v, -1, axis=0) - v
        rel = x[..., None, :] - v
        out = np.all(e[:, 0] * rel[..., 1] - e[:, 1] * rel[..., 0] > 0, axis=-1)
    elif dom.kind == "Disc2D":
        out = np.linalg.norm(x - dom.eff_center, axis=-1) < dom.eff_radius
    elif dom.disc_map is not None:
        y = np.linalg.solve(dom.scale * dom.disc_map, x[..., None])[..., 0] if x.ndim > 1 else \
            np.linalg.solve(dom.scale * dom.disc_map, x)
        out = np.linalg.norm(y, axis=-1) < 1
    elif dom.curve.raw.polar_radius is not None:
        theta = np.arctan2(x[..., 1], x[..., 0])
        out = np.linalg.norm(x, axis=-1) < dom.scale * dom.curve.raw.polar_radius(theta)
    else:
        r, _ = polar_coordinates(dom, x)
        out = r < 1
    return bool(out) if np.ndim(out) == 0 else out


def lens_area(d, radius: float = 1.0):
    """Area of the intersection of two discs of equal radius at centre distance d."""
    d = np.asarray(d, dtype=float)
    u = np.clip(d / (2 * radius), 0.0, 1.0)
    phi = 2 * np.arccos(u)
    series = phi**3 / 6 - phi**5 / 120 + phi**7 / 5040 - phi**9 / 362880
    core = np.where(phi < 1e-2, series, phi - np.sin(phi))
    out = radius**2 * core
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    stderr: float
    samples: int


def _overlap_polygon(dom: ConvexDomain, x) -> float:
    v = dom.eff_vertices
    if len(v) > 64:
        body = shapely.Polygon(v)
        return float(body.intersection(shapely.Polygon(np.asarray(x, dtype=float) - v)).area)
    subject = [(float(a), float(b)) for a, b in v]
    xr = float(x[0]), float(x[1])
    # x - D is the point reflection of D; reversing keeps it counterclockwise.
    reflected = [(xr[0] - a, xr[1] - b) for a, b in subject]
    pts = clip_convex(subject, reflected)
    return max(_shoelace(pts), 0.0) if len(pts) >= 3 else 0.0


def intersection_volume(dom: ConvexDomain, x, method: str = "exact",
                        samples: int = 10**6, seed: int | None = None,
                        polygon_vertices: int = 4096):
    """m(D ∩ (x − D)).

    ``method='exact'`` is available for boxes, polygons, discs and ellipses and
    returns a float (or array for several points).  ``'monte_carlo'`` returns a
    :class:`VolumeEstimate`; ``'polygonal'`` clips an inscribed polygon with
    ``polygon_vertices`` corners (smooth curves only).
    """
    x = _as_points(dom, x)
    if method == "monte_carlo":
        if samples <= 0:
            raise ValueError("sample count must be positive")
        if x.ndim != 1:
            raise ValueError("monte_carlo takes a single point")
        return _overlap_monte_carlo(dom, x, int(samples), seed)
    if method == "polygonal":
        if dom.kind != "SmoothCurve2D":
            return intersection_volume(dom, x, "exact")
        poly = polygon(dom.boundary_points(polygon_vertices))
        return intersection_volume(poly, x, "exact")
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")

    if dom.kind == "BoxN":
        gap = 2 * dom.eff_half_widths - np.abs(x - 2 * dom.eff_center)
        out = np.prod(np.clip(gap, 0.0, None), axis=-1)
    elif dom.kind == "Disc2D":
        d = np.linalg.norm(x - 2 * dom.eff_center, axis=-1)
        out = lens_area(d, dom.eff_radius)
    elif dom.kind == "Polygon2D":
        flat = x.reshape(-1, 2)
        out = np.array([_overlap_polygon(dom, p) for p in flat]).reshape(x.shape[:-1])
    elif dom.disc_map is not None:
        lin = dom.scale * dom.disc_map
        y = np.einsum("ij,...j->...i", np.linalg.inv(lin), x)
        out = abs(np.linalg.det(lin)) * np.asarray(lens_area(np.linalg.norm(y, axis=-1), 1.0))
    else:
        raise ValueError("no exact intersection volume for a general smooth curve; "
                         "use method='monte_carlo' or 'polygonal'")
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def _overlap_monte_carlo(dom, x, samples, seed):
    rng = np.random.default_rng(seed)
    lo, hi = dom.bounding_box()
    box_vol = float(np.prod(hi - lo))
    hits = 0
    left = samples
    while left > 0:
        m = min(left, 500_000)
        pts = lo + (hi - lo) * rng.random((m, dom.dimension))
        inside = contains(dom, pts)
        if np.any(inside):
            inside[inside] &= contains(dom, x - pts[inside])
        hits += int(np.count_nonzero(inside))
        left -= m
    p = hits / samples
    return VolumeEstimate(box_vol * p, box_vol * math.sqrt(p * (1 - p) / samples), samples)


def dist_to_boundary(dom: ConvexDomain, x):
    """Euclidean distance from a point of the closed domain to its boundary."""
    x = _as_points(dom, x)
    tol = 1e-12 * max(1.0, float(np.abs(x).max()))
    if x.ndim > 1:
        return np.array([dist_to_boundary(dom, p) for p in x.reshape(-1, dom.dimension)]).reshape(x.shape[:-1])
    if dom.kind == "BoxN":
        d = float(np.min(dom.eff_half_widths - np.abs(x - dom.eff_center)))
    elif dom.kind == "Polygon2D":
        v = dom.eff_vertices
        e = np.roll(v, -1, axis=0) - v
        n = np.stack([-e[:, 1], e[:, 0]], -1) / np.linalg.norm(e, axis=1)[:, None]
        d = float(np.min(((x - v) * n).sum(-1)))
    elif dom.kind == "Disc2D":
        d = float(dom.eff_radius - np.linalg.norm(x - dom.eff_center))
    else:
        r, _ = polar_coordinates(dom, x)
        if r > 1 + tol:
            raise ValueError("point lies outside the domain")
        gamma, q = dom.curve, dom.scale
        t = np.linspace(0, 1, 2048, endpoint=False)
        dist = np.linalg.norm(q * gamma.eval(t) - x, axis=-1)
        k = int(np.argmin(dist))
        f = lambda s: float(np.linalg.norm(q * gamma.eval(s) - x))
        step = 1.0 / 2048
        res = optimize.minimize_scalar(f, bracket=(t[k] - step, t[k], t[k] + step),
                                       method="golden", tol=1e-12)
        d = min(float(res.fun), float(dist[k]))
    if d < -tol:
        raise ValueError("point lies outside the domain")
    return max(d, 0.0)
