"""Perturbed outer boundaries ``r = 1 + g(theta)`` and their measures.

On the unit circle the outward normal is ``x`` itself, so the normal graph
``x + g(x) n(x)`` is the polar graph ``(1 + g(theta)) (cos theta, sin theta)``.
``g`` is stored as a truncated Fourier series without a constant term.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .analytic import DEFAULT_MARGIN, MIN_COLLOCATION
from .errors import GeometryError

PARITIES = ("general", "even")


@lru_cache(maxsize=32)
def nodes(M: int) -> np.ndarray:
    """Equispaced collocation angles ``2 pi j / M`` on ``[0, 2 pi)``."""
    t = 2 * np.pi * np.arange(M) / M
    t.setflags(write=False)
    return t


@lru_cache(maxsize=32)
def trig_tables(K: int, M: int):
    """``cos(k theta_j)`` and ``sin(k theta_j)`` for ``k = 1..K``, shape ``(M, K)``."""
    kt = np.outer(nodes(M), np.arange(1, K + 1))
    c, s = np.cos(kt), np.sin(kt)
    c.setflags(write=False)
    s.setflags(write=False)
    return c, s


def default_collocation(K: int) -> int:
    return max(2 * K + 1, MIN_COLLOCATION)


@dataclass(frozen=True, eq=False)
class FourierBoundary:
    """``g(theta) = sum_k cos[k-1] cos(k theta) + sin[k-1] sin(k theta)``."""

    cos: np.ndarray
    sin: np.ndarray
    parity: str = "general"

    def __post_init__(self):
        c = np.array(self.cos, dtype=float).ravel()
        s = np.array(self.sin, dtype=float).ravel()
        if c.shape != s.shape:
            raise GeometryError(f"cos/sin length mismatch: {c.size} vs {s.size}")
        if self.parity not in PARITIES:
            raise GeometryError(f"parity must be one of {PARITIES}, got {self.parity!r}")
        if self.parity == "even" and np.any(s != 0.0):
            raise GeometryError("even boundary must have identically zero sine coefficients")
        c.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "cos", c)
        object.__setattr__(self, "sin", s)

    @property
    def K(self) -> int:
        return self.cos.size

    @classmethod
    def zero(cls, K, parity="even"):
        return cls(np.zeros(K), np.zeros(K), parity)

    @classmethod
    def mode(cls, K, k, amplitude=1.0, kind="cos"):
        """Single Fourier mode ``amplitude * cos(k theta)`` (or ``sin``)."""
        if not 1 <= k <= K:
            raise GeometryError(f"mode {k} outside 1..{K}")
        c, s = np.zeros(K), np.zeros(K)
        if kind == "cos":
            c[k - 1] = amplitude
            return cls(c, s, "even")
        if kind == "sin":
            s[k - 1] = amplitude
            return cls(c, s, "general")
        raise GeometryError(f"kind must be 'cos' or 'sin', got {kind!r}")

    @classmethod
    def from_cos(cls, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        return cls(coeffs, np.zeros_like(coeffs), "even")

    def vector(self):
        """Coefficients as ``[cos_1..cos_K, sin_1..sin_K]``."""
        return np.concatenate([self.cos, self.sin])

    @classmethod
    def from_vector(cls, v, parity="general"):
        v = np.asarray(v, dtype=float)
        K = v.size // 2
        return cls(v[:K], v[K:], parity)

    def __add__(self, other):
        parity = "even" if self.parity == other.parity == "even" else "general"
        return FourierBoundary(self.cos + other.cos, self.sin + other.sin, parity)

    def __sub__(self, other):
        return self + other * -1.0

    def __mul__(self, a):
        return FourierBoundary(self.cos * a, self.sin * a, self.parity)

    __rmul__ = __mul__

    def resized(self, K):
        """Zero-pad or truncate to order ``K``."""
        c, s = np.zeros(K), np.zeros(K)
        n = min(K, self.K)
        c[:n], s[:n] = self.cos[:n], self.sin[:n]
        return FourierBoundary(c, s, self.parity)

    def rotated(self, phi):
        """Coefficients of ``theta -> g(theta - phi)``."""
        k = np.arange(1, self.K + 1)
        cp, sp = np.cos(k * phi), np.sin(k * phi)
        return FourierBoundary(self.cos * cp - self.sin * sp,
                               self.cos * sp + self.sin * cp, "general")

    def __call__(self, theta, order=0):
        """Evaluate ``g`` (or its ``order``-th derivative) at ``theta``."""
        theta = np.asarray(theta, dtype=float)
        k = np.arange(1, self.K + 1)
        kt = np.multiply.outer(theta, k)
        c, s = np.cos(kt), np.sin(kt)
        return _series(c, s, self.cos, self.sin, k, order)

    def on_nodes(self, M, order=0):
        c, s = trig_tables(self.K, M)
        return _series(c, s, self.cos, self.sin, np.arange(1, self.K + 1), order)

    def sup_norm(self, M=None):
        M = M or default_collocation(self.K)
        return float(np.max(np.abs(self.on_nodes(M))))

    def to_json(self):
        return json.dumps({"K": self.K, "cos": self.cos.tolist(),
                           "sin": self.sin.tolist(), "parity": self.parity})

    @classmethod
    def from_json(cls, text):
        """Parse the boundary JSON document.

        Raises :class:`json.JSONDecodeError` (with line information) on
        malformed text and :class:`GeometryError` on schema violations.
        """
        doc = json.loads(text)
        if not isinstance(doc, dict):
            raise GeometryError("boundary document must be a JSON object")
        unknown = set(doc) - {"K", "cos", "sin", "parity"}
        if unknown:
            raise GeometryError(f"unknown boundary keys: {sorted(unknown)}")
        K = doc.get("K")
        cos = doc.get("cos", [])
        sin = doc.get("sin", [0.0] * len(cos))
        parity = doc.get("parity", "general")
        if K is None:
            K = len(cos)
        if len(cos) != K or len(sin) != K:
            raise GeometryError(f"expected {K} cos and sin coefficients, "
                                f"got {len(cos)} and {len(sin)}")
        return cls(np.array(cos, dtype=float), np.array(sin, dtype=float), parity)


def _series(c, s, a, b, k, order):
    if order == 0:
        return c @ a + s @ b
    if order == 1:
        return s @ (-k * a) + c @ (k * b)
    if order == 2:
        return c @ (-k**2 * a) + s @ (-k**2 * b)
    raise ValueError("only derivatives up to order 2 are supported")


def check_admissible(g: FourierBoundary, R=0.0, margin=DEFAULT_MARGIN, M=None):
    """Raise :class:`GeometryError` unless ``max|g| < 1 - R - margin``.

    The check runs on the collocation nodes (``M`` of them).
    """
    M = M or default_collocation(g.K)
    sup = g.sup_norm(M)
    if not sup < 1.0 - R - margin:
        raise GeometryError(
            f"boundary perturbation too large: max|g| = {sup:.6g} >= "
            f"1 - R - margin = {1.0 - R - margin:.6g}")
    return sup


def boundary_point(g: FourierBoundary, theta, R=0.0, margin=DEFAULT_MARGIN):
    """Point ``(1 + g(theta)) (cos theta, sin theta)`` of the perturbed boundary."""
    radius = 1.0 + g(theta)
    if np.any(radius <= R + margin):
        raise GeometryError(f"boundary radius {np.min(radius):.6g} <= R + margin")
    return np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=-1)


@dataclass(frozen=True)
class Measures:
    area: float
    perimeter: float
    c_g: float

    def __iter__(self):
        return iter((self.area, self.perimeter, self.c_g))


def measures(g: FourierBoundary, M=None, R=0.0, margin=DEFAULT_MARGIN) -> Measures:
    """Area, perimeter and ``c_g = -area / perimeter`` by the trapezoid rule."""
    M = M or default_collocation(g.K)
    check_admissible(g, R, margin, M)
    rho = 1.0 + g.on_nodes(M)
    drho = g.on_nodes(M, 1)
    area = np.pi * np.mean(rho**2)
    perimeter = 2 * np.pi * np.mean(np.hypot(rho, drho))
    return Measures(float(area), float(perimeter), float(-area / perimeter))


def normal_and_jacobian(g: FourierBoundary, M=None, R=0.0, margin=DEFAULT_MARGIN):
    """Outward unit normals ``(M, 2)`` and tangential Jacobian ``(M,)`` at the nodes.

    For ``gamma(theta) = rho (cos, sin)`` with ``rho = 1 + g``, the tangent is
    ``rho' e_r + rho e_theta`` and the outward normal is
    ``(rho e_r - rho' e_theta) / |gamma'|``.
    """
    M = M or default_collocation(g.K)
    check_admissible(g, R, margin, M)
    t = nodes(M)
    rho = 1.0 + g.on_nodes(M)
    drho = g.on_nodes(M, 1)
    jac = np.hypot(rho, drho)
    er = np.stack([np.cos(t), np.sin(t)], axis=1)
    et = np.stack([-np.sin(t), np.cos(t)], axis=1)
    n = (rho[:, None] * er - drho[:, None] * et) / jac[:, None]
    return n, jac


@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    """Values of a function sampled at the equispaced nodes of ``partial B_1``."""

    nodes: np.ndarray
    values: np.ndarray

    @property
    def M(self):
        return self.values.size

    def fourier(self, K):
        """Cosine and sine coefficients for modes ``1..K`` (the mean is dropped)."""
        if 2 * K + 1 > self.M:
            raise ValueError(f"order {K} aliases on {self.M} nodes")
        f = np.fft.rfft(self.values) * (2.0 / self.M)
        return f.real[1:K + 1].copy(), -f.imag[1:K + 1].copy()

    def mean(self):
        return float(np.mean(self.values))

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))
