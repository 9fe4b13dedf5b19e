"""Forward boundary observables: characteristic speeds along paths, travel times, DN traces."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from ..metric_core import FlowForm, HyperbolicityError, StationaryMetric, build_flow_metric
from .grid import Grid2D, SIDES
from .solver import WaveSolver, WaveState


class PathDegeneracyError(ValueError):
    """The path tangent is null for the metric (a11 = 0)."""


class TravelTimeRangeError(ValueError):
    """The requested range reaches or crosses a zero of the chosen root."""


class ConfigurationError(ValueError):
    """Boundary set-up the DN solver cannot handle (e.g. a characteristic patch)."""


# ---------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class LinePath:
    """Straight path x(s) = start + s (end - start), s in [0, 1]."""

    start: tuple
    end: tuple

    def __call__(self, s):
        s = np.asarray(s, dtype=float)[..., None]
        a, b = np.asarray(self.start, float), np.asarray(self.end, float)
        return a + s * (b - a)

    def tangent(self, s):
        s = np.asarray(s, dtype=float)
        d = np.asarray(self.end, float) - np.asarray(self.start, float)
        return np.broadcast_to(d, s.shape + d.shape).copy()


@dataclass(frozen=True)
class CurvePath:
    """Path given by callables for the point and its derivative."""

    x: Callable
    dx: Callable

    def __call__(self, s):
        return np.asarray(self.x(np.asarray(s, dtype=float)), dtype=float)

    def tangent(self, s):
        return np.asarray(self.dx(np.asarray(s, dtype=float)), dtype=float)


# ---------------------------------------------------------------------------
# characteristic speeds along a path


@dataclass
class SpeedProfile:
    sigma: np.ndarray
    plus: np.ndarray
    minus: np.ndarray
    a00: np.ndarray
    a01: np.ndarray
    a11: np.ndarray

    def vieta_residual(self) -> float:
        """Max relative defect of lambda+ lambda- = a00/a11 and lambda+ + lambda- = -2 a01/a11."""
        prod = self.plus * self.minus - self.a00 / self.a11
        tot = self.plus + self.minus + 2 * self.a01 / self.a11
        sp = np.abs(self.plus) + np.abs(self.minus)
        return float(max(np.max(np.abs(prod) / sp ** 2), np.max(np.abs(tot) / sp)))


def restricted_form(g: StationaryMetric, path, sigma):
    """(a00, a01, a11): the covariant metric restricted to span{d_t, x'(sigma)}."""
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    P = path(sigma)
    V = path.tangent(sigma)
    C = g.covariant(P)
    k = V.shape[-1]
    a00 = C[..., 0, 0]
    a01 = np.einsum("...j,...j->...", C[..., 0, 1:1 + k], V)
    a11 = np.einsum("...j,...jk,...k->...", V, C[..., 1:1 + k, 1:1 + k], V)
    return a00, a01, a11


def lambda_pm(g: StationaryMetric, path, sigma) -> SpeedProfile:
    """Roots of a11 l^2 + 2 a01 l + a00 = 0, the null slopes d sigma / dt along the path.

    ``plus`` is the larger root.  Both are computed without cancellation so
    that Vieta's relations hold to rounding.
    """
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    a00, a01, a11 = restricted_form(g, path, sigma)
    scale = np.abs(a00) + np.abs(a01) + np.abs(a11)
    if np.any(np.abs(a11) <= 1e-14 * scale):
        raise PathDegeneracyError("path tangent is null (a11 = 0)")
    disc = a01 * a01 - a00 * a11
    if np.any(disc < -1e-14 * scale ** 2):
        raise HyperbolicityError("complex characteristic speeds: the path tangent is timelike")
    root = np.sqrt(np.maximum(disc, 0.0))
    sgn = np.where(a01 >= 0, 1.0, -1.0)
    q = -(a01 + sgn * root)
    r1 = q / a11
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(q != 0, a00 / q, -r1)
    plus, minus = np.maximum(r1, r2), np.minimum(r1, r2)
    return SpeedProfile(sigma, plus, minus, a00, a01, a11)


def _root(profile: SpeedProfile, which: str) -> np.ndarray:
    if which == "plus":
        return profile.plus
    if which == "minus":
        return profile.minus
    if which == "slow":
        return np.where(np.abs(profile.plus) <= np.abs(profile.minus), profile.plus, profile.minus)
    raise ValueError("root must be 'plus', 'minus' or 'slow'")


def travel_time(g: StationaryMetric, path, sigma_target: float, root: str = "slow",
                rtol: float = 1e-12) -> float:
    """Integral of d sigma / |lambda(sigma)| from 0 to ``sigma_target``.

    The default ``slow`` root is the one that vanishes where the path meets
    the ergosphere, so the time diverges as the target approaches it.
    """
    if not 0 <= sigma_target <= 1:
        raise ValueError("sigma_target must lie in [0, 1]")
    if sigma_target == 0:
        return 0.0
    probe = np.linspace(0.0, sigma_target, 513)
    lam = _root(lambda_pm(g, path, probe), root)
    if np.any(lam == 0) or np.any(np.sign(lam) != np.sign(lam[0])):
        raise TravelTimeRangeError("the characteristic speed vanishes inside the range "
                                   "(the path crosses the ergosphere)")

    def f(s):
        return 1.0 / abs(float(_root(lambda_pm(g, path, s), root)[0]))

    # split geometrically toward the end, where the integrand may be nearly singular
    edges = [0.0]
    gap = sigma_target
    while gap > 1e-12 * max(sigma_target, 1.0) and len(edges) < 60:
        gap *= 0.5
        edges.append(sigma_target - gap)
    edges.append(sigma_target)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=200)
        total += val
    return total


# ---------------------------------------------------------------------------
# Dirichlet-to-Neumann traces


@dataclass
class DNTrace:
    times: np.ndarray
    s: np.ndarray
    values: np.ndarray
    side: str
    meta: dict = field(default_factory=dict)

    def rows(self):
        for k, t in enumerate(self.times):
            for m, s in enumerate(self.s):
                yield (t, s, self.values[k, m])


def _boundary_geometry(grid: Grid2D, side: str):
    (a1, b1), (a2, b2) = grid.window
    if side == "x1min":
        pts = np.stack([np.full(grid.n2, a1), grid.x2], -1)
        nu = np.array([-1.0, 0.0])
    elif side == "x1max":
        pts = np.stack([np.full(grid.n2, b1), grid.x2], -1)
        nu = np.array([1.0, 0.0])
    elif side == "x2min":
        pts = np.stack([grid.x1, np.full(grid.n1, a2)], -1)
        nu = np.array([0.0, -1.0])
    else:
        pts = np.stack([grid.x1, np.full(grid.n1, b2)], -1)
        nu = np.array([0.0, 1.0])
    return pts, nu


def dn_operator(g: StationaryMetric, f: Callable, window, n1: int, n2: int, T: float,
                side: str = "x1min", boundary: Optional[Sequence[str]] = None,
                cfl: float = 0.4, ko: float = 0.0, record_every: int = 1,
                sponge_width: float = 0.15, sponge_strength: float = 20.0) -> DNTrace:
    """Neumann trace on one side of a rectangle for Dirichlet data f(t, s) there.

    The trace is sum g^{jk} u_j nu_k / sqrt|g^{pr} nu_p nu_r| with nu the
    outward normal, sampled at the boundary-cell coordinates s.  Initial data
    are zero.  Normal derivatives use the second-order one-sided formula
    through the boundary value and two cell values.
    """
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}")
    if boundary is None:
        boundary = ["reflect"] * 4
        if g.coords == "cylindrical":
            boundary[0] = "axis"
    boundary = list(boundary)
    k = SIDES.index(side)
    if boundary[k] == "axis":
        raise ConfigurationError("the axis cannot carry Dirichlet data")
    boundary[k] = "dirichlet"
    grid = Grid2D(window, n1, n2, tuple(boundary))
    pts, nu = _boundary_geometry(grid, side)
    G = g.meridional(pts)
    B = G[:, 1:, 1:]
    nBn = np.einsum("j,ijk,k->i", nu, B, nu)
    if np.any(np.abs(nBn) <= 1e-8 * np.linalg.norm(B, ord=2, axis=(1, 2))):
        raise ConfigurationError("boundary patch is characteristic (g^{jk} nu_j nu_k = 0)")
    solver = WaveSolver(g, grid, cfl=cfl, ko=ko, dirichlet={side: f},
                        sponge_width=sponge_width, sponge_strength=sponge_strength)
    n_steps = int(math.ceil(T / solver.dt_max - 1e-9))
    dt = T / n_steps
    s_nodes = pts[:, 1] if side.startswith("x1") else pts[:, 0]
    h_n = grid.h1 if side.startswith("x1") else grid.h2

    def trace(state: WaveState):
        fv = np.asarray(f(state.t, s_nodes), dtype=float) * np.ones(len(s_nodes))
        if side == "x1min":
            un = (-8 * fv + 9 * state.u[0, :] - state.u[1, :]) / (3 * h_n)
        elif side == "x1max":
            un = (8 * fv - 9 * state.u[-1, :] + state.u[-2, :]) / (3 * h_n)
        elif side == "x2min":
            un = (-8 * fv + 9 * state.u[:, 0] - state.u[:, 1]) / (3 * h_n)
        else:
            un = (8 * fv - 9 * state.u[:, -1] + state.u[:, -2]) / (3 * h_n)
        us = np.gradient(fv, s_nodes) if len(s_nodes) > 2 else np.zeros_like(fv)
        if side.startswith("x1"):
            grad = np.stack([un, us], -1)
        else:
            grad = np.stack([us, un], -1)
        conormal = np.einsum("ij,ijk,k->i", grad, B, nu)
        return conormal / np.sqrt(np.abs(nBn))

    s = solver.initial_state(lambda a, b: np.zeros_like(a))
    times, vals = [0.0], [trace(s)]
    for step_i in range(1, n_steps + 1):
        s = solver.step(s, dt)
        if step_i % record_every == 0 or step_i == n_steps:
            times.append(s.t)
            vals.append(trace(s))
    return DNTrace(np.array(times), s_nodes, np.array(vals), side,
                   meta={"dt": dt, "h": h_n, "n_steps": n_steps})


# ---------------------------------------------------------------------------
# echo experiment: probing toward an ergosphere


def slab_flow_metric(V: Callable, name: str = "slab-flow") -> StationaryMetric:
    """Planar medium flowing toward x = 0 with speed V(x); unit signal speed."""

    def v(p):
        p = np.asarray(p, dtype=float)
        vx = -np.asarray(V(p[..., 0]), dtype=float) * np.ones(p.shape[:-1])
        return np.stack([vx, np.zeros_like(vx)], -1)

    return build_flow_metric(FlowForm(2, v), name)


def smooth_pulse(center: float, half_width: float) -> Callable:
    """C-infinity bump in time, uniform along the boundary."""

    def f(t, s):
        x = (np.asarray(t, dtype=float) - center) / half_width
        with np.errstate(divide="ignore", over="ignore"):
            val = np.where(np.abs(x) < 1, np.exp(1.0 - 1.0 / np.maximum(1 - x * x, 1e-300)), 0.0)
        return val * np.ones_like(np.asarray(s, dtype=float))

    return f


@dataclass
class EchoResult:
    depth: float
    delay: float
    round_trip: float
    inbound: float

    @property
    def relative_error(self) -> float:
        return abs(self.delay - self.round_trip) / self.round_trip


def echo_experiment(g: StationaryMetric, depths: Sequence[float], h: float = 1e-3,
                    pulse_half_width: float = 0.15, width: int = 8) -> list:
    """Send a boundary pulse into a slab closed by a wall at each depth; time the echo.

    The delay is the difference of the energy centroids of the echo and of the
    direct boundary response.  The prediction is the round trip of the two
    characteristic families along the normal path.
    """
    out = []
    tc = 1.2 * pulse_half_width
    f = smooth_pulse(tc, pulse_half_width)
    for d in depths:
        path = LinePath((0.0, 0.5 * width * h), (float(d), 0.5 * width * h))
        t_in = travel_time(g, path, 1.0, root="plus")
        t_out = travel_time(g, path, 1.0, root="minus")
        rt = t_in + t_out
        n1 = int(round(d / h))
        T = tc + pulse_half_width + 1.5 * rt
        tr = dn_operator(g, f, ((0.0, float(d)), (0.0, width * h)), n1, width, T,
                         side="x1min", boundary=("dirichlet", "reflect", "reflect", "reflect"))
        q = tr.values.mean(axis=1)
        t = tr.times
        direct = t <= tc + pulse_half_width
        echo = (t > tc + pulse_half_width) & (t < tc + pulse_half_width + 1.5 * rt)
        w_d = q[direct] ** 2
        w_e = q[echo] ** 2
        t_d = np.sum(t[direct] * w_d) / np.sum(w_d)
        t_e = np.sum(t[echo] * w_e) / np.sum(w_e)
        out.append(EchoResult(float(d), float(t_e - t_d), float(rt), float(t_in)))
    return out
