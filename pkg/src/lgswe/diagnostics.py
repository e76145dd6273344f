"""Norms, errors, convergence orders and the mass/energy monitors."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .fem import DEGREES, assemble_mass, interpolate, lumped_mass
from .quadrature import get_rule

TIMESERIES_HEADER = ("t", "l2_eta", "mass_eta", "kinetic", "potential")


def l2_norm(mesh, z) -> float:
    """L2 norm of a P1 field through the consistent mass matrix."""
    z = np.asarray(z, dtype=float)
    M = assemble_mass(mesh)
    if z.ndim == 1:
        return math.sqrt(max(z @ (M @ z), 0.0))
    return math.sqrt(max(sum(z[:, c] @ (M @ z[:, c]) for c in range(z.shape[1])), 0.0))


def h1_semi_norm(mesh, z) -> float:
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    g = np.swapaxes(z[mesh.triangles], 1, 2) @ mesh.grads
    return math.sqrt(float(mesh.area @ np.sum(g**2, axis=(1, 2))))


def mass(mesh, z) -> float:
    """Integral of a scalar P1 field."""
    return float(lumped_mass(mesh) @ np.asarray(z, dtype=float))


def energies(mesh, phi, u, eta, rho, g):
    """Kinetic and potential energy, integrated with the degree-5 rule."""
    rule = get_rule(DEGREES["energies"])
    tri = mesh.triangles
    P = rule.points
    phiq = np.asarray(phi)[tri] @ P.T
    etaq = np.asarray(eta)[tri] @ P.T
    uq = P @ np.asarray(u)[tri]
    w = mesh.area[:, None] * rule.weights[None, :]
    kinetic = 0.5 * rho * float(np.sum(w * phiq * np.sum(uq**2, axis=2)))
    potential = 0.5 * rho * g * float(np.sum(w * etaq**2))
    return kinetic, potential


def eoc(e_coarse, e_fine, dt_coarse, dt_fine) -> float:
    return math.log(e_coarse / e_fine) / math.log(dt_coarse / dt_fine)


def l2_l2_norm(norms, dt) -> float:
    """``sqrt(dt * sum_n |eta^n|^2)`` from the per-step L2 norms (steps 1..N_T)."""
    norms = np.asarray(norms, dtype=float)
    return math.sqrt(dt * float(np.sum(norms**2)))


def _norm(mesh, z, mode):
    if mode == "E0":
        return l2_norm(mesh, z)
    if mode == "E1":
        return h1_semi_norm(mesh, z)
    raise ValueError(f"unknown error mode {mode!r}")


def error_pair(mesh, fields, times, exact, mode="E0") -> float:
    """Relative max-in-time error of a numerical history against ``exact(x, t)``.

    The exact solution is interpolated at the vertices before differencing.
    """
    num = den = 0.0
    for z, t in zip(fields, times):
        ex = interpolate(mesh, lambda x: exact(x, t))
        num = max(num, _norm(mesh, np.asarray(z) - ex, mode))
        den = max(den, _norm(mesh, ex, mode))
    if den == 0:
        raise InputError("exact solution has zero norm")
    return num / den


@dataclass
class ErrorRecord:
    N: int
    h: float
    dt: float
    E0_eta: float
    E0_u: float
    E1_eta: float
    E1_u: float


class ErrorMonitor:
    """Observer accumulating E0/E1 of eta and u over a run."""

    def __init__(self, mesh, exact_eta, exact_u):
        self.mesh = mesh
        self.exact = {"eta": exact_eta, "u": exact_u}
        self.num = {(k, m): 0.0 for k in self.exact for m in ("E0", "E1")}
        self.den = dict(self.num)

    def __call__(self, state):
        for key, ex_fn in self.exact.items():
            ex = interpolate(self.mesh, lambda x: ex_fn(x, state.t))
            z = getattr(state, key)
            for mode in ("E0", "E1"):
                self.num[key, mode] = max(self.num[key, mode], _norm(self.mesh, z - ex, mode))
                self.den[key, mode] = max(self.den[key, mode], _norm(self.mesh, ex, mode))

    def error(self, key, mode) -> float:
        return self.num[key, mode] / self.den[key, mode]

    def record(self, N, dt) -> ErrorRecord:
        return ErrorRecord(
            N=N,
            h=self.mesh.h,
            dt=dt,
            E0_eta=self.error("eta", "E0"),
            E0_u=self.error("u", "E0"),
            E1_eta=self.error("eta", "E1"),
            E1_u=self.error("u", "E1"),
        )


@dataclass
class TimeSeries:
    t: list = field(default_factory=list)
    l2_eta: list = field(default_factory=list)
    mass_eta: list = field(default_factory=list)
    kinetic: list = field(default_factory=list)
    potential: list = field(default_factory=list)
    clipped: list = field(default_factory=list)

    def append(self, t, l2, m, kin, pot, clipped=0):
        if self.t and not t > self.t[-1]:
            raise ValueError("time series must be strictly increasing")
        self.t.append(float(t))
        self.l2_eta.append(l2)
        self.mass_eta.append(m)
        self.kinetic.append(kin)
        self.potential.append(pot)
        self.clipped.append(int(clipped))

    def __len__(self):
        return len(self.t)

    def as_arrays(self) -> dict:
        return {k: np.asarray(getattr(self, k)) for k in (*TIMESERIES_HEADER, "clipped")}

    def write_csv(self, path, skip_initial=True) -> None:
        start = 1 if skip_initial and self.t and self.t[0] == 0.0 else 0
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TIMESERIES_HEADER)
            for i in range(start, len(self.t)):
                w.writerow(
                    ["%.17g" % getattr(self, k)[i] for k in TIMESERIES_HEADER]
                )


class DiagnosticsMonitor:
    """Observer recording L2 norm and mass of eta plus both energies."""

    def __init__(self, mesh, params):
        self.mesh = mesh
        self.params = params
        self.series = TimeSeries()

    def __call__(self, state):
        kin, pot = energies(self.mesh, state.phi, state.u, state.eta, self.params.rho, self.params.g)
        self.series.append(
            state.t,
            l2_norm(self.mesh, state.eta),
            mass(self.mesh, state.eta),
            kin,
            pot,
            state.clipped,
        )
