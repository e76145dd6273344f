"""Lagrange-Galerkin time stepping for the shallow water equations.

Each step first transports the total height along the characteristics
(a mass-matrix solve), updates the water level, then solves one symmetric
velocity system whose boundary values come from the transmission condition
evaluated with the new water level.  ``order=2`` uses the two-step
(BDF2-type) operators with the extrapolated advecting velocity from the
second step on; the first step is always the single-step operator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .characteristics import (
    build_foot_table,
    extrapolate_velocity,
    rhs_conservative,
    rhs_nonconservative,
)
from .fem import (
    assemble_b_rhs,
    assemble_mass,
    assemble_momentum,
    assemble_source,
    check_symmetric,
    from_dofs,
    interpolate,
    require_positive,
    to_dofs,
    transpose_perm,
)
from .errors import InputError
from .solver import DEFAULT_TOL, apply_constraints, solve_spd, tbc_values, velocity_constraints


@dataclass(frozen=True)
class SweParams:
    rho: float
    mu: float
    g: float
    zeta: float
    c0: float
    dt: float
    T: float
    order: int = 2
    f: Optional[Callable] = None
    F: Optional[Callable] = None
    solver_tol: float = DEFAULT_TOL
    # (x, t) -> (M, 2); replaces the transmission condition on transmission nodes
    boundary_velocity: Optional[Callable] = None

    def __post_init__(self):
        for name in ("rho", "mu", "g", "zeta", "dt", "T"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.c0 < 0:
            raise ValueError("c0 must be non-negative")
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")

    @property
    def n_steps(self) -> int:
        # guard against T/dt landing just below an integer
        return int(math.floor(self.T / self.dt + 1e-9))


@dataclass(frozen=True)
class SweState:
    n: int
    t: float
    phi: np.ndarray
    eta: np.ndarray
    u: np.ndarray
    eta_prev: Optional[np.ndarray] = None
    u_prev: Optional[np.ndarray] = None
    clipped: int = 0  # feet clipped while computing this level

    @property
    def phi_prev(self):
        if self.eta_prev is None:
            return None
        return self.eta_prev + (self.phi - self.eta)


def _zeta_field(mesh, params):
    return np.full(mesh.n_vertices, float(params.zeta))


def init_state(mesh, bp, params: SweParams, phi0, u0) -> SweState:
    """Interpolated initial data; ``phi0(x)`` and ``u0(x)`` are vectorised callbacks."""
    phi = interpolate(mesh, phi0)
    require_positive(phi)
    u = interpolate(mesh, u0)
    if u.shape != (mesh.n_vertices, 2):
        raise InputError("initial velocity must return one 2-vector per point")
    eta = phi - _zeta_field(mesh, params)
    return SweState(0, 0.0, phi, eta, u)


def step(state: SweState, mesh, bp, params: SweParams) -> SweState:
    """Advance ``state`` by one time increment."""
    dt = params.dt
    n = state.n + 1
    t = n * dt
    zeta = _zeta_field(mesh, params)
    M = assemble_mass(mesh)
    first = params.order == 1 or state.n == 0

    # transport of the total height, solved for eta = phi - zeta
    if first:
        theta = 1.0
        ft1 = build_foot_table(mesh, state.u, dt, 1)
        rhs = rhs_conservative(mesh, state.phi, ft1) - M @ zeta
        clipped = ft1.n_clipped
    else:
        theta = 1.5
        w = extrapolate_velocity(state.u, state.u_prev)
        ft1 = build_foot_table(mesh, w, dt, 1)
        ft2 = build_foot_table(mesh, w, dt, 2)
        rhs = (
            2.0 * rhs_conservative(mesh, state.phi, ft1)
            - 0.5 * rhs_conservative(mesh, state.phi_prev, ft2)
            - 1.5 * (M @ zeta)
        )
        clipped = ft1.n_clipped + ft2.n_clipped
    if params.f is not None:
        rhs = rhs + dt * assemble_source(mesh, params.f, t)
    eta = solve_spd(theta * M, rhs, tol=params.solver_tol, x0=state.eta)
    phi = eta + zeta
    require_positive(phi)

    # momentum
    A = assemble_momentum(mesh, phi, params.rho * theta / dt, params.mu)
    load = -assemble_b_rhs(mesh, phi, eta, params.rho, params.g)
    if first:
        load += (params.rho / dt) * rhs_nonconservative(mesh, state.u, phi, ft1)
    else:
        load += (params.rho / dt) * (
            2.0 * rhs_nonconservative(mesh, state.u, phi, ft1)
            - 0.5 * rhs_nonconservative(mesh, state.u_prev, phi, ft2)
        )
    if params.F is not None:
        load += assemble_source(mesh, params.F, t)
    if params.boundary_velocity is None:
        cs = tbc_values(bp, phi, eta, params.c0, params.g, zeta, mesh.n_vertices)
    else:
        vals = params.boundary_velocity(mesh.vertices[bp.tnodes], t)
        cs = velocity_constraints(bp, vals, mesh.n_vertices)
    A, b = apply_constraints(A, to_dofs(load), cs)
    check_symmetric(A, perm=transpose_perm(mesh))
    x0 = to_dofs(state.u)
    x0[cs.dofs] = cs.values
    x = solve_spd(A, b, tol=params.solver_tol, x0=x0)
    x[cs.dofs] = cs.values
    return SweState(n, t, phi, eta, from_dofs(x), eta_prev=state.eta, u_prev=state.u, clipped=clipped)


@dataclass
class RunReport:
    n_steps: int
    final: SweState
    observers: list = field(default_factory=list)

    def observer(self, cls):
        """First attached observer of the given type."""
        for obs in self.observers:
            if isinstance(obs, cls):
                return obs
        raise LookupError(cls.__name__)


def run(mesh, bp, params: SweParams, state0: SweState, observers=()) -> RunReport:
    """Take ``floor(T / dt)`` steps, calling every observer on the initial and each new state."""
    observers = list(observers)
    for obs in observers:
        obs(state0)
    state = state0
    for _ in range(params.n_steps):
        state = step(state, mesh, bp, params)
        for obs in observers:
            obs(state)
    return RunReport(params.n_steps, state, observers)


def with_params(params: SweParams, **changes) -> SweParams:
    return replace(params, **changes)
