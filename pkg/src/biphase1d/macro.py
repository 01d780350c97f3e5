"""Homogenized two-phase scheme: one velocity, effective coefficients,
and a volume fraction driven by pressure-difference relaxation.

Each cell carries the two phase masses as Lagrangian constants; the phase
densities are recovered from the evolving phase volumes.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import diagnostics
from .errors import StepFailure
from .materials import mu_eff, p_eff, relaxation_rhs
from .meso import RHO_SANE_MAX, RHO_SANE_MIN, riemann_density
from .stepping import StaggeredGrid, lagrangian_step

# below this distance from 0 or 1, a phase volume is too small to divide by
ALPHA_GUARD = 1e-12
# slack so the relaxation dt limiter never stalls at alpha in {0, 1}
RELAX_SLACK = 1e-6


@dataclass
class MacroState:
    grid: StaggeredGrid
    u: np.ndarray
    alpha: np.ndarray
    mass_plus: np.ndarray
    mass_minus: np.ndarray
    rho_plus: np.ndarray
    rho_minus: np.ndarray
    t: float = 0.0
    dissipated: float = 0.0
    clamp_events: int = 0
    guard_events: int = 0

    @property
    def rho(self):
        """Mixture density (M_+ + M_-)/dx."""
        return (self.mass_plus + self.mass_minus) / self.grid.cell_dx


def init_macro_riemann(J):
    """Riemann datum: alpha = 1/2 and equal phase densities everywhere."""
    if J < 4:
        raise ValueError("cell count must be >= 4")
    grid = StaggeredGrid.uniform(J)
    alpha = np.full(J, 0.5)
    rho_p = riemann_density(grid.midpoints)
    rho_m = rho_p.copy()
    return MacroState(grid=grid, u=np.zeros(J),
                      alpha=alpha,
                      mass_plus=alpha * rho_p * grid.cell_dx,
                      mass_minus=(1.0 - alpha) * rho_m * grid.cell_dx,
                      rho_plus=rho_p, rho_minus=rho_m)


def _alpha_increment_bound(alpha, policy):
    return policy.relax_eta * np.minimum(alpha, 1.0 - alpha) + RELAX_SLACK


def _relax_dt_cap(state, mat, policy):
    """Predict a dt keeping the volume-fraction increment within bounds,
    using the current velocity field (the actual increment is validated
    against the implicit one after the solve)."""
    du_dx = (state.u - np.roll(state.u, 1)) / state.grid.cell_dx
    rate = np.abs(relaxation_rhs(state.alpha, state.rho_plus, state.rho_minus,
                                 du_dx, mat))
    bound = _alpha_increment_bound(state.alpha, policy)
    with np.errstate(divide="ignore"):
        caps = np.where(rate > 0, bound / rate, np.inf)
    return float(np.min(caps))


def step_macro(state, mat, weighting, policy, dt_limit=None):
    """One homogenized step.

    The mixture density rides the shared Lagrangian kernel with the
    effective viscosity and pressure; the volume fraction then takes a
    forward-Euler relaxation increment built from the *new* velocities
    and cell widths, is clamped to [0, 1] (counted), and the phase
    densities are recovered from the constant phase masses.  If the
    increment exceeds the stability bound, dt is halved and the step
    redone.
    """
    rho_mix = state.rho
    p_cells = p_eff(state.alpha, state.rho_plus, state.rho_minus, mat, weighting)
    mu_cells = mu_eff(state.alpha, mat)

    cap = _relax_dt_cap(state, mat, policy)
    if dt_limit is not None:
        cap = min(cap, dt_limit)
    bound = _alpha_increment_bound(state.alpha, policy)

    out = d_alpha = None
    for _ in range(policy.max_halvings + 1):
        out = lagrangian_step(state.grid, state.u, rho_mix, mu_cells, p_cells,
                              policy, dt_limit=cap)
        du_dx = (out.u - np.roll(out.u, 1)) / out.grid.cell_dx
        d_alpha = out.dt_used * relaxation_rhs(state.alpha, state.rho_plus,
                                               state.rho_minus, du_dx, mat)
        if np.all(np.abs(d_alpha) <= bound):
            break
        cap = 0.5 * out.dt_used
    else:
        raise StepFailure("volume-fraction increment stayed above the "
                          f"stability bound after {policy.max_halvings} halvings",
                          diagnostics={"t": state.t, "dt": out.dt_used,
                                       "max_dalpha": float(np.max(np.abs(d_alpha)))})

    alpha_raw = state.alpha + d_alpha
    alpha_new = np.clip(alpha_raw, 0.0, 1.0)
    clamps = int(np.count_nonzero(alpha_new != alpha_raw))

    # recover phase densities; freeze them where the phase volume vanishes
    dx_new = out.grid.cell_dx
    plus_ok = alpha_new > ALPHA_GUARD
    minus_ok = (1.0 - alpha_new) > ALPHA_GUARD
    vol_plus = np.where(plus_ok, alpha_new, 1.0) * dx_new
    vol_minus = np.where(minus_ok, 1.0 - alpha_new, 1.0) * dx_new
    rho_p = np.where(plus_ok, state.mass_plus / vol_plus, state.rho_plus)
    rho_m = np.where(minus_ok, state.mass_minus / vol_minus, state.rho_minus)
    guards = int(np.count_nonzero(~plus_ok & (state.mass_plus > 0))
                 + np.count_nonzero(~minus_ok & (state.mass_minus > 0)))

    mix_new = (state.mass_plus + state.mass_minus) / dx_new
    if np.any(mix_new < RHO_SANE_MIN) or np.any(mix_new > RHO_SANE_MAX):
        raise StepFailure("mixture density left the sane range "
                          f"[{RHO_SANE_MIN}, {RHO_SANE_MAX}]",
                          diagnostics={"t": state.t, "dt": out.dt_used})

    return replace(state, grid=out.grid, u=out.u, alpha=alpha_new,
                   rho_plus=rho_p, rho_minus=rho_m,
                   t=state.t + out.dt_used,
                   dissipated=state.dissipated + out.dissipation_increment,
                   clamp_events=state.clamp_events + clamps,
                   guard_events=state.guard_events + guards)


def run_macro(config):
    """Run the homogenized scheme to config.t_end (same loop contract as
    the sharp-interface runner)."""
    state = init_macro_riemann(config.cells)
    records = [diagnostics.snapshot(state, config.mat, dt_used=0.0)]
    steps = 0
    try:
        while state.t < config.t_end:
            t_before = state.t
            state = step_macro(state, config.mat, config.weighting, config.policy,
                               dt_limit=config.t_end - state.t)
            if config.t_end - state.t <= 1e-12 * max(1.0, config.t_end):
                state.t = config.t_end
            steps += 1
            if steps % config.cadence == 0 or state.t >= config.t_end:
                records.append(diagnostics.snapshot(state, config.mat,
                                                    dt_used=state.t - t_before))
    except StepFailure as failure:
        failure.diagnostics["records"] = records
        raise
    return state, records
