"""Staggered pseudo-Lagrangian time step on the periodic unit interval.

Cell quantities (density, color / volume fraction, pressure, viscosity)
live on moving cells; velocities live on the cell interfaces (nodes).
Node j is the interface at ``node_x[j]``, cell j is the interval ending
there, so cell j+1 (mod J) lies to the node's right.  Node coordinates
are kept unwrapped (strictly increasing); the torus seam is closed by the
stored total length.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import StepFailure
from .tridiag import CyclicTridiagonalSystem, solve_cyclic_tridiagonal

_CFL_EPS = 1e-12


@dataclass
class StaggeredGrid:
    node_x: np.ndarray
    length: float = 1.0
    cell_dx: np.ndarray = field(init=False, repr=False)
    node_dx: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.node_x = np.asarray(self.node_x, dtype=float)
        if self.node_x.ndim != 1 or self.node_x.size < 3:
            raise ValueError("grid needs at least 3 interface positions")
        if not self.length > 0:
            raise ValueError("domain length must be > 0")
        dx = np.empty_like(self.node_x)
        dx[1:] = np.diff(self.node_x)
        dx[0] = self.node_x[0] - self.node_x[-1] + self.length
        if np.any(dx <= 0):
            raise ValueError("cell widths must all be > 0")
        self.cell_dx = dx
        self.node_dx = 0.5 * (dx + np.roll(dx, -1))

    @classmethod
    def uniform(cls, J, length=1.0):
        return cls(np.arange(1, J + 1) * (length / J), length)

    @property
    def J(self):
        return self.node_x.size

    @property
    def midpoints(self):
        """Cell centers, in the same unwrapped coordinates as node_x."""
        return self.node_x - 0.5 * self.cell_dx


@dataclass
class StepPolicy:
    """Time-step control knobs.

    cfl_theta bounds the fraction of the smallest cell a node may sweep
    per step (predicted from the current velocity jumps); dt_max is an
    absolute cap; max_halvings bounds the retry loop that validates the
    implicit velocity; relax_eta bounds the per-step volume-fraction
    increment of the two-phase scheme.
    """

    cfl_theta: float = 0.4
    dt_max: float = 1e-4
    max_halvings: int = 40
    relax_eta: float = 0.5

    def __post_init__(self):
        if not 0 < self.cfl_theta < 1:
            raise ValueError("cfl_theta must lie in (0, 1)")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be > 0")
        if self.max_halvings < 1:
            raise ValueError("max_halvings must be >= 1")
        if not self.relax_eta > 0:
            raise ValueError("relax_eta must be > 0")


@dataclass
class StepOutcome:
    accepted: bool
    dt_used: float
    grid: StaggeredGrid
    u: np.ndarray
    rho: np.ndarray
    dissipation_increment: float
    halvings: int = 0


def node_density(cell_rho, grid):
    """Width-weighted average of the two cells adjacent to each node."""
    rho = np.asarray(cell_rho, dtype=float)
    if np.any(rho <= 0):
        raise ValueError("cell densities must be > 0")
    dx = grid.cell_dx
    dx_r = np.roll(dx, -1)
    return (dx * rho + dx_r * np.roll(rho, -1)) / (dx + dx_r)


def assemble_momentum(grid, u_old, mu_cells, p_cells, node_mass, dt):
    """Implicit-viscosity momentum system for the new node velocities.

    Row j:  m_j u_j - dt*mu_{j+1}/dx_{j+1} (u_{j+1} - u_j)
                    + dt*mu_j/dx_j (u_j - u_{j-1})
            = m_j u_old_j - dt*(p_{j+1} - p_j)
    with cell indices wrapping periodically.  Strictly diagonally
    dominant for any dt > 0 and positive node masses.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    node_mass = np.asarray(node_mass, dtype=float)
    mu = np.asarray(mu_cells, dtype=float)
    p = np.asarray(p_cells, dtype=float)
    if np.any(node_mass <= 0):
        raise ValueError("node masses must be > 0")
    if np.any(mu < 0):
        raise ValueError("viscosities must be >= 0")

    w_left = dt * mu / grid.cell_dx
    w_right = np.roll(w_left, -1)
    diag = node_mass + w_left + w_right
    sub = -w_left
    sup = -w_right
    rhs = node_mass * np.asarray(u_old, dtype=float) - dt * (np.roll(p, -1) - p)
    return CyclicTridiagonalSystem(sub=sub, diag=diag, sup=sup, rhs=rhs)


def advance_positions(grid, u_new, dt):
    """Move every interface by dt * its velocity.

    Returns the new grid, or None if any cell inverted (caller retries
    with a smaller dt).  The total length telescopes and is carried over
    unchanged.
    """
    new_x = grid.node_x + dt * np.asarray(u_new, dtype=float)
    dx = np.empty_like(new_x)
    dx[1:] = np.diff(new_x)
    dx[0] = new_x[0] - new_x[-1] + grid.length
    if np.any(dx <= 0):
        return None
    return StaggeredGrid(new_x, grid.length)


def update_cell_density(rho_old, dx_old, dx_new):
    """Scale densities so each cell keeps its mass: rho*dx is invariant."""
    if np.any(np.asarray(dx_new) <= 0):
        raise ValueError("new cell widths must be > 0")
    return np.asarray(rho_old, dtype=float) * (np.asarray(dx_old) / np.asarray(dx_new))


def choose_dt(grid, u_old, policy):
    """CFL-style predictor: limit mesh deformation per step.

    The width of cell j changes at rate |u_j - u_{j-1}|, so the candidate
    keeps every width change below cfl_theta times the smallest width.
    """
    u = np.asarray(u_old, dtype=float)
    jump = np.max(np.abs(u - np.roll(u, 1)))
    return min(policy.dt_max, policy.cfl_theta * np.min(grid.cell_dx) / (jump + _CFL_EPS))


def lagrangian_step(grid, u_old, rho_cells, mu_cells, p_cells, policy, dt_limit=None):
    """One full step: implicit momentum solve, mesh motion, density update.

    The dt candidate comes from choose_dt (optionally capped by dt_limit,
    e.g. to land on an output time); if the implicitly computed velocities
    would invert a cell, dt is halved and the solve repeated, up to
    policy.max_halvings times.  The returned dissipation increment is
    dt * sum(mu (du/dx)^2 dx) evaluated with the new velocities on the
    pre-step mesh, matching the implicit discretization.
    """
    rho = np.asarray(rho_cells, dtype=float)
    n_rho = node_density(rho, grid)
    node_mass = n_rho * grid.node_dx

    dt = choose_dt(grid, u_old, policy)
    if dt_limit is not None:
        dt = min(dt, dt_limit)

    new_grid = None
    halvings = 0
    for halvings in range(policy.max_halvings + 1):
        system = assemble_momentum(grid, u_old, mu_cells, p_cells, node_mass, dt)
        u_new = solve_cyclic_tridiagonal(system)
        new_grid = advance_positions(grid, u_new, dt)
        if new_grid is not None:
            break
        dt *= 0.5
    if new_grid is None:
        raise StepFailure(
            f"cell inversion persisted after {policy.max_halvings} dt halvings",
            diagnostics={"dt": dt, "min_dx": float(np.min(grid.cell_dx)),
                         "max_u": float(np.max(np.abs(u_new)))},
        )

    rho_new = update_cell_density(rho, grid.cell_dx, new_grid.cell_dx)
    du_dx = (u_new - np.roll(u_new, 1)) / grid.cell_dx
    dissipation = dt * float(np.sum(np.asarray(mu_cells) * du_dx**2 * grid.cell_dx))
    return StepOutcome(accepted=True, dt_used=dt, grid=new_grid, u=u_new,
                       rho=rho_new, dissipation_increment=dissipation,
                       halvings=halvings)
