"""Closed-loop integration of agents, protocol, and observers.

Integrates the stacked vector field of N agents under the relative-state
formation protocol with per-agent observers, using classical fixed-step
four-stage Runge-Kutta. The integration loop owns the state; produced traces
are immutable and independent runs may execute concurrently.

Step-size guidance: the observers contribute eigenvalues at -sigma, and the
real-axis stability bound of the integrator is about 2.79/|lam|, so keep
dt <= 0.28/max(sigma).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteState
from .eso import EsoParams
from .graph import Digraph, build_laplacian
from .riccati import PlantParams
from .signals import DisturbanceSpec, FormationSpec

TRACE_FORMAT = "formctl-trace-v1"


@dataclass
class Scenario:
    """Everything needed to integrate one closed-loop run.

    Gains are not part of the scenario: they come from a design report so a
    simulation can never run with an unchecked design.
    """

    digraph: Digraph
    plant: PlantParams
    formation: FormationSpec
    disturbance: DisturbanceSpec | None
    sigmas: np.ndarray
    initial_p: np.ndarray
    initial_v: np.ndarray
    dt: float = 1e-3
    horizon: float = 20.0
    decimation: int = 10
    eso_enabled: bool = True
    label: str = ""

    def __post_init__(self):
        n = self.digraph.n_agents
        n_axes = self.plant.n_axes
        self.sigmas = np.broadcast_to(np.asarray(self.sigmas, dtype=float), (n,)).copy()
        self.initial_p = np.asarray(self.initial_p, dtype=float).reshape(n, n_axes)
        self.initial_v = np.asarray(self.initial_v, dtype=float).reshape(n, n_axes)
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.decimation < 1:
            raise ValueError("decimation must be at least 1")
        if self.formation.n_agents != n or self.formation.n_axes != n_axes:
            raise ValueError("formation spec shape does not match topology/plant")
        if self.disturbance is not None and (
            self.disturbance.n_agents != n or self.disturbance.n_axes != n_axes
        ):
            raise ValueError("disturbance spec shape does not match topology/plant")


@dataclass
class SystemState:
    """Stacked agent and observer state at one instant; arrays are (N, n)."""

    t: float
    p: np.ndarray
    v: np.ndarray
    g: np.ndarray
    z: np.ndarray


def control_input(
    i: int,
    p: np.ndarray,
    v: np.ndarray,
    fp: np.ndarray,
    fv: np.ndarray,
    dfv_i: np.ndarray,
    z_i: np.ndarray,
    gain_row: np.ndarray,
    digraph: Digraph,
    plant: PlantParams,
) -> np.ndarray:
    """Protocol input for agent i from relative neighbor information.

    Only differences of formation-shifted states enter the consensus sum, so
    absolute neighbor states never appear alone. ``fp``/``fv`` are the (N, n)
    formation values and ``dfv_i`` is agent i's velocity-part derivative.
    """
    relp = p - fp
    relv = v - fv
    w = digraph.weights[i]
    deg = w.sum()
    cons_p = w @ relp - deg * relp[i]
    cons_v = w @ relv - deg * relv[i]
    damping = plant.alpha_p * fp[i] + plant.alpha_v * fv[i]
    return gain_row[0] * cons_p + gain_row[1] * cons_v - damping + dfv_i - z_i


class ClosedLoop:
    """Vector field of the stacked agents + observers for one scenario."""

    def __init__(self, scenario: Scenario, gain_row: np.ndarray):
        self.scenario = scenario
        self.gain_row = np.asarray(gain_row, dtype=float)
        self.laplacian = build_laplacian(scenario.digraph)
        params = [EsoParams.from_sigma(s) for s in scenario.sigmas]
        self.beta_g = np.array([q.beta_g for q in params])[:, None]
        self.beta_z = np.array([q.beta_z for q in params])[:, None]
        self.n_agents = scenario.digraph.n_agents
        self.n_axes = scenario.plant.n_axes
        self._fp = scenario.formation.position_table()
        self._fv = scenario.formation.velocity_table()
        self._dist = scenario.disturbance.table() if scenario.disturbance is not None else None
        self._block = self.n_agents * self.n_axes

    def disturbance_at(self, t: float) -> np.ndarray:
        if self._dist is None:
            return np.zeros((self.n_agents, self.n_axes))
        return self._dist.value(t)

    def control_inputs(self, t: float, p: np.ndarray, v: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Protocol inputs of all agents at once, shape (N, n)."""
        fp = self._fp.value(t)
        fv = self._fv.value(t)
        dfv = self._fv.derivative(t)
        kp, kv = self.gain_row
        cons = -kp * (self.laplacian @ (p - fp)) - kv * (self.laplacian @ (v - fv))
        plant = self.scenario.plant
        return cons - (plant.alpha_p * fp + plant.alpha_v * fv) + dfv - z

    def pack(self, state: SystemState) -> np.ndarray:
        return np.concatenate(
            [state.p.ravel(), state.v.ravel(), state.g.ravel(), state.z.ravel()]
        )

    def unpack(self, t: float, y: np.ndarray) -> SystemState:
        m = self._block
        shape = (self.n_agents, self.n_axes)
        return SystemState(
            t=t,
            p=y[0:m].reshape(shape).copy(),
            v=y[m : 2 * m].reshape(shape).copy(),
            g=y[2 * m : 3 * m].reshape(shape).copy(),
            z=y[3 * m : 4 * m].reshape(shape).copy(),
        )

    def derivative(self, t: float, y: np.ndarray) -> np.ndarray:
        m = self._block
        shape = (self.n_agents, self.n_axes)
        p = y[0:m].reshape(shape)
        v = y[m : 2 * m].reshape(shape)
        g = y[2 * m : 3 * m].reshape(shape)
        z = y[3 * m : 4 * m].reshape(shape)

        plant = self.scenario.plant
        u = self.control_inputs(t, p, v, z)
        acc = plant.alpha_p * p + plant.alpha_v * v + u + self.disturbance_at(t)

        if self.scenario.eso_enabled:
            err = g - v
            dg = z + u + plant.alpha_p * p + plant.alpha_v * v - self.beta_g * err
            dz = -self.beta_z * err
        else:
            # compensation switched off: z stays identically zero so the
            # recorded z column is exactly what the protocol applied
            dg = np.zeros_like(g)
            dz = np.zeros_like(z)
        return np.concatenate([v.ravel(), acc.ravel(), dg.ravel(), dz.ravel()])


def rk4_step(f, t: float, y: np.ndarray, h: float) -> np.ndarray:
    """One classical four-stage Runge-Kutta step of dy/dt = f(t, y)."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(state: SystemState, loop: ClosedLoop, dt: float) -> SystemState:
    """Advance the stacked state by dt, re-evaluating inputs at each stage."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    y = rk4_step(loop.derivative, state.t, loop.pack(state), dt)
    if not np.all(np.isfinite(y)):
        raise NonFiniteState(
            f"state left the finite range at t={state.t + dt:.6f}", time=state.t + dt
        )
    return loop.unpack(state.t + dt, y)


@dataclass
class SimulationTrace:
    """Time-indexed record of one closed-loop run.

    Array shapes: t (M,); p, v, g, z, u, omega (M, N, n); center (M, 2n);
    deviations (M, N, 2n); error (M,). ``center`` is the null-vector-weighted
    average of formation-shifted states; ``deviations`` are per-agent offsets
    from formation plus center; ``error`` is the worst deviation norm.
    Traces loaded from CSV carry None for g and deviations.
    """

    t: np.ndarray
    p: np.ndarray
    v: np.ndarray
    g: np.ndarray | None
    z: np.ndarray
    u: np.ndarray
    omega: np.ndarray
    center: np.ndarray
    deviations: np.ndarray | None
    error: np.ndarray
    n_agents: int
    n_axes: int
    label: str = ""
    meta: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        """Write the versioned trace table; numbers carry 9 significant digits."""
        n, n_axes = self.n_agents, self.n_axes
        cols = ["t"]
        blocks = [self.t[:, None]]
        for i in range(n):
            for name, arr in (
                ("p", self.p),
                ("v", self.v),
                ("u", self.u),
                ("w", self.omega),
                ("z", self.z),
            ):
                cols.extend(f"{name}{i}_{k}" for k in range(n_axes))
                blocks.append(arr[:, i, :])
        cols.extend(f"kappa_{k}" for k in range(2 * n_axes))
        blocks.append(self.center)
        cols.append("e")
        blocks.append(self.error[:, None])
        table = np.hstack(blocks)
        with open(path, "w") as fh:
            fh.write(f"# {TRACE_FORMAT} agents={n} axes={n_axes}\n")
            fh.write(",".join(cols) + "\n")
            np.savetxt(fh, table, fmt="%.9g", delimiter=",")

    @classmethod
    def from_csv(cls, path) -> "SimulationTrace":
        from .errors import FormatError

        with open(path) as fh:
            first = fh.readline().strip()
            fields = first.split()
            if len(fields) != 4 or fields[0] != "#" or fields[1] != TRACE_FORMAT:
                raise FormatError(f"unrecognized trace header: {first!r}")
            try:
                n = int(fields[2].split("=")[1])
                n_axes = int(fields[3].split("=")[1])
            except (IndexError, ValueError) as exc:
                raise FormatError(f"malformed trace header: {first!r}") from exc
            header = fh.readline().strip().split(",")
            try:
                table = np.loadtxt(fh, delimiter=",", ndmin=2)
            except ValueError as exc:
                raise FormatError(f"malformed trace body: {exc}") from exc
        expected_cols = 1 + 5 * n * n_axes + 2 * n_axes + 1
        if len(header) != expected_cols or table.shape[1] != expected_cols:
            raise FormatError(
                f"expected {expected_cols} columns, header has {len(header)}, "
                f"body has {table.shape[1]}"
            )
        m = table.shape[0]
        t = table[:, 0]
        p = np.empty((m, n, n_axes))
        v = np.empty((m, n, n_axes))
        u = np.empty((m, n, n_axes))
        omega = np.empty((m, n, n_axes))
        z = np.empty((m, n, n_axes))
        col = 1
        for i in range(n):
            for arr in (p, v, u, omega, z):
                arr[:, i, :] = table[:, col : col + n_axes]
                col += n_axes
        center = table[:, col : col + 2 * n_axes]
        col += 2 * n_axes
        error = table[:, col]
        return cls(
            t=t, p=p, v=v, g=None, z=z, u=u, omega=omega,
            center=center, deviations=None, error=error,
            n_agents=n, n_axes=n_axes,
        )


def _record(loop: ClosedLoop, weights: np.ndarray, state: SystemState):
    """Observables at one output instant: u, omega, center, deviations, error."""
    t = state.t
    fp = loop._fp.value(t)
    fv = loop._fv.value(t)
    u = loop.control_inputs(t, state.p, state.v, state.z)
    omega = loop.disturbance_at(t)
    relp = state.p - fp
    relv = state.v - fv
    center = np.concatenate([weights @ relp, weights @ relv])
    dev = np.concatenate([relp - center[None, : loop.n_axes],
                          relv - center[None, loop.n_axes :]], axis=1)
    err = float(np.linalg.norm(dev, axis=1).max())
    return u, omega, center, dev, err


def simulate(scenario: Scenario, report) -> SimulationTrace:
    """Integrate the closed loop for one designed scenario.

    ``report`` is the design report providing the gain row and the center
    weighting vector; run a design first (or build a report explicitly for
    degenerate cases such as a single agent). The observer starts from the
    measured velocity with a zero disturbance estimate, which zeros the
    observable part of the initial error and makes transients reproducible.
    """
    loop = ClosedLoop(scenario, report.gain_row)
    weights = np.asarray(report.left_null_vector, dtype=float)
    if weights.shape != (scenario.digraph.n_agents,):
        raise ValueError("center weighting vector does not match the agent count")

    n_steps = int(round(scenario.horizon / scenario.dt))
    if abs(n_steps * scenario.dt - scenario.horizon) > 1e-9 * max(1.0, scenario.horizon):
        raise ValueError("horizon must be an integer multiple of dt")
    dec = scenario.decimation

    state = SystemState(
        t=0.0,
        p=scenario.initial_p.copy(),
        v=scenario.initial_v.copy(),
        g=scenario.initial_v.copy(),
        z=np.zeros_like(scenario.initial_v),
    )

    out_idx = list(range(0, n_steps + 1, dec))
    if out_idx[-1] != n_steps:
        out_idx.append(n_steps)
    m = len(out_idx)
    n, n_axes = loop.n_agents, loop.n_axes
    shape = (m, n, n_axes)
    rec = {
        "t": np.empty(m),
        "p": np.empty(shape), "v": np.empty(shape), "g": np.empty(shape),
        "z": np.empty(shape), "u": np.empty(shape), "omega": np.empty(shape),
        "center": np.empty((m, 2 * n_axes)),
        "dev": np.empty((m, n, 2 * n_axes)),
        "e": np.empty(m),
    }

    def capture(slot: int, st: SystemState) -> None:
        u, omega, center, dev, err = _record(loop, weights, st)
        rec["t"][slot] = st.t
        rec["p"][slot] = st.p
        rec["v"][slot] = st.v
        rec["g"][slot] = st.g
        rec["z"][slot] = st.z
        rec["u"][slot] = u
        rec["omega"][slot] = omega
        rec["center"][slot] = center
        rec["dev"][slot] = dev
        rec["e"][slot] = err

    capture(0, state)
    slot = 1
    y = loop.pack(state)
    dt = scenario.dt
    deriv = loop.derivative
    for k in range(1, n_steps + 1):
        y = rk4_step(deriv, (k - 1) * dt, y, dt)
        if not np.all(np.isfinite(y)):
            raise NonFiniteState(
                f"state left the finite range at t={k * dt:.6f}", time=k * dt
            )
        if k == out_idx[slot]:
            capture(slot, loop.unpack(k * dt, y))
            slot += 1

    return SimulationTrace(
        t=rec["t"], p=rec["p"], v=rec["v"], g=rec["g"], z=rec["z"],
        u=rec["u"], omega=rec["omega"], center=rec["center"],
        deviations=rec["dev"], error=rec["e"],
        n_agents=n, n_axes=n_axes, label=scenario.label,
        meta={"dt": dt, "decimation": dec, "horizon": scenario.horizon},
    )
