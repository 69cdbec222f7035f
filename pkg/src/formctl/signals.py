"""Sinusoid-plus-constant signal specs for formations and disturbances.

Every time-varying quantity in the toolkit (desired formation offsets and
external disturbances) is a per-agent, per-axis sum of sinusoids plus
constants, so values and derivatives are always analytic. Specs are treated
as immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Sinusoid:
    """One term amplitude*sin(angular_frequency*t + phase) + offset."""

    amplitude: float = 0.0
    angular_frequency: float = 0.0
    phase: float = 0.0
    offset: float = 0.0

    def value(self, t):
        return self.amplitude * np.sin(self.angular_frequency * t + self.phase) + self.offset

    def derivative(self, t):
        return self.amplitude * self.angular_frequency * np.cos(self.angular_frequency * t + self.phase)


@dataclass
class AxisSignal:
    """Sum of sinusoid terms on one scalar axis."""

    terms: list = field(default_factory=list)

    def value(self, t):
        return sum((term.value(t) for term in self.terms), 0.0 * np.asarray(t, dtype=float))

    def derivative(self, t):
        return sum((term.derivative(t) for term in self.terms), 0.0 * np.asarray(t, dtype=float))

    @classmethod
    def constant(cls, c: float) -> "AxisSignal":
        return cls(terms=[Sinusoid(offset=c)])

    @classmethod
    def zero(cls) -> "AxisSignal":
        return cls(terms=[])


class _TermTable:
    """Flattened term arrays for evaluating an agent-by-axis signal grid.

    Collects every sinusoid of a [agent][axis] nest into parallel arrays so a
    single trig call plus one matmul produces the full (N, n) value grid.
    Constant offsets are folded into a precomputed grid.
    """

    def __init__(self, signals):
        n_agents = len(signals)
        n_axes = len(signals[0])
        amp, freq, phase = [], [], []
        cells = []
        const = np.zeros((n_agents, n_axes))
        for i, per_axis in enumerate(signals):
            if len(per_axis) != n_axes:
                raise ValueError("ragged axis count across agents")
            for k, sig in enumerate(per_axis):
                for term in sig.terms:
                    const[i, k] += term.offset
                    if term.amplitude != 0.0:
                        amp.append(term.amplitude)
                        freq.append(term.angular_frequency)
                        phase.append(term.phase)
                        cells.append(i * n_axes + k)
        self.shape = (n_agents, n_axes)
        self.const = const
        self.amp = np.asarray(amp)
        self.freq = np.asarray(freq)
        self.phase = np.asarray(phase)
        # scatter[cell, term] = 1 where the term contributes to the cell
        self.scatter = np.zeros((n_agents * n_axes, len(amp)))
        for col, cell in enumerate(cells):
            self.scatter[cell, col] = 1.0

    def value(self, t: float) -> np.ndarray:
        out = self.scatter @ (self.amp * np.sin(self.freq * t + self.phase))
        return out.reshape(self.shape) + self.const

    def derivative(self, t: float) -> np.ndarray:
        out = self.scatter @ (self.amp * self.freq * np.cos(self.freq * t + self.phase))
        return out.reshape(self.shape)

    def values(self, t: np.ndarray) -> np.ndarray:
        """Stacked value grids for a 1-D time array, shape (len(t), N, n)."""
        t = np.asarray(t, dtype=float)
        args = np.outer(self.freq, t) + self.phase[:, None]
        out = self.scatter @ (self.amp[:, None] * np.sin(args))
        return out.T.reshape(len(t), *self.shape) + self.const

    def derivatives(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        args = np.outer(self.freq, t) + self.phase[:, None]
        out = self.scatter @ (self.amp[:, None] * self.freq[:, None] * np.cos(args))
        return out.T.reshape(len(t), *self.shape)


def _cached_table(obj, attr: str, signals) -> _TermTable:
    table = obj.__dict__.get(attr)
    if table is None:
        table = _TermTable(signals)
        obj.__dict__[attr] = table
    return table


@dataclass
class FormationSpec:
    """Desired time-varying formation: per-agent position and velocity parts.

    ``position[i][k]`` and ``velocity[i][k]`` are the AxisSignals of agent i
    on axis k. The velocity part is a free spec; whether it matches the
    position derivative is exactly what the feasibility check measures.
    """

    position: list
    velocity: list

    def __post_init__(self):
        if len(self.position) != len(self.velocity):
            raise ValueError("position and velocity must cover the same agents")
        if len(self.position) == 0:
            raise ValueError("at least one agent required")
        if len(self.position[0]) != len(self.velocity[0]):
            raise ValueError("position and velocity must have the same axis count")

    @property
    def n_agents(self) -> int:
        return len(self.position)

    @property
    def n_axes(self) -> int:
        return len(self.position[0])

    def position_table(self) -> _TermTable:
        return _cached_table(self, "_pos_table", self.position)

    def velocity_table(self) -> _TermTable:
        return _cached_table(self, "_vel_table", self.velocity)

    @classmethod
    def zero(cls, n_agents: int, n_axes: int) -> "FormationSpec":
        return cls(
            position=[[AxisSignal.zero() for _ in range(n_axes)] for _ in range(n_agents)],
            velocity=[[AxisSignal.zero() for _ in range(n_axes)] for _ in range(n_agents)],
        )


@dataclass
class DisturbanceSpec:
    """Per-agent, per-axis external disturbance signals."""

    axes: list

    @property
    def n_agents(self) -> int:
        return len(self.axes)

    @property
    def n_axes(self) -> int:
        return len(self.axes[0])

    def table(self) -> _TermTable:
        return _cached_table(self, "_table", self.axes)

    @classmethod
    def zero(cls, n_agents: int, n_axes: int) -> "DisturbanceSpec":
        return cls(axes=[[AxisSignal.zero() for _ in range(n_axes)] for _ in range(n_agents)])


def eval_formation(spec: FormationSpec, agent: int, t: float):
    """Position, velocity, and their exact derivatives for one agent.

    Returns (f_p, f_v, df_p, df_v), each an n_axes vector. Derivatives are
    analytic, never finite-differenced. Agents are indexed from 0.
    """
    pos = spec.position_table()
    vel = spec.velocity_table()
    return (
        pos.value(t)[agent],
        vel.value(t)[agent],
        pos.derivative(t)[agent],
        vel.derivative(t)[agent],
    )


def eval_disturbance(spec: DisturbanceSpec, agent: int, t: float) -> np.ndarray:
    """Disturbance vector for one agent at time t."""
    return spec.table().value(t)[agent]


def feasibility_residual(spec: FormationSpec, t_grid: np.ndarray) -> np.ndarray:
    """Per-agent sampled sup-norm of velocity-part minus position-derivative.

    The formation is kinematically feasible when every entry is at most the
    chosen tolerance: the velocity part of the spec must be the derivative of
    the position part. The grid is the caller's sampling of the horizon.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise ValueError("t_grid must be nonempty")
    fv = spec.velocity_table().values(t_grid)
    dfp = spec.position_table().derivatives(t_grid)
    return np.abs(fv - dfp).max(axis=(0, 2))


def hexagon_formation(
    n_agents: int,
    scale: float = 3.0,
    phase_step: float = np.pi / 3.0,
    angular_frequency: float = 1.0,
) -> FormationSpec:
    """Rotating regular-polygon formation family on three axes.

    Agent i sits at phase i*phase_step on a circle of radius ``scale`` in, up
    to sign, the first two axes, with the third axis mirroring the first.
    The velocity part is the exact position derivative, so the family always
    passes the feasibility check.
    """
    position = []
    velocity = []
    w = angular_frequency
    for i in range(n_agents):
        ph = i * phase_step
        position.append(
            [
                AxisSignal([Sinusoid(scale, w, ph)]),
                AxisSignal([Sinusoid(scale, w, ph + np.pi / 2.0)]),
                AxisSignal([Sinusoid(-scale, w, ph)]),
            ]
        )
        velocity.append(
            [
                AxisSignal([Sinusoid(scale * w, w, ph + np.pi / 2.0)]),
                AxisSignal([Sinusoid(-scale * w, w, ph)]),
                AxisSignal([Sinusoid(-scale * w, w, ph + np.pi / 2.0)]),
            ]
        )
    return FormationSpec(position=position, velocity=velocity)
