"""Scenario configuration: JSON schema, validation, and object construction.

A scenario file is a single JSON document with a mandatory version field.
Unknown keys are rejected everywhere so typos fail loudly instead of being
silently ignored. Agents and axes are indexed from 0 throughout; a topology
edge {"from": j, "to": i} means information flows from agent j to agent i.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import jsonschema

from .errors import ConfigError
from .graph import Digraph
from .riccati import PlantParams
from .signals import AxisSignal, DisturbanceSpec, FormationSpec, Sinusoid, hexagon_formation
from .simulator import Scenario

CONFIG_VERSION = 1

_TERM_SCHEMA = {
    "type": "object",
    "properties": {
        "amplitude": {"type": "number"},
        "angular_frequency": {"type": "number"},
        "phase": {"type": "number"},
        "offset": {"type": "number"},
    },
    "additionalProperties": False,
}

_AXIS_SCHEMA = {"type": "array", "items": _TERM_SCHEMA}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "version": {"const": CONFIG_VERSION},
        "label": {"type": "string"},
        "plant": {
            "type": "object",
            "properties": {
                "alpha_p": {"type": "number"},
                "alpha_v": {"type": "number"},
                "n_axes": {"type": "integer", "minimum": 1},
            },
            "required": ["alpha_p", "alpha_v", "n_axes"],
            "additionalProperties": False,
        },
        "topology": {
            "type": "object",
            "oneOf": [
                {
                    "properties": {
                        "matrix": {
                            "type": "array",
                            "items": {"type": "array", "items": {"type": "number"}},
                        }
                    },
                    "required": ["matrix"],
                    "additionalProperties": False,
                },
                {
                    "properties": {
                        "n_agents": {"type": "integer", "minimum": 1},
                        "edges": {
                            "type": "array",
                            "items": {
                                "type": "object",
                                "properties": {
                                    "from": {"type": "integer", "minimum": 0},
                                    "to": {"type": "integer", "minimum": 0},
                                    "weight": {"type": "number", "exclusiveMinimum": 0},
                                },
                                "required": ["from", "to", "weight"],
                                "additionalProperties": False,
                            },
                        },
                    },
                    "required": ["n_agents", "edges"],
                    "additionalProperties": False,
                },
            ],
        },
        "formation": {
            "type": "object",
            "oneOf": [
                {
                    "properties": {
                        "preset": {"const": "hexagon"},
                        "scale": {"type": "number"},
                        "phase_step": {"type": "number"},
                        "angular_frequency": {"type": "number"},
                    },
                    "required": ["preset"],
                    "additionalProperties": False,
                },
                {
                    "properties": {
                        "agents": {
                            "type": "array",
                            "items": {
                                "type": "object",
                                "properties": {
                                    "position": {"type": "array", "items": _AXIS_SCHEMA},
                                    "velocity": {"type": "array", "items": _AXIS_SCHEMA},
                                },
                                "required": ["position", "velocity"],
                                "additionalProperties": False,
                            },
                        }
                    },
                    "required": ["agents"],
                    "additionalProperties": False,
                },
            ],
        },
        "disturbance": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "properties": {
                        "agents": {
                            "type": "array",
                            "items": {"type": "array", "items": _AXIS_SCHEMA},
                        }
                    },
                    "required": ["agents"],
                    "additionalProperties": False,
                },
            ]
        },
        "eso": {
            "type": "object",
            "properties": {
                "sigma": {
                    "oneOf": [
                        {"type": "number", "exclusiveMinimum": 0},
                        {
                            "type": "array",
                            "items": {"type": "number", "exclusiveMinimum": 0},
                            "minItems": 1,
                        },
                    ]
                },
                "enabled": {"type": "boolean"},
            },
            "required": ["sigma"],
            "additionalProperties": False,
        },
        "eps_f": {"type": "number", "exclusiveMinimum": 0},
        "feasibility_step": {"type": "number", "exclusiveMinimum": 0},
        "integrator": {
            "type": "object",
            "properties": {
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "horizon": {"type": "number", "exclusiveMinimum": 0},
                "decimation": {"type": "integer", "minimum": 1},
            },
            "required": ["dt", "horizon"],
            "additionalProperties": False,
        },
        "initial_state": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}},
        },
        "lambda2_override": {
            "oneOf": [{"type": "null"}, {"type": "number", "exclusiveMinimum": 0}]
        },
    },
    "required": ["version", "plant", "topology", "formation", "eso", "integrator"],
    "additionalProperties": False,
}


@dataclass
class ScenarioConfig:
    """Validated scenario configuration with constructed domain objects."""

    plant: PlantParams
    digraph: Digraph
    formation: FormationSpec
    disturbance: DisturbanceSpec | None
    sigmas: np.ndarray
    eso_enabled: bool
    eps_f: float
    feasibility_step: float
    dt: float
    horizon: float
    decimation: int
    initial_p: np.ndarray
    initial_v: np.ndarray
    lambda2_override: float | None
    label: str

    def feasibility_grid(self) -> np.ndarray:
        return np.arange(0.0, self.horizon + 0.5 * self.feasibility_step, self.feasibility_step)

    def scenario(self) -> Scenario:
        return Scenario(
            digraph=self.digraph,
            plant=self.plant,
            formation=self.formation,
            disturbance=self.disturbance,
            sigmas=self.sigmas,
            initial_p=self.initial_p,
            initial_v=self.initial_v,
            dt=self.dt,
            horizon=self.horizon,
            decimation=self.decimation,
            eso_enabled=self.eso_enabled,
            label=self.label,
        )


def _axis_signal(terms: list) -> AxisSignal:
    return AxisSignal(
        terms=[
            Sinusoid(
                amplitude=t.get("amplitude", 0.0),
                angular_frequency=t.get("angular_frequency", 0.0),
                phase=t.get("phase", 0.0),
                offset=t.get("offset", 0.0),
            )
            for t in terms
        ]
    )


def _parse_topology(data: dict) -> Digraph:
    if "matrix" in data:
        matrix = np.asarray(data["matrix"], dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ConfigError("topology.matrix must be square")
        try:
            return Digraph(matrix)
        except ValueError as exc:
            raise ConfigError(f"topology.matrix: {exc}") from exc
    n = data["n_agents"]
    for edge in data["edges"]:
        if edge["from"] >= n or edge["to"] >= n:
            raise ConfigError(
                f"topology.edges: agent index out of range in {edge} (n_agents={n})"
            )
        if edge["from"] == edge["to"]:
            raise ConfigError(f"topology.edges: self-loop not allowed in {edge}")
    try:
        return Digraph.from_edges(n, ((e["from"], e["to"], e["weight"]) for e in data["edges"]))
    except ValueError as exc:
        raise ConfigError(f"topology.edges: {exc}") from exc


def _parse_formation(data: dict, n_agents: int, n_axes: int) -> FormationSpec:
    if "preset" in data:
        if n_axes != 3:
            raise ConfigError("formation preset 'hexagon' requires plant.n_axes = 3")
        return hexagon_formation(
            n_agents,
            scale=data.get("scale", 3.0),
            phase_step=data.get("phase_step", np.pi / 3.0),
            angular_frequency=data.get("angular_frequency", 1.0),
        )
    agents = data["agents"]
    if len(agents) != n_agents:
        raise ConfigError(
            f"formation.agents has {len(agents)} entries, topology has {n_agents} agents"
        )
    position, velocity = [], []
    for i, agent in enumerate(agents):
        if len(agent["position"]) != n_axes or len(agent["velocity"]) != n_axes:
            raise ConfigError(
                f"formation.agents[{i}] must list exactly {n_axes} axes "
                "for both position and velocity"
            )
        position.append([_axis_signal(axis) for axis in agent["position"]])
        velocity.append([_axis_signal(axis) for axis in agent["velocity"]])
    return FormationSpec(position=position, velocity=velocity)


def _parse_disturbance(data, n_agents: int, n_axes: int) -> DisturbanceSpec | None:
    if data is None:
        return None
    agents = data["agents"]
    if len(agents) != n_agents:
        raise ConfigError(
            f"disturbance.agents has {len(agents)} entries, topology has {n_agents} agents"
        )
    axes = []
    for i, per_axis in enumerate(agents):
        if len(per_axis) != n_axes:
            raise ConfigError(f"disturbance.agents[{i}] must list exactly {n_axes} axes")
        axes.append([_axis_signal(axis) for axis in per_axis])
    return DisturbanceSpec(axes=axes)


def parse_config(data: dict) -> ScenarioConfig:
    """Validate a raw configuration dict and construct the domain objects."""
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "$" + "".join(f".{p}" if isinstance(p, str) else f"[{p}]" for p in exc.absolute_path)
        raise ConfigError(f"{path}: {exc.message}") from exc

    plant = PlantParams(
        alpha_p=data["plant"]["alpha_p"],
        alpha_v=data["plant"]["alpha_v"],
        n_axes=data["plant"]["n_axes"],
    )
    digraph = _parse_topology(data["topology"])
    n = digraph.n_agents
    formation = _parse_formation(data["formation"], n, plant.n_axes)
    disturbance = _parse_disturbance(data.get("disturbance"), n, plant.n_axes)

    sigma = data["eso"]["sigma"]
    if isinstance(sigma, list):
        if len(sigma) != n:
            raise ConfigError(f"eso.sigma lists {len(sigma)} values for {n} agents")
        sigmas = np.asarray(sigma, dtype=float)
    else:
        sigmas = np.full(n, float(sigma))

    integ = data["integrator"]
    initial = data.get("initial_state")
    if initial is None:
        initial_p = np.zeros((n, plant.n_axes))
        initial_v = np.zeros((n, plant.n_axes))
    else:
        arr = np.asarray(initial, dtype=float)
        if arr.shape != (n, 2 * plant.n_axes):
            raise ConfigError(
                f"initial_state must be shaped ({n}, {2 * plant.n_axes}) "
                "with rows [p..., v...] per agent"
            )
        initial_p = arr[:, : plant.n_axes]
        initial_v = arr[:, plant.n_axes :]

    return ScenarioConfig(
        plant=plant,
        digraph=digraph,
        formation=formation,
        disturbance=disturbance,
        sigmas=sigmas,
        eso_enabled=data["eso"].get("enabled", True),
        eps_f=data.get("eps_f", 1e-6),
        feasibility_step=data.get("feasibility_step", 0.01),
        dt=integ["dt"],
        horizon=integ["horizon"],
        decimation=integ.get("decimation", 10),
        initial_p=initial_p,
        initial_v=initial_v,
        lambda2_override=data.get("lambda2_override"),
        label=data.get("label", ""),
    )


def load_config(path) -> ScenarioConfig:
    """Read and validate a scenario configuration file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(data)
