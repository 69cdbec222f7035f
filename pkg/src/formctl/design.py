"""Four-step protocol design pipeline and its machine-readable report.

Runs feasibility checking, Riccati kernel solution, gain synthesis, and
observer-bandwidth bookkeeping in order, always finishing with a quantitative
per-eigenvalue stability check. The resulting report is the single artifact
the simulator consumes, so a simulation can never run with an unchecked
design. Pure function of its inputs: identical inputs give byte-identical
serialized reports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import graph, riccati, signals
from .errors import Infeasible
from .eso import residual_gain
from .graph import Digraph
from .riccati import HurwitzRecord, PlantParams, RiccatiSolution
from .signals import DisturbanceSpec, FormationSpec

# Warn when the predicted residual of any disturbance frequency exceeds this
# fraction of its amplitude; the observer bandwidth is then probably too low.
RESIDUAL_WARN_THRESHOLD = 0.25


@dataclass
class DesignReport:
    """Outcome of the design pipeline for one scenario."""

    feasible: bool
    per_agent_residuals: np.ndarray
    eps_f: float
    eigenvalues: np.ndarray
    lambda2_re: float
    lambda2_used: float
    left_null_vector: np.ndarray
    riccati: RiccatiSolution
    gain_row: np.ndarray
    gain_full: np.ndarray
    hurwitz: list[HurwitzRecord]
    sigmas: np.ndarray
    predicted_residuals: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "per_agent_residuals": [float(r) for r in self.per_agent_residuals],
            "eps_f": self.eps_f,
            "eigenvalues": [[float(e.real), float(e.imag)] for e in self.eigenvalues],
            "lambda2_re": self.lambda2_re,
            "lambda2_used": self.lambda2_used,
            "left_null_vector": [float(w) for w in self.left_null_vector],
            "riccati_kernel": [[float(x) for x in row] for row in self.riccati.kernel],
            "riccati_residual": self.riccati.residual,
            "gain_row": [float(k) for k in self.gain_row],
            "hurwitz_margins": [
                {
                    "eigenvalue": [float(r.eigenvalue.real), float(r.eigenvalue.imag)],
                    "max_real_part": r.max_real_part,
                    "stable": r.stable,
                }
                for r in self.hurwitz
            ],
            "sigmas": [float(s) for s in self.sigmas],
            "predicted_residuals": self.predicted_residuals,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def pretty(self) -> str:
        lines = [
            "design report",
            f"  feasible: {self.feasible} "
            f"(max residual {max(self.per_agent_residuals):.3e}, eps_f {self.eps_f:.3e})",
            f"  lambda2 re: actual {self.lambda2_re:.6g}, used {self.lambda2_used:.6g}",
            f"  gain row: [{self.gain_row[0]:.6g}, {self.gain_row[1]:.6g}]",
            f"  riccati residual: {self.riccati.residual:.3e}",
            "  stability margins (max closed-loop real part per eigenvalue):",
        ]
        for rec in self.hurwitz:
            lines.append(
                f"    lam = {rec.eigenvalue.real:+.4f}{rec.eigenvalue.imag:+.4f}j"
                f" -> {rec.max_real_part:+.4f} ({'ok' if rec.stable else 'UNSTABLE'})"
            )
        lines.append(f"  sigmas: {[float(s) for s in self.sigmas]}")
        for entry in self.predicted_residuals:
            lines.append(
                f"  predicted residual gain at {entry['frequency']:.4g} rad/s: "
                + ", ".join(f"{m:.4f}" for m in entry["magnitudes"])
            )
        for w in self.warnings:
            lines.append(f"  warning: {w}")
        return "\n".join(lines) + "\n"


def _disturbance_frequencies(spec: DisturbanceSpec) -> np.ndarray:
    freqs = set()
    for per_axis in spec.axes:
        for sig in per_axis:
            for term in sig.terms:
                if term.amplitude != 0.0 and term.angular_frequency != 0.0:
                    freqs.add(abs(float(term.angular_frequency)))
    return np.array(sorted(freqs))


def design(
    digraph: Digraph,
    plant: PlantParams,
    formation: FormationSpec,
    eps_f: float,
    sigmas,
    disturbance: DisturbanceSpec | None = None,
    t_grid: np.ndarray | None = None,
    lambda2_override: float | None = None,
) -> DesignReport:
    """Run the four design steps and return the report.

    Aborts with Infeasible when the formation fails the kinematic check at
    ``eps_f`` on the sample grid, with NoSpanningTree when the topology has
    no spanning tree, and with NotHurwitz if any relative-motion mode is
    unstable for the synthesized gain (a red-flag diagnostic; it cannot
    happen when the gain comes from the topology's own spectrum).

    ``lambda2_override`` injects a different eigenvalue real part into the
    gain synthesis, e.g. to reproduce a gain published for an unavailable
    topology; the stability check still uses the actual spectrum.
    """
    if t_grid is None:
        t_grid = np.arange(0.0, 20.0 + 1e-12, 0.01)

    residuals = signals.feasibility_residual(formation, t_grid)
    if residuals.max() > eps_f:
        raise Infeasible(
            f"formation infeasible: max residual {residuals.max():.6g} exceeds "
            f"eps_f {eps_f:.6g}",
            per_agent_residuals=residuals,
        )

    lap = graph.build_laplacian(digraph)
    spec = graph.spectrum(lap)
    lambda2_used = float(lambda2_override) if lambda2_override is not None else spec.lambda2_re

    kernel = riccati.solve_are(plant)
    are_res = riccati.are_residual(kernel, plant)
    gain_row, gain_full = riccati.gain(kernel, lambda2_used, plant.n_axes)
    solution = RiccatiSolution(kernel=kernel, residual=are_res, gain_row=gain_row)

    hurwitz = riccati.verify_hurwitz(
        kernel, plant, spec.eigenvalues[1:], lambda2_re=lambda2_used, strict=True
    )

    sigmas = np.broadcast_to(
        np.asarray(sigmas, dtype=float), (digraph.n_agents,)
    ).copy()
    if np.any(sigmas <= 0):
        raise ValueError("observer bandwidths must be positive")

    predicted = []
    warnings = []
    if disturbance is not None:
        for freq in _disturbance_frequencies(disturbance):
            mags = [abs(residual_gain(s, freq)) for s in sigmas]
            predicted.append({"frequency": float(freq), "magnitudes": mags})
            worst = max(mags)
            if worst > RESIDUAL_WARN_THRESHOLD:
                warnings.append(
                    f"predicted disturbance residual gain {worst:.3f} at "
                    f"{freq:.4g} rad/s exceeds {RESIDUAL_WARN_THRESHOLD}; "
                    "consider larger observer bandwidths"
                )

    return DesignReport(
        feasible=True,
        per_agent_residuals=residuals,
        eps_f=float(eps_f),
        eigenvalues=spec.eigenvalues,
        lambda2_re=spec.lambda2_re,
        lambda2_used=lambda2_used,
        left_null_vector=spec.left_null_vector,
        riccati=solution,
        gain_row=gain_row,
        gain_full=gain_full,
        hurwitz=hurwitz,
        sigmas=sigmas,
        predicted_residuals=predicted,
        warnings=warnings,
    )
