"""Protocol planning and execution for Fock-state distillation.

The schedule derivation: entering iteration m, the surviving photon numbers
form the congruence class {n = r_m mod 2^m} with r_m = A mod 2^m.  The phase
flip with phi = pi/2^m gives each survivor n = r_m + 2^m j the branch phase
e^{i pi r_m / 2^m} (-1)^j, so the rotation theta_m = pi r_m / 2^m aligns the
branches and the measurement splits even j from odd j.  Keeping the outcome
that contains j_A = (A - r_m)/2^m halves the class while retaining A.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cavity import ReflectionPair, reflection_from_cooperativity, solve_detuning
from .errors import ImpossibleOutcomeError, InvalidPlanError, ResourceLimitError
from .fock import FockVector
from .gates import (MeasurementRecord, apply_atom_unitary, apply_cpf,
                    apply_reflection_exact, measure_atom, prepare_superposition)

# Relative amplitude below which a Fock component counts as annihilated.
SURVIVOR_TOL = 1e-10

MAX_TREE_DEPTH = 12


@dataclass(frozen=True)
class PlanStep:
    iteration_index: int
    phi: float
    theta: float
    keep_outcome: str  # "G" or "S"

    def to_json(self) -> dict:
        return {"m": self.iteration_index, "phi": self.phi,
                "theta": self.theta, "keep": self.keep_outcome}


@dataclass(frozen=True)
class DistillationPlan:
    target: int
    steps: tuple[PlanStep, ...]
    source_window: tuple[int, int] | None = None

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "steps": [s.to_json() for s in self.steps],
            "window": list(self.source_window) if self.source_window else None,
        }


@dataclass(frozen=True)
class StepRecord:
    step: PlanStep | None
    outcome: str
    probability: float
    survivors: list[int]
    renorm_loss: float = 0.0


@dataclass(frozen=True)
class TrajectoryRecord:
    steps: tuple[StepRecord, ...]
    cumulative_probability: float
    final_state: FockVector
    outcomes: str = ""  # concatenated outcome letters, e.g. "GGSGG"

    def to_json(self) -> dict:
        return {
            "outcomes": self.outcomes,
            "cumulative_probability": self.cumulative_probability,
            "steps": [
                {
                    "outcome": s.outcome,
                    "probability": s.probability,
                    "survivors": _run_length_encode(s.survivors),
                    "renorm_loss": s.renorm_loss,
                }
                for s in self.steps
            ],
            "final_state": self.final_state.to_json(),
        }


def _run_length_encode(ns: list[int]) -> dict:
    """Survivor sets are arithmetic progressions; store {start, step, count}."""
    if not ns:
        return {"start": None, "step": 0, "count": 0}
    if len(ns) == 1:
        return {"start": ns[0], "step": 0, "count": 1}
    diffs = {b - a for a, b in zip(ns, ns[1:])}
    if len(diffs) == 1:
        return {"start": ns[0], "step": diffs.pop(), "count": len(ns)}
    return {"values": ns}


def iteration_count(std_dev: float) -> int:
    """Iterations needed to distil from a source of the given number spread:
    ceil(log2(6*std_dev)) - 1, clamped at 0."""
    if std_dev <= 0:
        raise InvalidPlanError("std_dev must be > 0")
    return max(0, math.ceil(math.log2(6.0 * std_dev)) - 1)


def plan(target: int, num_steps: int,
         source_window: tuple[int, int] | None = None) -> DistillationPlan:
    """Standard (phi, theta, outcome) schedule distilling Fock number ``target``."""
    if target < 0 or num_steps < 0:
        raise InvalidPlanError("target and num_steps must be >= 0")
    steps = []
    for m in range(num_steps):
        period = 2 ** m
        r = target % period
        j = (target - r) // period
        steps.append(PlanStep(
            iteration_index=m,
            phi=math.pi / period,
            theta=(math.pi * r / period) % (2 * math.pi),
            keep_outcome="G" if j % 2 == 0 else "S",
        ))
    return DistillationPlan(target=target, steps=tuple(steps),
                            source_window=source_window)


def _survivors(state: FockVector) -> list[int]:
    mags = np.abs(state.amps)
    keep = mags > SURVIVOR_TOL * mags.max()
    return [int(n) for n in state.n_values[keep]]


def _one_step(light: FockVector, phi: float, theta: float,
              refl: ReflectionPair | None,
              postselect: str | None = None,
              seed: int | None = None) -> tuple[MeasurementRecord, float]:
    joint = prepare_superposition(light)
    loss = 0.0
    if refl is None:
        joint = apply_cpf(joint, phi)
    else:
        joint, loss = apply_reflection_exact(joint, refl)
    joint = apply_atom_unitary(joint, theta)
    rec = measure_atom(joint, postselect=postselect, seed=seed)
    return rec, loss


def _reflection_for(phi: float, cooperativity: float | None) -> ReflectionPair | None:
    """Ideal model -> None; exact model -> (r1 from C at the solved detuning,
    r0 pinned to the exact target phase)."""
    if cooperativity is None:
        return None
    delta = solve_detuning(phi % (2 * math.pi))
    r1 = reflection_from_cooperativity(cooperativity, delta).r1
    r0 = complex(math.cos(phi), math.sin(phi))
    return ReflectionPair(r1=r1, r0=r0)


def execute(dplan: DistillationPlan, light: FockVector,
            cooperativity: float | None = None) -> TrajectoryRecord:
    """Run the plan on ``light``, postselecting each step's keep-outcome.

    ``cooperativity`` None selects the ideal conditional phase flip; a finite
    value applies the exact r1^n / r0^n reflection at that cooperativity.
    """
    if not (light.window_lo <= dplan.target <= light.window_hi):
        raise InvalidPlanError(
            f"target {dplan.target} outside the source window "
            f"[{light.window_lo}, {light.window_hi}]")
    state = light
    records = []
    cumulative = 1.0
    outcomes = []
    for step in dplan.steps:
        refl = _reflection_for(step.phi, cooperativity)
        rec, loss = _one_step(state, step.phi, step.theta, refl,
                              postselect=step.keep_outcome)
        state = rec.post_state
        cumulative *= rec.probability
        outcomes.append(rec.outcome)
        records.append(StepRecord(step=step, outcome=rec.outcome,
                                  probability=rec.probability,
                                  survivors=_survivors(state),
                                  renorm_loss=loss))
    return TrajectoryRecord(steps=tuple(records),
                            cumulative_probability=cumulative,
                            final_state=state, outcomes="".join(outcomes))


def delete_fock(light: FockVector, p: int) -> MeasurementRecord:
    """Delete the Fock components with n/p an odd integer (exact gate algebra).

    Applies the phase flip with phi = pi/p, a theta = 0 rotation and
    postselection on G.  Surviving amplitudes are reweighted by
    (1 + e^{i pi n / p})/2 before renormalization; the state is not simply
    the input with the deleted components removed.
    """
    if p < 2:
        raise InvalidPlanError("deletion modulus p must be >= 2")
    rec, _ = _one_step(light, math.pi / p, 0.0, None, postselect="G")
    return rec


def idealized_delete(light: FockVector, p: int) -> FockVector:
    """Deletion as commonly idealized: drop n with n/p odd, renormalize the rest.

    Differs from :func:`delete_fock` by omitting the cos(pi*n/(2p)) amplitude
    reweighting of the exact gate algebra; kept for comparison.
    """
    if p < 2:
        raise InvalidPlanError("deletion modulus p must be >= 2")
    keep = np.array([(n // p) % 2 == 0 or n % p != 0 for n in light.n_values])
    amps = np.where(keep, light.amps, 0.0)
    norm = math.sqrt(float(np.sum(np.abs(amps) ** 2)))
    return FockVector(light.window_lo, light.window_hi, amps / norm)


@dataclass(frozen=True)
class _Branch:
    state: FockVector
    class_rep: int
    probability: float
    outcomes: str
    steps: tuple[StepRecord, ...]


def explore_tree(light: FockVector, depth: int) -> list[TrajectoryRecord]:
    """Enumerate every outcome sequence to the given depth with exact
    probabilities.  At level m each branch is rotated by the angle matched to
    its own surviving congruence class, so both outcomes remain parity splits.
    Branch probabilities across any level sum to 1."""
    if depth > MAX_TREE_DEPTH:
        raise ResourceLimitError(
            f"depth {depth} exceeds the cap of {MAX_TREE_DEPTH}")
    branches = [_Branch(light, 0, 1.0, "", ())]
    leaves: list[TrajectoryRecord] = []
    for m in range(depth):
        period = 2 ** m
        phi = math.pi / period
        nxt: list[_Branch] = []
        for br in branches:
            theta = (math.pi * br.class_rep / period) % (2 * math.pi)
            joint = prepare_superposition(br.state)
            joint = apply_cpf(joint, phi)
            joint = apply_atom_unitary(joint, theta)
            for outcome, rep in (("G", br.class_rep),
                                 ("S", br.class_rep + period)):
                try:
                    rec = measure_atom(joint, postselect=outcome)
                except ImpossibleOutcomeError:
                    # empty branch: its congruence class has no support
                    leaves.append(TrajectoryRecord(
                        steps=br.steps, cumulative_probability=0.0,
                        final_state=br.state, outcomes=br.outcomes + outcome))
                    continue
                srec = StepRecord(step=None, outcome=outcome,
                                  probability=rec.probability,
                                  survivors=_survivors(rec.post_state))
                nxt.append(_Branch(rec.post_state, rep % (2 * period),
                                   br.probability * rec.probability,
                                   br.outcomes + outcome,
                                   br.steps + (srec,)))
        branches = nxt
    for br in branches:
        leaves.append(TrajectoryRecord(
            steps=br.steps, cumulative_probability=br.probability,
            final_state=br.state, outcomes=br.outcomes))
    leaves.sort(key=lambda t: t.outcomes)
    return leaves
