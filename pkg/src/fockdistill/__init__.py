"""Fock-state distillation from coherent light via atom-cavity phase flips."""

from .cavity import (CavityParams, ReflectionPair, cooperativity,
                     reflection_coeffs, reflection_from_cooperativity,
                     solve_detuning, solve_detuning_bisect)
from .distill import (DistillationPlan, PlanStep, TrajectoryRecord,
                      delete_fock, execute, explore_tree, idealized_delete,
                      iteration_count, plan)
from .fock import (FockVector, PhotonStats, SourceSpec, coherent_state,
                   overlap, photon_stats, source_moments,
                   squeezed_coherent_state)
from .gates import (AtomLightState, MeasurementRecord, apply_atom_unitary,
                    apply_cpf, apply_reflection_exact, branch_probabilities,
                    measure_atom, prepare_superposition)

__version__ = "0.1.0"

__all__ = [
    "AtomLightState", "CavityParams", "DistillationPlan", "FockVector",
    "MeasurementRecord", "PhotonStats", "PlanStep", "ReflectionPair",
    "SourceSpec", "TrajectoryRecord", "apply_atom_unitary", "apply_cpf",
    "apply_reflection_exact", "branch_probabilities", "coherent_state",
    "cooperativity", "delete_fock", "execute", "explore_tree",
    "idealized_delete", "iteration_count", "measure_atom", "overlap",
    "photon_stats", "plan", "prepare_superposition", "reflection_coeffs",
    "reflection_from_cooperativity", "solve_detuning",
    "solve_detuning_bisect", "source_moments", "squeezed_coherent_state",
]
