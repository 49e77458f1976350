"""Step-wise ligand assembly inside a pocket."""

from .complexgraph import EdgeSet, HeteroGraph, build_complex_graph, state_complex_graph
from .loop import Terminated, generate, motif_weight, run, run_state, step
from .policy import GreedyClashFreePolicy, Policy, RandomPolicy, make_policy
from .state import (
    CLASH_THRESHOLD,
    AssemblyState,
    HistoryEntry,
    Pose,
    attach,
    heuristic_first_pose,
    ligand_clashes,
    place_first_motif,
    single_bond_length,
)
from .trajectory import (
    TRAJ_HEADER,
    TrainingStep,
    TrainingTarget,
    bfs_order,
    build_trajectories,
    motif_tree,
    read_trajectories,
    write_trajectories,
)

__all__ = [
    "AssemblyState", "CLASH_THRESHOLD", "EdgeSet", "GreedyClashFreePolicy", "HeteroGraph", "HistoryEntry",
    "Policy", "Pose", "RandomPolicy", "TRAJ_HEADER", "Terminated", "TrainingStep", "TrainingTarget", "attach",
    "bfs_order", "build_complex_graph", "build_trajectories", "generate", "heuristic_first_pose", "ligand_clashes",
    "make_policy", "motif_tree", "motif_weight", "place_first_motif", "read_trajectories", "run", "run_state",
    "single_bond_length", "state_complex_graph", "step", "write_trajectories",
]
