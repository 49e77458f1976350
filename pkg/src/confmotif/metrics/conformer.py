"""Conformer matching: fit the torsions of one conformer onto another."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import differential_evolution

from ..errors import GraphMismatchError
from ..geom3d import batch_superposed_rmsd, rmsd, superpose
from ..molgraph import Molecule
from ..motif import _side, bond_torsion, find_rotatable_bonds


@dataclass(frozen=True)
class DEConfig:
    popsize: int = 15
    mutation: float = 0.8
    recombination: float = 0.9
    maxiter: int = 200
    plateau_tol: float = 1e-4  # Å
    plateau_generations: int = 20
    seed: int = 0


@dataclass(frozen=True, eq=False)
class ConformerMatch:
    reference: Molecule
    optimized: Molecule
    matched: Molecule
    conformer_rmsd: float
    baseline_rmsd: float  # rigid superposition, no torsion change
    rotatable_bonds: tuple[tuple[int, int], ...]
    torsion_changes: np.ndarray  # radians applied per rotatable bond
    torsions: np.ndarray  # resulting dihedral per rotatable bond, radians


def same_graph(a: Molecule, b: Molecule) -> bool:
    if len(a.atoms) != len(b.atoms):
        return False
    if any(x.element != y.element or x.formal_charge != y.formal_charge for x, y in zip(a.atoms, b.atoms)):
        return False

    def bonds(m):
        return {(min(t.a, t.b), max(t.a, t.b), t.order) for t in m.bonds}

    return bonds(a) == bonds(b)


def _rodrigues(axis: np.ndarray, angle: np.ndarray) -> np.ndarray:
    """Batched rotation matrices (s, 3, 3) about unit axes (s, 3)."""
    x, y, z = axis[:, 0], axis[:, 1], axis[:, 2]
    zero = np.zeros_like(x)
    k = np.stack([np.stack([zero, -z, y], -1), np.stack([z, zero, -x], -1), np.stack([-y, x, zero], -1)], -2)
    s, c = np.sin(angle)[:, None, None], np.cos(angle)[:, None, None]
    return np.eye(3)[None] + s * k + (1.0 - c) * (k @ k)


class TorsionModel:
    """Applies torsion changes about the rotatable bonds of a fixed conformer."""

    def __init__(self, mol: Molecule) -> None:
        self.mol = mol
        self.bonds = []
        self.moving = []
        for k in find_rotatable_bonds(mol):
            b = mol.bonds[k]
            self.bonds.append((b.a, b.b))
            self.moving.append(np.array([i for i in _side(mol, b.b, k) if i != b.b], dtype=int))

    def __len__(self) -> int:
        return len(self.bonds)

    def apply(self, deltas: np.ndarray) -> np.ndarray:
        """Coordinates (s, n, 3) for torsion changes (s, k)."""
        deltas = np.atleast_2d(deltas)
        xyz = np.repeat(self.mol.coords[None], len(deltas), axis=0)
        for j, ((a, b), moving) in enumerate(zip(self.bonds, self.moving)):
            pa, pb = xyz[:, a], xyz[:, b]
            axis = pb - pa
            axis = axis / np.linalg.norm(axis, axis=1, keepdims=True)
            rot = _rodrigues(axis, deltas[:, j])
            rel = xyz[:, moving] - pb[:, None]
            xyz[:, moving] = np.einsum("sij,smj->smi", rot, rel) + pb[:, None]
        return xyz


def conformer_match(reference: Molecule, optimized: Molecule, config: DEConfig = DEConfig()) -> ConformerMatch:
    """Adjust only the torsions of ``optimized`` to minimise its superposed
    heavy-atom RMSD to ``reference``.

    The unchanged conformer is part of the initial population, so the result
    is never worse than plain rigid superposition.
    """
    if not same_graph(reference, optimized):
        raise GraphMismatchError("conformers do not share a molecular graph", [optimized.name or "?"])
    target = reference.coords
    model = TorsionModel(optimized)
    baseline = rmsd(optimized.coords, target, superpose=True)
    k = len(model)
    best = np.zeros(k)
    if k:

        def objective(x: np.ndarray) -> np.ndarray:
            # vectorized call: x is (k, s)
            return batch_superposed_rmsd(model.apply(x.T), target)

        history: list[float] = []

        def plateau(intermediate_result) -> bool:
            history.append(float(intermediate_result.fun))
            n = config.plateau_generations
            return len(history) > n and history[-n - 1] - history[-1] < config.plateau_tol

        result = differential_evolution(
            objective,
            bounds=[(-np.pi, np.pi)] * k,
            strategy="rand1bin",
            popsize=config.popsize,
            mutation=config.mutation,
            recombination=config.recombination,
            maxiter=config.maxiter,
            tol=0.0,
            atol=0.0,
            seed=config.seed,
            polish=False,
            x0=np.zeros(k),
            vectorized=True,
            updating="deferred",
            callback=plateau,
        )
        best = np.asarray(result.x, dtype=float)
    xyz = model.apply(best)[0]
    achieved = rmsd(xyz, target, superpose=True)
    if achieved > baseline:
        best, xyz, achieved = np.zeros(k), optimized.coords.copy(), baseline
    placed = superpose(xyz, target)
    matched = optimized.with_coords(placed)
    torsions = np.array([bond_torsion(matched, a, b)[0] for a, b in model.bonds])
    return ConformerMatch(
        reference, optimized, matched, float(achieved), float(baseline), tuple(model.bonds), best, torsions
    )
