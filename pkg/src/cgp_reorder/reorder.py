"""Genotype reordering operators.

All operators permute the computational nodes of a genotype and remap every
connection gene to the new numbering, leaving the encoded program (the
phenotype) unchanged.  Five operators are provided:

* ``original``     -- topological shuffle: repeatedly place a random node
  whose referenced nodes are all placed already.
* ``equidistant``  -- active nodes land on evenly spaced positions from
  :func:`lin_space`, inactive nodes fill the gaps in their old order.
* ``uniform``      -- like equidistant, but active positions are drawn from
  a continuous uniform distribution over the computational range.
* ``negbias``      -- all active nodes move to the last positions, directly
  before the outputs; inactive nodes move in front of them.
* ``leftskew``     -- like uniform, but positions are drawn from a
  Beta(6, 1) distribution, piling active nodes toward the output end.

The four placement-based operators keep the relative order of active nodes
(and of inactive nodes among themselves), which is what preserves program
semantics.  Inactive nodes can end up with connection genes that point
forward afterwards; those genes are resampled by
:func:`repair_forward_connections`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvariantViolation
from .genome import ActiveSet, Genotype, NodeGene, decode_active

REORDER_KINDS = ("none", "original", "equidistant", "uniform", "negbias", "leftskew")
GATED_KINDS = ("negbias", "leftskew")


@dataclass(frozen=True)
class ReorderStrategy:
    """Which operator to run, and how often (for the gated operators)."""

    kind: str
    p_reorder: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in REORDER_KINDS:
            raise ConfigError(
                f"unknown reorder kind {self.kind!r}; expected one of {REORDER_KINDS}"
            )
        if not 0.0 <= self.p_reorder <= 1.0:
            raise ConfigError(f"p_reorder must be in [0, 1], got {self.p_reorder}")
        if self.kind not in GATED_KINDS and self.p_reorder != 1.0:
            raise ConfigError(
                f"p_reorder is fixed to 1.0 for kind {self.kind!r}"
            )


@dataclass
class PlacementSets:
    """Target positions for active and inactive nodes over one reorder.

    Both lists are strictly increasing, disjoint, and together cover exactly
    the computational range [start, end].
    """

    active_positions: list[int]
    inactive_positions: list[int]
    start: int
    end: int

    @classmethod
    def from_active(
        cls, start: int, end: int, active_positions: list[int]
    ) -> "PlacementSets":
        span = end - start + 1
        if len(active_positions) > span:
            raise InvariantViolation(
                f"{len(active_positions)} active positions do not fit in [{start}, {end}]"
            )
        taken = set(active_positions)
        if len(taken) != len(active_positions):
            raise InvariantViolation("active positions must be distinct")
        for prev, cur in zip(active_positions, active_positions[1:]):
            if cur <= prev:
                raise InvariantViolation("active positions must be ascending")
        if active_positions and not (
            start <= active_positions[0] and active_positions[-1] <= end
        ):
            raise InvariantViolation(
                f"active positions {active_positions[0]}..{active_positions[-1]} "
                f"outside [{start}, {end}]"
            )
        inactive = [p for p in range(start, end + 1) if p not in taken]
        return cls(active_positions, inactive, start, end)


def lin_space(start: int, end: int, count: int) -> list[int]:
    """Evenly spaced integer positions: floor(start + i*(end-start)/count).

    Computed in exact integer arithmetic; for count = 1 the single position
    is ``end``.
    """
    if start > end:
        raise ValueError(f"start {start} must not exceed end {end}")
    if not 1 <= count <= end - start + 1:
        raise ValueError(
            f"count {count} outside [1, {end - start + 1}] for range [{start}, {end}]"
        )
    span = end - start
    return [start + (i * span) // count for i in range(1, count + 1)]


def beta61_from_uniform(u):
    """Inverse-CDF transform of Beta(6, 1): F(x) = x^6, so x = u^(1/6)."""
    return u ** (1.0 / 6.0)


def sample_beta61(rng: np.random.Generator) -> float:
    """One Beta(6, 1) sample in [0, 1]."""
    return float(beta61_from_uniform(rng.random()))


def _distinct_positions(sorted_values, start: int, end: int) -> list[int]:
    """Map ascending continuous samples onto distinct integers in [start, end].

    Each sample is floored; collisions advance to the next free slot to the
    right, and any overflow past ``end`` is swept back leftward from the end.
    The sample order is preserved, so active nodes are never permuted.
    """
    positions: list[int] = []
    prev = start - 1
    for value in sorted_values:
        pos = max(int(math.floor(value)), prev + 1)
        positions.append(pos)
        prev = pos
    limit = end
    for i in range(len(positions) - 1, -1, -1):
        if positions[i] > limit:
            positions[i] = limit
        limit = positions[i] - 1
    return positions


def repair_forward_connections(
    genome: Genotype, rng: np.random.Generator, active: ActiveSet | None = None
) -> int:
    """Resample every forward-pointing connection gene uniformly from [0, pos).

    Mutates ``genome`` in place and returns the number of repaired genes.
    A forward gene that an active node's function actually consumes would
    change the phenotype, so that case raises instead of repairing: it means
    an operator mixed up the active ordering.
    """
    params = genome.params
    fset = params.functions()
    start = params.comp_start
    if active is None:
        active = decode_active(genome)
    repaired = 0
    for idx, node in enumerate(genome.computational):
        position = start + idx
        if all(conn < position for conn in node.connections):
            continue
        consumed = fset.arity_of(node.function_id)
        conns = list(node.connections)
        for k, conn in enumerate(conns):
            if conn < position:
                continue
            if active.bitmap[idx] and k < consumed:
                raise InvariantViolation(
                    f"active node at position {position} consumes a forward "
                    f"connection to {conn}"
                )
            conns[k] = int(rng.integers(position))
            repaired += 1
        genome.computational[idx] = NodeGene(node.function_id, tuple(conns))
    return repaired


def _apply_placement(
    genome: Genotype,
    active: ActiveSet,
    target_positions: list[int],
    rng: np.random.Generator,
) -> Genotype:
    """Move active nodes to ``target_positions``, pack inactive nodes into the
    remaining slots (old order kept on both sides), remap all genes, repair."""
    params = genome.params
    start = params.comp_start
    num = params.num_computational
    placement = PlacementSets.from_active(start, start + num - 1, target_positions)

    position_map = list(range(start + num))
    active_indices = active.positions()
    inactive_indices = [i for i in range(num) if not active.bitmap[i]]
    for old_idx, new_pos in zip(active_indices, placement.active_positions):
        position_map[start + old_idx] = new_pos
    for old_idx, new_pos in zip(inactive_indices, placement.inactive_positions):
        position_map[start + old_idx] = new_pos

    new_nodes: list[NodeGene | None] = [None] * num
    for old_idx, node in enumerate(genome.computational):
        new_idx = position_map[start + old_idx] - start
        new_nodes[new_idx] = NodeGene(
            node.function_id, tuple(position_map[c] for c in node.connections)
        )
    new_outputs = tuple(position_map[c] for c in genome.output_connections)
    placed = Genotype(params, new_nodes, new_outputs)

    new_bitmap = [False] * num
    for pos in placement.active_positions:
        new_bitmap[pos - start] = True
    repair_forward_connections(
        placed, rng, active=ActiveSet(new_bitmap, len(placement.active_positions))
    )
    return placed


def reorder_original(genome: Genotype, rng: np.random.Generator) -> Genotype:
    """Topological shuffle over the literal connection graph.

    Every node whose referenced nodes are all placed (or are inputs) is a
    candidate; one candidate is drawn uniformly at random and appended to the
    new ordering until all nodes are placed.  Because literal genes of both
    active and inactive nodes are respected, no connection can point forward
    afterwards and no repair is needed.
    """
    if decode_active(genome).count == 0:
        return genome
    params = genome.params
    start = params.comp_start
    num = params.num_computational

    unresolved = [0] * num
    dependents: list[list[int]] = [[] for _ in range(num)]
    for idx, node in enumerate(genome.computational):
        for conn in node.connections:
            if conn >= start:
                unresolved[idx] += 1
                dependents[conn - start].append(idx)

    ready = [i for i in range(num) if unresolved[i] == 0]
    order: list[int] = []
    # one batched draw covers the whole shuffle; int(u * len) keeps each
    # pick uniform over the current candidate set
    draws = rng.random(num)
    for u in draws:
        if not ready:
            break
        pick = int(u * len(ready))
        ready[pick], ready[-1] = ready[-1], ready[pick]
        old_idx = ready.pop()
        order.append(old_idx)
        for dep in dependents[old_idx]:
            unresolved[dep] -= 1
            if unresolved[dep] == 0:
                ready.append(dep)
    if len(order) != num:
        raise InvariantViolation("feed-forward genome has no topological completion")

    position_map = list(range(start + num))
    for rank, old_idx in enumerate(order):
        position_map[start + old_idx] = start + rank
    new_nodes: list[NodeGene | None] = [None] * num
    for old_idx, node in enumerate(genome.computational):
        new_idx = position_map[start + old_idx] - start
        new_nodes[new_idx] = NodeGene(
            node.function_id, tuple(position_map[c] for c in node.connections)
        )
    new_outputs = tuple(position_map[c] for c in genome.output_connections)
    return Genotype(params, new_nodes, new_outputs)


def reorder_equidistant(genome: Genotype, rng: np.random.Generator) -> Genotype:
    """Spread the active nodes evenly across the computational range."""
    active = decode_active(genome)
    if active.count == 0:
        return genome
    params = genome.params
    targets = lin_space(params.comp_start, params.comp_end, active.count)
    return _apply_placement(genome, active, targets, rng)


def reorder_uniform(genome: Genotype, rng: np.random.Generator) -> Genotype:
    """Place active nodes at positions drawn uniformly over the range.

    Each of the n samples is uniform over the integer slots [start, end]
    (continuous draw over a width of end - start + 1, floored); sorted
    samples keep the active order, and collisions shift to free slots.
    """
    active = decode_active(genome)
    if active.count == 0:
        return genome
    params = genome.params
    start, end = params.comp_start, params.comp_end
    width = end - start + 1
    samples = np.sort(start + width * rng.random(active.count))
    targets = _distinct_positions(samples, start, end)
    return _apply_placement(genome, active, targets, rng)


def reorder_negbias(genome: Genotype, rng: np.random.Generator) -> Genotype:
    """Move every active node to the tail of the computational range."""
    active = decode_active(genome)
    if active.count == 0:
        return genome
    params = genome.params
    end = params.comp_end
    targets = list(range(end - active.count + 1, end + 1))
    return _apply_placement(genome, active, targets, rng)


def reorder_leftskew(genome: Genotype, rng: np.random.Generator) -> Genotype:
    """Place active nodes at Beta(6, 1)-distributed positions over the range."""
    active = decode_active(genome)
    if active.count == 0:
        return genome
    params = genome.params
    start, end = params.comp_start, params.comp_end
    width = end - start + 1
    samples = np.sort(start + width * beta61_from_uniform(rng.random(active.count)))
    targets = _distinct_positions(samples, start, end)
    return _apply_placement(genome, active, targets, rng)


_OPERATORS = {
    "original": reorder_original,
    "equidistant": reorder_equidistant,
    "uniform": reorder_uniform,
    "negbias": reorder_negbias,
    "leftskew": reorder_leftskew,
}


def maybe_reorder(
    genome: Genotype, strategy: ReorderStrategy, rng: np.random.Generator
) -> Genotype:
    """Apply the strategy's operator with probability ``p_reorder``."""
    if strategy.kind == "none":
        return genome
    if strategy.p_reorder < 1.0 and rng.random() >= strategy.p_reorder:
        return genome
    return _OPERATORS[strategy.kind](genome, rng)
