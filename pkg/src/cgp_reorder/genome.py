"""Single-row CGP genotype: construction, validation, decoding, evaluation.

Global node numbering runs input nodes first, then computational nodes, then
output nodes.  A computational node carries one function gene and a fixed
number of connection genes; every connection gene must reference a strictly
smaller global position, so the encoded graph is feed-forward by
construction.  Functions that consume fewer connections than the genome
stores simply ignore the excess genes, both when decoding which nodes are
active and when evaluating.

A genotype is treated as immutable after construction: mutation and
reordering return new instances and share untouched node records with the
parent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .functions import FunctionSet, get_function_set


@dataclass(frozen=True)
class GraphParams:
    """Shape of the encoded graph: node counts, arity, and function set."""

    num_inputs: int
    num_outputs: int
    num_computational: int
    arity: int = 2
    function_set: str = "boolean"

    def __post_init__(self) -> None:
        for name in ("num_inputs", "num_outputs", "num_computational", "arity"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        get_function_set(self.function_set)

    @property
    def comp_start(self) -> int:
        """Global position of the first computational node."""
        return self.num_inputs

    @property
    def comp_end(self) -> int:
        """Global position of the last computational node."""
        return self.num_inputs + self.num_computational - 1

    @property
    def num_connectable(self) -> int:
        """Positions an output connection may target (inputs + computational)."""
        return self.num_inputs + self.num_computational

    def functions(self) -> FunctionSet:
        return get_function_set(self.function_set)


@dataclass(slots=True)
class NodeGene:
    """One computational node: function gene plus its connection genes."""

    function_id: int
    connections: tuple[int, ...]


@dataclass
class Genotype:
    params: GraphParams
    computational: list[NodeGene]
    output_connections: tuple[int, ...]


@dataclass
class ActiveSet:
    """Which computational nodes lie on a path to an output.

    ``bitmap[i]`` is indexed by computational position (0-based, not global).
    """

    bitmap: list[bool]
    count: int

    def positions(self) -> list[int]:
        """Ascending computational indices of the active nodes."""
        return [i for i, a in enumerate(self.bitmap) if a]


def random_genome(params: GraphParams, rng: np.random.Generator) -> Genotype:
    """Sample a uniformly random valid genotype for the given shape."""
    fset = params.functions()
    nodes = []
    for i in range(params.num_computational):
        position = params.comp_start + i
        fid = int(rng.integers(fset.size))
        conns = tuple(int(rng.integers(position)) for _ in range(params.arity))
        nodes.append(NodeGene(fid, conns))
    outputs = tuple(
        int(rng.integers(params.num_connectable)) for _ in range(params.num_outputs)
    )
    return Genotype(params, nodes, outputs)


def decode_active(genome: Genotype) -> ActiveSet:
    """Backward reachability from the output connections.

    Only the connection genes a node's function actually consumes are
    followed; the unused genes of sub-arity functions never activate a node.
    """
    params = genome.params
    arities = params.functions().arities
    start = params.comp_start
    nodes = genome.computational
    bitmap = [False] * params.num_computational
    stack = [c - start for c in genome.output_connections if c >= start]
    count = 0
    while stack:
        idx = stack.pop()
        if bitmap[idx]:
            continue
        bitmap[idx] = True
        count += 1
        node = nodes[idx]
        for conn in node.connections[: arities[node.function_id]]:
            if conn >= start:
                stack.append(conn - start)
    return ActiveSet(bitmap, count)


def evaluate(genome: Genotype, inputs: Sequence) -> list:
    """Forward pass for a single input vector (row semantics).

    Boolean genomes take and return {0, 1} ints; regression genomes floats.
    """
    params = genome.params
    if len(inputs) != params.num_inputs:
        raise ConfigError(
            f"expected {params.num_inputs} inputs, got {len(inputs)}"
        )
    fset = params.functions()
    start = params.comp_start
    active = decode_active(genome)
    values: dict[int, object] = {i: inputs[i] for i in range(params.num_inputs)}
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for idx in active.positions():
            node = genome.computational[idx]
            consumed = fset.arity_of(node.function_id)
            args = [values[c] for c in node.connections[:consumed]]
            values[start + idx] = fset.apply(node.function_id, args)
    if fset.is_boolean:
        return [int(values[c]) for c in genome.output_connections]
    return [float(values[c]) for c in genome.output_connections]


def evaluate_packed(
    genome: Genotype,
    input_masks: Sequence[int],
    full_mask: int,
    active: ActiveSet | None = None,
) -> list[int]:
    """Evaluate a Boolean genome on all truth-table rows at once.

    ``input_masks[i]`` packs input bit i across rows (bit r = row r's value);
    the returned masks pack each output column the same way.  Semantically
    identical to calling :func:`evaluate` row by row.
    """
    params = genome.params
    fset = params.functions()
    if not fset.is_boolean:
        raise ConfigError("packed evaluation is defined for the boolean set only")
    start = params.comp_start
    if active is None:
        active = decode_active(genome)
    values: list = [0] * params.num_connectable
    for i in range(params.num_inputs):
        values[i] = int(input_masks[i])
    entries = fset.entries
    nodes = genome.computational
    bitmap = active.bitmap
    for idx in range(params.num_computational):
        if not bitmap[idx]:
            continue
        node = nodes[idx]
        conns = node.connections
        values[start + idx] = entries[node.function_id].fn(
            values[conns[0]], values[conns[1]], full_mask
        )
    return [values[c] for c in genome.output_connections]


def evaluate_batch(
    genome: Genotype,
    xs: np.ndarray,
    active: ActiveSet | None = None,
) -> np.ndarray:
    """Evaluate a regression genome on a batch of points.

    ``xs`` has shape (n_points, num_inputs); the result has shape
    (n_points, num_outputs).
    """
    params = genome.params
    fset = params.functions()
    if fset.is_boolean:
        raise ConfigError("batch evaluation is defined for the regression set only")
    if xs.ndim != 2 or xs.shape[1] != params.num_inputs:
        raise ConfigError(f"expected shape (n, {params.num_inputs}), got {xs.shape}")
    start = params.comp_start
    if active is None:
        active = decode_active(genome)
    values: list = [None] * params.num_connectable
    for i in range(params.num_inputs):
        values[i] = xs[:, i].astype(np.float64)
    entries = fset.entries
    nodes = genome.computational
    bitmap = active.bitmap
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for idx in range(params.num_computational):
            if not bitmap[idx]:
                continue
            node = nodes[idx]
            spec = entries[node.function_id]
            conns = node.connections
            if spec.arity == 1:
                result = spec.fn(values[conns[0]])
            else:
                result = spec.fn(values[conns[0]], values[conns[1]])
            values[start + idx] = np.asarray(result, dtype=np.float64)
    if len(genome.output_connections) == 1:
        return values[genome.output_connections[0]][:, None]
    return np.column_stack([values[c] for c in genome.output_connections])


def validate(genome: Genotype) -> list[str]:
    """Check every genotype invariant; returns one message per violation."""
    params = genome.params
    fset = params.functions()
    start = params.comp_start
    report: list[str] = []
    if len(genome.computational) != params.num_computational:
        report.append(
            f"expected {params.num_computational} computational nodes, "
            f"got {len(genome.computational)}"
        )
    for idx, node in enumerate(genome.computational):
        position = start + idx
        if not 0 <= node.function_id < fset.size:
            report.append(f"node {position}: function id {node.function_id} out of range")
        if len(node.connections) != params.arity:
            report.append(
                f"node {position}: expected {params.arity} connection genes, "
                f"got {len(node.connections)}"
            )
        for k, conn in enumerate(node.connections):
            if not 0 <= conn < position:
                report.append(
                    f"node {position}: connection {k} -> {conn} is not feed-forward"
                )
    if len(genome.output_connections) != params.num_outputs:
        report.append(
            f"expected {params.num_outputs} output connections, "
            f"got {len(genome.output_connections)}"
        )
    for k, conn in enumerate(genome.output_connections):
        if not 0 <= conn < params.num_connectable:
            report.append(
                f"output {k} -> {conn} must reference an input or computational position"
            )
    return report


def to_flat_text(genome: Genotype) -> str:
    """Flat serialization: one `pos function_id conn...` line per node,
    then one `out_i conn` line per output. Shape metadata rides in comments."""
    params = genome.params
    lines = [
        f"# inputs={params.num_inputs} outputs={params.num_outputs} "
        f"nodes={params.num_computational} arity={params.arity} "
        f"function_set={params.function_set}"
    ]
    for idx, node in enumerate(genome.computational):
        conns = " ".join(str(c) for c in node.connections)
        lines.append(f"{params.comp_start + idx} {node.function_id} {conns}")
    for k, conn in enumerate(genome.output_connections):
        lines.append(f"out_{k} {conn}")
    return "\n".join(lines) + "\n"


def from_flat_text(text: str) -> Genotype:
    """Parse the output of :func:`to_flat_text` (header comment required)."""
    header = None
    node_lines: list[list[str]] = []
    output_lines: list[list[str]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if header is None and "inputs=" in line:
                header = dict(
                    part.split("=", 1) for part in line.lstrip("# ").split()
                )
            continue
        fields = line.split()
        if fields[0].startswith("out_"):
            output_lines.append(fields)
        else:
            node_lines.append(fields)
    if header is None:
        raise ConfigError("flat genome text is missing its shape header comment")
    params = GraphParams(
        num_inputs=int(header["inputs"]),
        num_outputs=int(header["outputs"]),
        num_computational=int(header["nodes"]),
        arity=int(header["arity"]),
        function_set=header["function_set"],
    )
    nodes = [
        NodeGene(int(fields[1]), tuple(int(c) for c in fields[2:]))
        for fields in sorted(node_lines, key=lambda f: int(f[0]))
    ]
    outputs = tuple(
        int(fields[1])
        for fields in sorted(output_lines, key=lambda f: int(f[0].split("_")[1]))
    )
    genome = Genotype(params, nodes, outputs)
    problems = validate(genome)
    if problems:
        raise ConfigError("flat genome text is invalid: " + "; ".join(problems))
    return genome
