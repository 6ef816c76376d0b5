import numpy as np
import pytest
from hypothesis import settings

from cgp_reorder.genome import GraphParams, Genotype, NodeGene, random_genome

settings.register_profile("cgp", max_examples=50, deadline=None)
settings.load_profile("cgp")


def fig1_genome() -> Genotype:
    """The worked example graph: two inputs, an unused divider, a subtractor,
    and an adder that doubles the difference; the output reads the adder."""
    params = GraphParams(2, 1, 3, 2, "regression")
    nodes = [
        NodeGene(3, (0, 1)),  # PDIV, inactive
        NodeGene(1, (0, 1)),  # SUB
        NodeGene(0, (3, 3)),  # ADD of SUB with itself
    ]
    return Genotype(params, nodes, (4,))


def chain_genome(num_nodes: int, function_set: str = "boolean") -> Genotype:
    """Every node consumes its predecessor; output reads the last node, so
    all computational nodes are active."""
    params = GraphParams(2, 1, num_nodes, 2, function_set)
    nodes = [
        NodeGene(0, (params.comp_start + i - 1,) * 2 if i else (0, 1))
        for i in range(num_nodes)
    ]
    return Genotype(params, nodes, (params.comp_end,))


def parity3_xor_genome() -> Genotype:
    """Exact 3-bit parity circuit from NAND gates: XOR(a, b) built twice.

    XOR(a, b) = NAND(NAND(a, NAND(a, b)), NAND(b, NAND(a, b))).
    """
    params = GraphParams(3, 1, 8, 2, "boolean")
    NAND = 2

    def xor_nodes(a: int, b: int, base: int) -> list[NodeGene]:
        # node positions base..base+3; result at base+3
        return [
            NodeGene(NAND, (a, b)),
            NodeGene(NAND, (a, base)),
            NodeGene(NAND, (b, base)),
            NodeGene(NAND, (base + 1, base + 2)),
        ]

    nodes = xor_nodes(0, 1, 3) + xor_nodes(6, 2, 7)
    return Genotype(params, nodes, (10,))


def random_genomes(params: GraphParams, count: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    return [random_genome(params, rng) for _ in range(count)]


def packed_inputs(num_inputs: int) -> tuple[list[int], int]:
    """Column bitmasks enumerating all 2^num_inputs input rows."""
    rows = 1 << num_inputs
    masks = [0] * num_inputs
    for r in range(rows):
        for i in range(num_inputs):
            masks[i] |= ((r >> i) & 1) << r
    return masks, (1 << rows) - 1


BOOLEAN_SHAPES = {
    "parity3": (3, 1),
    "encode16_4": (16, 4),
    "decode4_16": (4, 16),
    "multiply3": (6, 6),
}

REGRESSION_SHAPES = {
    "nguyen7": (1, 1),
    "koza3": (1, 1),
    "pagie1": (2, 1),
    "keijzer6": (1, 1),
}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
