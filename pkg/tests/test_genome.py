import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cgp_reorder.errors import ConfigError
from cgp_reorder.genome import (
    GraphParams,
    Genotype,
    NodeGene,
    decode_active,
    evaluate,
    evaluate_batch,
    evaluate_packed,
    from_flat_text,
    random_genome,
    to_flat_text,
    validate,
)

from conftest import chain_genome, fig1_genome, parity3_xor_genome


class TestGraphParams:
    def test_rejects_nonpositive_counts(self):
        with pytest.raises(ConfigError):
            GraphParams(0, 1, 3)
        with pytest.raises(ConfigError):
            GraphParams(2, 1, 0)

    def test_rejects_unknown_function_set(self):
        with pytest.raises(ConfigError):
            GraphParams(2, 1, 3, function_set="unknown")

    def test_position_helpers(self):
        p = GraphParams(2, 1, 3)
        assert p.comp_start == 2
        assert p.comp_end == 4
        assert p.num_connectable == 5


class TestDecodeActive:
    def test_fig1_active_set(self):
        active = decode_active(fig1_genome())
        assert active.bitmap == [False, True, True]
        assert active.count == 2

    def test_output_to_input_gives_empty_active_set(self):
        params = GraphParams(2, 1, 3, 2, "boolean")
        g = Genotype(params, [NodeGene(0, (0, 1))] * 3, (0,))
        active = decode_active(g)
        assert active.count == 0
        assert active.positions() == []

    def test_full_chain_all_active(self):
        g = chain_genome(10)
        assert decode_active(g).count == 10

    def test_unary_excess_gene_does_not_activate(self):
        # SIN node consumes only its first connection; the second points at
        # another computational node that must stay inactive
        params = GraphParams(1, 1, 3, 2, "regression")
        nodes = [NodeGene(0, (0, 0)), NodeGene(0, (0, 0)), NodeGene(4, (0, 2))]
        g = Genotype(params, nodes, (3,))
        active = decode_active(g)
        assert active.bitmap == [False, False, True]

    def test_idempotent_pure_function(self):
        g = fig1_genome()
        assert decode_active(g) == decode_active(g)


class TestEvaluate:
    def test_fig1_subtract_then_double(self):
        assert evaluate(fig1_genome(), [5.0, 3.0]) == [4.0]

    @pytest.mark.parametrize("x", [0.0, 1.0, -7.5, 123.25])
    def test_fig1_equal_inputs_give_zero(self, x):
        assert evaluate(fig1_genome(), [x, x]) == [0.0]

    def test_parity_circuit_against_xor_oracle(self):
        g = parity3_xor_genome()
        for r in range(8):
            bits = [(r >> i) & 1 for i in range(3)]
            assert evaluate(g, bits) == [bits[0] ^ bits[1] ^ bits[2]]

    def test_parity_circuit_row_110(self):
        assert evaluate(parity3_xor_genome(), [1, 1, 0]) == [0]

    def test_deterministic(self):
        g = fig1_genome()
        assert evaluate(g, [2.0, 9.0]) == evaluate(g, [2.0, 9.0])

    def test_wrong_input_count_rejected(self):
        with pytest.raises(ConfigError):
            evaluate(fig1_genome(), [1.0])


class TestRandomGenome:
    def test_first_computational_node_references_inputs_only(self):
        params = GraphParams(2, 1, 3)
        for seed in range(30):
            g = random_genome(params, np.random.default_rng(seed))
            assert all(c in (0, 1) for c in g.computational[0].connections)

    def test_single_node_single_input(self):
        params = GraphParams(1, 1, 1)
        for seed in range(10):
            g = random_genome(params, np.random.default_rng(seed))
            assert g.computational[0].connections == (0, 0)
            assert g.output_connections[0] in (0, 1)

    def test_fixed_seed_reproducible(self):
        params = GraphParams(2, 1, 3)
        a = random_genome(params, np.random.default_rng(42))
        b = random_genome(params, np.random.default_rng(42))
        assert a == b

    @pytest.mark.parametrize(
        "params",
        [
            GraphParams(2, 1, 10, 2, "boolean"),
            GraphParams(3, 1, 40, 2, "boolean"),
            GraphParams(6, 6, 25, 2, "boolean"),
            GraphParams(1, 1, 30, 2, "regression"),
            GraphParams(2, 1, 15, 2, "regression"),
        ],
    )
    def test_thousand_random_genomes_validate_clean(self, params):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            assert validate(random_genome(params, rng)) == []


class TestValidate:
    def test_forward_connection_reported_with_position(self):
        params = GraphParams(2, 1, 6)
        g = random_genome(params, np.random.default_rng(0))
        g.computational[3] = NodeGene(0, (7, 0))  # node at position 5 -> 7
        report = validate(g)
        assert len(report) == 1
        assert "node 5" in report[0] and "7" in report[0]

    def test_output_pointing_at_output_position_reported(self):
        params = GraphParams(2, 1, 3)
        g = random_genome(params, np.random.default_rng(0))
        g.output_connections = (5,)  # first output position
        report = validate(g)
        assert len(report) == 1
        assert "output" in report[0]

    def test_bad_function_id_reported(self):
        g = fig1_genome()
        g.computational[0] = NodeGene(99, (0, 1))
        assert any("function id" in line for line in validate(g))


class TestPackedEvaluation:
    def _packed_inputs(self, num_inputs):
        rows = 1 << num_inputs
        masks = [0] * num_inputs
        for r in range(rows):
            for i in range(num_inputs):
                masks[i] |= ((r >> i) & 1) << r
        return masks, (1 << rows) - 1

    @pytest.mark.parametrize("num_inputs,num_outputs", [(3, 1), (4, 2), (6, 6)])
    def test_packed_equals_rowwise(self, num_inputs, num_outputs):
        params = GraphParams(num_inputs, num_outputs, 20, 2, "boolean")
        masks, full = self._packed_inputs(num_inputs)
        rng = np.random.default_rng(5)
        for _ in range(25):
            g = random_genome(params, rng)
            packed = evaluate_packed(g, masks, full)
            for r in range(1 << num_inputs):
                bits = [(r >> i) & 1 for i in range(num_inputs)]
                rowwise = evaluate(g, bits)
                assert [(m >> r) & 1 for m in packed] == rowwise

    def test_packed_rejects_regression_set(self):
        with pytest.raises(ConfigError):
            evaluate_packed(fig1_genome(), [0, 0], 1)


class TestBatchEvaluation:
    def test_batch_equals_scalar(self):
        params = GraphParams(2, 1, 15, 2, "regression")
        xs = np.array([[0.5, 1.5], [2.0, -3.0], [1.0, 1.0], [-0.25, 8.0]])
        rng = np.random.default_rng(11)
        for _ in range(25):
            g = random_genome(params, rng)
            batch = evaluate_batch(g, xs)
            for row in range(xs.shape[0]):
                scalar = evaluate(g, list(xs[row]))
                np.testing.assert_allclose(batch[row], scalar, rtol=1e-12, atol=1e-12)

    def test_batch_rejects_boolean_set(self):
        g = chain_genome(3)
        with pytest.raises(ConfigError):
            evaluate_batch(g, np.zeros((2, 2)))

    def test_batch_output_finite_for_finite_inputs(self):
        params = GraphParams(1, 1, 30, 2, "regression")
        xs = np.linspace(-50, 50, 31).reshape(-1, 1)
        rng = np.random.default_rng(3)
        for _ in range(50):
            g = random_genome(params, rng)
            assert np.all(np.isfinite(evaluate_batch(g, xs)))


class TestFlatSerialization:
    def test_round_trip(self):
        params = GraphParams(3, 2, 12, 2, "boolean")
        for seed in range(10):
            g = random_genome(params, np.random.default_rng(seed))
            assert from_flat_text(to_flat_text(g)) == g

    def test_format_lines(self):
        text = to_flat_text(fig1_genome())
        lines = text.strip().splitlines()
        assert lines[1] == "2 3 0 1"
        assert lines[-1] == "out_0 4"

    def test_missing_header_rejected(self):
        with pytest.raises(ConfigError):
            from_flat_text("2 0 0 1\nout_0 2\n")


def full_forward_pass(genome, inputs):
    """Reference evaluation computing every node, active or not."""
    params = genome.params
    fset = params.functions()
    values = dict(enumerate(inputs))
    with np.errstate(all="ignore"):
        for idx, node in enumerate(genome.computational):
            consumed = fset.arity_of(node.function_id)
            args = [values[c] for c in node.connections[:consumed]]
            values[params.comp_start + idx] = fset.apply(node.function_id, args)
    caster = int if fset.is_boolean else float
    return [caster(values[c]) for c in genome.output_connections]


class TestFullPassEquivalence:
    def test_boolean_full_pass_matches_active_only(self):
        params = GraphParams(3, 2, 18, 2, "boolean")
        for seed in range(30):
            g = random_genome(params, np.random.default_rng(seed))
            for r in range(8):
                bits = [(r >> i) & 1 for i in range(3)]
                assert evaluate(g, bits) == full_forward_pass(g, bits)

    def test_regression_full_pass_matches_active_only(self):
        params = GraphParams(2, 1, 12, 2, "regression")
        points = [[0.5, -1.5], [2.0, 3.0], [-0.75, 0.1]]
        for seed in range(30):
            g = random_genome(params, np.random.default_rng(seed))
            for point in points:
                assert evaluate(g, point) == full_forward_pass(g, point)


genome_shapes = st.sampled_from(
    [
        (2, 1, 8, "boolean"),
        (3, 1, 12, "boolean"),
        (4, 3, 10, "boolean"),
        (1, 1, 9, "regression"),
        (2, 2, 14, "regression"),
    ]
)


@given(genome_shapes, st.integers(0, 2**32 - 1))
def test_random_genomes_always_valid(shape, seed):
    num_in, num_out, nodes, fset = shape
    params = GraphParams(num_in, num_out, nodes, 2, fset)
    g = random_genome(params, np.random.default_rng(seed))
    assert validate(g) == []
    active = decode_active(g)
    assert active.count == sum(active.bitmap)
