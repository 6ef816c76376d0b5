"""Benchmark construction and fitness functions.

Boolean benchmarks are truth tables; fitness is the fraction of rows whose
entire output vector is reproduced.  The tables are stored row-wise and also
packed column-wise into integer bitmasks so a genome can be scored against
every row with a handful of bitwise operations.

Regression benchmarks are sampled or gridded datasets; fitness is the mean
absolute error over a split.  Randomly sampled datasets are reproducible
from the generator they are built with and can be cached to CSV.

Bit conventions: the encoder/decoder index is binary least-significant-bit
first, while the multiplier reads its operand and product bit vectors
most-significant-bit first (so the row (1,0,1, 0,1,1) means 5 x 3).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .genome import ActiveSet, GraphParams, Genotype, evaluate_batch, evaluate_packed

BOOLEAN_NAMES = ("parity3", "encode16_4", "decode4_16", "multiply3")
REGRESSION_NAMES = ("nguyen7", "koza3", "pagie1", "keijzer6")


@dataclass
class BooleanBenchmark:
    name: str
    num_inputs: int
    num_outputs: int
    table: list[tuple[tuple[int, ...], tuple[int, ...]]]
    input_masks: tuple[int, ...] = field(init=False)
    target_masks: tuple[int, ...] = field(init=False)
    full_mask: int = field(init=False)

    def __post_init__(self) -> None:
        rows = len(self.table)
        in_masks = [0] * self.num_inputs
        out_masks = [0] * self.num_outputs
        for r, (bits_in, bits_out) in enumerate(self.table):
            for i, bit in enumerate(bits_in):
                in_masks[i] |= bit << r
            for o, bit in enumerate(bits_out):
                out_masks[o] |= bit << r
        self.input_masks = tuple(in_masks)
        self.target_masks = tuple(out_masks)
        self.full_mask = (1 << rows) - 1

    @property
    def kind(self) -> str:
        return "boolean"

    @property
    def function_set(self) -> str:
        return "boolean"


@dataclass
class DataSplit:
    xs: np.ndarray  # shape (n_points, num_inputs)
    ys: np.ndarray  # shape (n_points,)

    def __len__(self) -> int:
        return len(self.ys)


@dataclass
class RegressionBenchmark:
    name: str
    num_inputs: int
    train: DataSplit
    test: DataSplit | None = None
    num_outputs: int = 1

    @property
    def kind(self) -> str:
        return "regression"

    @property
    def function_set(self) -> str:
        return "regression"


def _bits_lsb(value: int, width: int) -> tuple[int, ...]:
    return tuple((value >> i) & 1 for i in range(width))


def _bits_msb(value: int, width: int) -> tuple[int, ...]:
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def build_boolean(name: str) -> BooleanBenchmark:
    """Construct one of the four truth-table benchmarks."""
    if name == "parity3":
        table = [
            (_bits_lsb(r, 3), ((_bits_lsb(r, 3)[0] ^ _bits_lsb(r, 3)[1] ^ _bits_lsb(r, 3)[2]),))
            for r in range(8)
        ]
        return BooleanBenchmark(name, 3, 1, table)
    if name == "encode16_4":
        # only the 16 one-hot rows form the encoder's domain
        table = [
            (tuple(1 if i == k else 0 for i in range(16)), _bits_lsb(k, 4))
            for k in range(16)
        ]
        return BooleanBenchmark(name, 16, 4, table)
    if name == "decode4_16":
        table = [
            (_bits_lsb(r, 4), tuple(1 if i == r else 0 for i in range(16)))
            for r in range(16)
        ]
        return BooleanBenchmark(name, 4, 16, table)
    if name == "multiply3":
        table = []
        for a in range(8):
            for b in range(8):
                table.append((_bits_msb(a, 3) + _bits_msb(b, 3), _bits_msb(a * b, 6)))
        return BooleanBenchmark(name, 6, 6, table)
    raise ConfigError(f"unknown boolean benchmark {name!r}; expected one of {BOOLEAN_NAMES}")


def _grid(start: float, stop: float, step: float) -> np.ndarray:
    values = []
    k = 0
    while True:
        v = start + k * step
        if v > stop:
            break
        values.append(v)
        k += 1
    return np.asarray(values, dtype=np.float64)


def build_regression(
    name: str,
    rng: np.random.Generator,
    cache_dir: str | None = None,
    cache_key: str | None = None,
) -> RegressionBenchmark:
    """Construct one of the four regression benchmarks.

    When ``cache_dir`` is given, the generated splits are written to (or,
    when already present, read back from) CSV files keyed by ``cache_key``.
    """
    key = cache_key or name
    if cache_dir is not None:
        cached = _load_cached(name, cache_dir, key)
        if cached is not None:
            return cached

    if name == "nguyen7":
        xs = rng.uniform(0.0, 2.0, 20)
        ys = np.log(xs + 1.0) + np.log(xs**2 + 1.0)
        bench = RegressionBenchmark(name, 1, DataSplit(xs.reshape(-1, 1), ys))
    elif name == "koza3":
        xs = rng.uniform(-1.0, 1.0, 20)
        ys = xs**6 - 2.0 * xs**4 + xs**2
        bench = RegressionBenchmark(name, 1, DataSplit(xs.reshape(-1, 1), ys))
    elif name == "pagie1":
        axis = _grid(-5.0, 5.0, 0.4)
        gx, gy = np.meshgrid(axis, axis, indexing="ij")
        xs = np.column_stack([gx.ravel(), gy.ravel()])
        ys = 1.0 / (1.0 + xs[:, 0] ** -4) + 1.0 / (1.0 + xs[:, 1] ** -4)
        bench = RegressionBenchmark(name, 2, DataSplit(xs, ys))
    elif name == "keijzer6":
        harmonic = np.cumsum(1.0 / np.arange(1, 121, dtype=np.float64))
        train = DataSplit(
            np.arange(1, 51, dtype=np.float64).reshape(-1, 1), harmonic[:50].copy()
        )
        test = DataSplit(
            np.arange(1, 121, dtype=np.float64).reshape(-1, 1), harmonic.copy()
        )
        bench = RegressionBenchmark(name, 1, train, test)
    else:
        raise ConfigError(
            f"unknown regression benchmark {name!r}; expected one of {REGRESSION_NAMES}"
        )

    if cache_dir is not None:
        _write_cache(bench, cache_dir, key)
    return bench


def benchmark_kind(name: str) -> str:
    if name in BOOLEAN_NAMES:
        return "boolean"
    if name in REGRESSION_NAMES:
        return "regression"
    raise ConfigError(
        f"unknown benchmark {name!r}; expected one of {BOOLEAN_NAMES + REGRESSION_NAMES}"
    )


def build_benchmark(
    name: str,
    dataset_rng: np.random.Generator | None = None,
    cache_dir: str | None = None,
    cache_key: str | None = None,
):
    if benchmark_kind(name) == "boolean":
        return build_boolean(name)
    if dataset_rng is None:
        raise ConfigError(f"regression benchmark {name!r} needs a dataset rng")
    return build_regression(name, dataset_rng, cache_dir, cache_key)


def graph_params(bench, num_computational: int, arity: int = 2) -> GraphParams:
    """Graph shape matching a benchmark's inputs, outputs, and function set."""
    return GraphParams(
        num_inputs=bench.num_inputs,
        num_outputs=bench.num_outputs,
        num_computational=num_computational,
        arity=arity,
        function_set=bench.function_set,
    )


def boolean_fitness(
    genome: Genotype, bench: BooleanBenchmark, active: ActiveSet | None = None
) -> float:
    """Fraction of table rows whose full output vector matches; exact in [0, 1]."""
    params = genome.params
    if params.num_inputs != bench.num_inputs or params.num_outputs != bench.num_outputs:
        raise ConfigError(
            f"genome shape {params.num_inputs}->{params.num_outputs} does not match "
            f"{bench.name} ({bench.num_inputs}->{bench.num_outputs})"
        )
    outputs = evaluate_packed(genome, bench.input_masks, bench.full_mask, active)
    wrong = 0
    for out_mask, target in zip(outputs, bench.target_masks):
        wrong |= out_mask ^ target
    rows = len(bench.table)
    return (rows - wrong.bit_count()) / rows


def mae_fitness(
    genome: Genotype, data: DataSplit, active: ActiveSet | None = None
) -> float:
    """Mean absolute error of the genome's single output over the split."""
    if len(data) == 0:
        raise ConfigError("cannot score an empty dataset split")
    if genome.params.num_outputs != 1:
        raise ConfigError("mean-absolute-error scoring expects a single output")
    preds = evaluate_batch(genome, data.xs, active)[:, 0]
    return float(np.mean(np.abs(data.ys - preds)))


def _split_path(cache_dir: str, key: str, split: str) -> str:
    return os.path.join(cache_dir, f"{key}_{split}.csv")


def _write_split_csv(path: str, split: DataSplit) -> None:
    dims = split.xs.shape[1]
    header = ",".join([f"x{i}" for i in range(dims)] + ["y"])
    lines = [header]
    for row, y in zip(split.xs, split.ys):
        lines.append(",".join([repr(float(v)) for v in row] + [repr(float(y))]))
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def _read_split_csv(path: str) -> DataSplit:
    with open(path) as fh:
        lines = [line.strip() for line in fh if line.strip()]
    dims = len(lines[0].split(",")) - 1
    xs, ys = [], []
    for line in lines[1:]:
        parts = [float(v) for v in line.split(",")]
        xs.append(parts[:dims])
        ys.append(parts[dims])
    return DataSplit(np.asarray(xs, dtype=np.float64), np.asarray(ys, dtype=np.float64))


def _write_cache(bench: RegressionBenchmark, cache_dir: str, key: str) -> None:
    os.makedirs(cache_dir, exist_ok=True)
    _write_split_csv(_split_path(cache_dir, key, "train"), bench.train)
    if bench.test is not None:
        _write_split_csv(_split_path(cache_dir, key, "test"), bench.test)


def _load_cached(name: str, cache_dir: str, key: str) -> RegressionBenchmark | None:
    train_path = _split_path(cache_dir, key, "train")
    if not os.path.exists(train_path):
        return None
    train = _read_split_csv(train_path)
    test_path = _split_path(cache_dir, key, "test")
    test = _read_split_csv(test_path) if os.path.exists(test_path) else None
    return RegressionBenchmark(name, train.xs.shape[1], train, test)
