from __future__ import annotations

import logging
import sys
import time

import numpy as np

from . import bounds
from . import constants
from .bench_definition import BenchCase, BenchDefinition
from .bruhat import BruhatResult, bruhat_full, bruhat_step2, verify
from .exceptions import ProgramError
from .gf import FieldParams, field_for_header, field_for_order
from .matgroup import (
    Matrix,
    check_dimension,
    format_matrix,
    random_special,
    read_matrix,
    standard_generators,
)
from .mslp import MatrixGroup, Memory, evaluate, parse, serialize
from .utils import read_text, write_file


logger = logging.getLogger(__name__)


class MSLPBuilder:
    def __init__(self,
                 action: str,
                 filename: str | None = None,
                 output: str | None = None,
                 mode: str = constants.default_mode,
                 result: str | None = None,
                 check_invariants: bool = False,
                 gens: list[str] | None = None,
                 payload: list[str] | None = None,
                 no_eval: bool = False,
                 d: int | None = None,
                 q: int | None = None,
                 seed: int = constants.default_seed,
                 trials: int = constants.default_bench_trials,
                 definition: str | None = None,
                 verbosity: int = constants.default_verbosity,
                 ) -> None:
        """
        Initialize the MSLPBuilder object.

        :param str action: Subcommand to run (gen/eval/verify/random/stats/bench).
        :param str filename: Input matrix or program file, '-' for stdin.
        :param str output: File the primary output goes to; stdout when not given.
        :param str mode: 'step2' emits the program over Y(g, 1, 1), 'full' the one over Y(1, 1, 1).
        :param str result: File receiving w, u1 and u2 from gen.
        :param bool check_invariants: Check the decomposition invariant after every column.
        :param list gens: Matrix files loaded into slots 1, 2, ... instead of the standard generators.
        :param list payload: Matrix files loaded into the slots after the generators.
        :param bool no_eval: Skip re-evaluating emitted programs in verify and bench.
        :param int d: Dimension for random and bench.
        :param int q: Field order for random and bench.
        :param int seed: Random seed; bench counts up from it.
        :param int trials: Matrices per (d, q) in bench.
        :param str definition: Bench definition file; overrides d, q, trials and seed.
        :param int verbosity: Output verbosity level.
        """
        self.action = action
        self.filename = filename
        self.output = output
        self.mode = mode
        self.result = result
        self.check_invariants = check_invariants
        self.gens = gens or []
        self.payload = payload or []
        self.no_eval = no_eval
        self.d = d
        self.q = q
        self.seed = seed
        self.trials = trials
        self.definition = definition
        self.verbosity = verbosity

        if len(self.payload) > len(constants.payload_slots):
            raise ProgramError(f"at most {len(constants.payload_slots)} payload matrices fit into Y")

    def run(self) -> int:
        return getattr(self, self.action)()

    def _read_matrix(self, filename: str) -> tuple[FieldParams, Matrix]:
        return read_matrix(read_text(filename), source=filename)

    def gen(self) -> int:
        field, g = self._read_matrix(self.filename)
        if self.mode == 'step2':
            state, program = bruhat_step2(g, field, check_invariants=self.check_invariants)
            w, u1, u2 = state.w, state.u1, state.u2
            record = program.stats(field_ops=state.field_ops).as_record()
        else:
            result = bruhat_full(g, field, check_invariants=self.check_invariants)
            program = result.word_program
            w, u1, u2 = result.w, result.u1, result.u2
            record = result.word_stats().as_record()
            record.append(f"total_length={result.total_length}")
            record.append(f"ratio={bounds.length_ratio(result.total_length, result.d, field.q):.4f}")

        if self.output:
            write_file(self.output, serialize(program).splitlines())
        else:
            sys.stdout.write(serialize(program))
        if self.result:
            write_file(self.result, _matrix_blocks([w, u1, u2], field))
        write_file(None, record)
        return 0

    def eval(self) -> int:
        program = parse(read_text(self.filename), source=self.filename)
        header = program.header
        field = field_for_header(header.p, header.f, header.modulus)

        if self.gens:
            values = [self._load(name, field, header.d) for name in self.gens]
        else:
            values = standard_generators(header.d, field).as_list()
        values += [self._load(name, field, header.d) for name in self.payload]

        provided = len(values)
        if (self.gens or self.payload) and provided > program.quota:
            raise ProgramError(f"{provided} input matrices do not fit into the program quota of {program.quota} slots")
        if not self.gens:
            provided = max(provided, constants.memory_layout_size)
        missing = [slot for slot in program.input_slots() if slot > provided]
        if missing:
            raise ProgramError(
                f"program reads slots {', '.join(f'm{s}' for s in missing)} but only {provided} inputs were given")

        memory = Memory(MatrixGroup(field, header.d), max(program.quota, len(values)), values)
        output = evaluate(program, memory)
        if not isinstance(output, list):
            output = [output]
        write_file(self.output, _matrix_blocks(output, field))
        return 0

    def _load(self, filename: str, field: FieldParams, d: int) -> Matrix:
        matrix_field, m = self._read_matrix(filename)
        if matrix_field != field or m.shape[0] != d:
            raise ProgramError(
                f"{filename} is a {m.shape[0]}x{m.shape[0]} matrix over {matrix_field}, "
                f"the program header wants d={d} over {field}")
        return m

    def verify(self) -> int:
        field, g = self._read_matrix(self.filename)
        result = bruhat_full(g, field, check_invariants=self.check_invariants)
        report = verify(g, result, evaluate_programs=not self.no_eval)
        write_file(self.output, report.lines(color=sys.stdout.isatty() and not self.output))
        return 0 if report.passed else 1

    def random(self) -> int:
        check_dimension(self.d)
        field = field_for_order(self.q)
        m = random_special(self.d, field, np.random.default_rng(self.seed))
        write_file(self.output, format_matrix(m, field))
        return 0

    def stats(self) -> int:
        program = parse(read_text(self.filename), source=self.filename)
        record = program.stats().as_record()
        record.append('inputs=' + ','.join(str(slot) for slot in program.input_slots()))
        write_file(self.output, record)
        return 0

    def bench(self) -> int:
        if self.definition:
            definition = BenchDefinition(self.definition)
        else:
            if self.d is None or self.q is None:
                raise ProgramError("bench needs either --d and --q or a definition file")
            definition = BenchDefinition.from_args(self.d, self.q, self.trials, self.seed)
        definition.validate()

        rows = [BenchRow.heading()]
        failures = 0
        seed = definition.seed
        for case in definition.cases():
            case_rows = []
            for _ in range(case.trials):
                row = self._bench_trial(case, seed, definition)
                case_rows.append(row)
                failures += not row.passed
                seed += 1
            rows.extend(str(row) for row in case_rows)
            rows.append(_bench_summary(case, case_rows))
            reference = constants.reference_runs.get((case.d, case.q))
            if reference:
                rows.append(f"# reference run d={case.d} q={case.q}: length={reference['length']} "
                            f"slots={reference['slots']} (for comparison)")
        write_file(self.output, rows)
        if failures:
            logger.error("%d bench trials failed verification", failures)
        return 1 if failures else 0

    def _bench_trial(self, case: BenchCase, seed: int, definition: BenchDefinition) -> BenchRow:
        check_dimension(case.d)
        field = field_for_order(case.q)
        g = random_special(case.d, field, np.random.default_rng(seed))

        evaluate_programs = definition.evaluate_programs
        if evaluate_programs is None:
            evaluate_programs = case.d <= constants.eval_dim_limit
        evaluate_programs = evaluate_programs and not self.no_eval

        started = time.perf_counter()
        result = bruhat_full(g, field, check_invariants=definition.check_invariants)
        elapsed = time.perf_counter() - started
        report = verify(g, result, evaluate_programs=evaluate_programs)
        passed = report.passed if definition.assert_bounds else report.passed_ignoring_bounds()
        for check in report.failed():
            logger.warning("d=%d q=%d seed=%d: %s failed %s", case.d, case.q, seed, check.name, check.detail)
        return BenchRow.for_result(result, seed, elapsed, passed)


class BenchRow:
    columns = ('d', 'q', 'seed', 'length', 'bound', 'total', 'ratio', 'quota', 'quota_bound', 'seconds', 'verdict')

    def __init__(self, values: dict):
        self.values = values

    @classmethod
    def heading(cls) -> str:
        return '\t'.join(cls.columns)

    @classmethod
    def for_result(cls, result: BruhatResult, seed: int, elapsed: float, passed: bool) -> BenchRow:
        field = result.field
        return cls({
            'd': result.d,
            'q': field.q,
            'seed': seed,
            'length': result.step2_program.length(),
            'bound': f"{bounds.step2_length(result.d, field.q, field.f):.0f}",
            'total': result.total_length,
            'ratio': f"{bounds.length_ratio(result.total_length, result.d, field.q):.2f}",
            'quota': result.peak_slots,
            'quota_bound': bounds.total_quota(field.f),
            'seconds': f"{elapsed:.3f}",
            'verdict': 'ok' if passed else 'FAIL',
        })

    @property
    def passed(self) -> bool:
        return self.values['verdict'] == 'ok'

    def __str__(self):
        return '\t'.join(str(self.values[column]) for column in self.columns)


def _bench_summary(case: BenchCase, rows: list[BenchRow]) -> str:
    lengths = [row.values['length'] for row in rows]
    quotas = [row.values['quota'] for row in rows]
    return (f"# d={case.d} q={case.q}: {len(rows)} trials, mean length {sum(lengths) / len(lengths):.1f}, "
            f"max length {max(lengths)}, max quota {max(quotas)}")


def _matrix_blocks(matrices: list[Matrix], field: FieldParams) -> list[str]:
    lines: list[str] = []
    for m in matrices:
        if lines:
            lines.append('')
        lines.extend(format_matrix(m, field))
    return lines
