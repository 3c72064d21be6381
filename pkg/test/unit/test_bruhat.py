import time
from dataclasses import replace

import numpy as np
import pytest

from mslp_builder import bounds
from mslp_builder import constants
from mslp_builder.bruhat import (
    BasisWalker,
    Direction,
    Side,
    bruhat_full,
    bruhat_step2,
    shift_basis,
    t21_basis,
    trans_arbitrary,
    trans_offdiag,
    verify,
)
from mslp_builder.exceptions import DeterminantError, DimensionError, ProgramError
from mslp_builder.matgroup import (
    identity,
    is_lower_unitriangular,
    is_monomial,
    mat_inv,
    permutation_matrix,
    Permutation,
    random_special,
    standard_generators,
    transvection,
)
from mslp_builder.mslp import MatrixGroup, Memory, Program, ProgramHeader, SlotBuilder, evaluate


def new_builder(gf, d, reserved=constants.memory_layout_size):
    return SlotBuilder(ProgramHeader.for_field(gf, d), reserved=reserved)


def run_on_generators(builder, gens):
    program = builder.build()
    memory = Memory(MatrixGroup(gens.field, gens.d), program.quota, gens.memory_layout())
    if program.instructions:
        evaluate(program, memory)
    return memory


def assert_basis(memory, slots, gf, i):
    for level, slot in enumerate(slots):
        assert np.array_equal(memory[slot], transvection(gf, memory.group.d, i, i - 1, gf.primitive ** level))


@pytest.mark.parametrize('d', [3, 4, 5, 6])
@pytest.mark.parametrize('q', [2, 4, 8, 9, 27])
def test_t21_basis(d, q, field):
    gf = field(q)
    gens = standard_generators(d, gf)
    builder = new_builder(gf, d)
    slots = t21_basis(builder, gf.f, d % 2 == 1)
    assert len(slots) == gf.f
    assert builder.length == (2 if gf.f == 1 else bounds.t21_basis_length(gf.f))
    assert builder.max_slot <= bounds.t21_basis_quota(gf.f)
    assert_basis(run_on_generators(builder, gens), slots, gf, 2)


@pytest.mark.parametrize('d', [3, 4, 5, 6, 7, 8])
@pytest.mark.parametrize('q', [2, 3, 4, 5, 8, 9])
def test_walker_reaches_every_basis(d, q, field):
    gf = field(q)
    gens = standard_generators(d, gf)
    builder = new_builder(gf, d)
    walker = BasisWalker(builder, d, gf.f)
    for i in [d, 2, d // 2 + 1, 3, d, d - 1]:
        walker.walk_to(i)
        assert i in walker.live_indices()
        assert_basis(run_on_generators(builder, gens), walker.slots(i), gf, i)
    walker.release()
    assert not builder.live_slots


def test_even_walker_keeps_a_window(field):
    gf = field(4)
    builder = new_builder(gf, 6)
    walker = BasisWalker(builder, 6, gf.f)
    walker.start()
    assert walker.live_indices() == [2, 3]
    assert shift_basis(walker, Direction.FORWARD) == 2 * gf.f
    assert walker.live_indices() == [3, 4]
    with pytest.raises(ProgramError, match='not live'):
        walker.slots(2)


@pytest.mark.parametrize('q', [2, 4, 8, 9])
def test_even_start_holds_one_conjugator_slot(q, field):
    gf = field(q)
    gens = standard_generators(6, gf)
    builder = new_builder(gf, 6)
    walker = BasisWalker(builder, 6, gf.f)
    t2_cost = 2 if gf.f == 1 else bounds.t21_basis_length(gf.f)
    assert walker.start() == t2_cost + 2 * gf.f + 2
    assert builder.max_slot == constants.memory_layout_size + 2 * gf.f + 1
    assert len(builder.live_slots) == 2 * gf.f
    memory = run_on_generators(builder, gens)
    assert_basis(memory, walker.slots(2), gf, 2)
    assert_basis(memory, walker.slots(3), gf, 3)


def test_walker_range(field):
    gf = field(5)
    odd = BasisWalker(new_builder(gf, 5), 5, gf.f)
    with pytest.raises(ProgramError, match='not been started'):
        odd.shift(Direction.FORWARD)
    odd.start()
    with pytest.raises(ProgramError, match='below T_2'):
        odd.shift(Direction.BACKWARD)
    odd.walk_to(5)
    with pytest.raises(ProgramError, match='past'):
        odd.shift(Direction.FORWARD)
    for i in (1, 6):
        with pytest.raises(ProgramError, match='no transvection basis'):
            odd.walk_to(i)

    even = BasisWalker(new_builder(gf, 4), 4, gf.f)
    even.start()
    even.shift(Direction.FORWARD)
    with pytest.raises(ProgramError, match='cannot shift'):
        even.shift(Direction.FORWARD)


@pytest.mark.parametrize('q', [2, 3, 4, 5, 8, 9])
def test_trans_arbitrary_covers_the_field(q, field):
    gf = field(q)
    d = 3
    basis = [transvection(gf, d, 2, 1, gf.primitive ** level) for level in range(gf.f)]
    for value in range(1, q):
        alpha = gf.element(value)
        builder = new_builder(gf, d, reserved=gf.f)
        dst = builder.alloc('t')
        assert trans_arbitrary(builder, list(range(1, gf.f + 1)), alpha, gf, dst)
        program = builder.build()
        assert program.length() <= bounds.arbitrary_transvection_length(q, gf.f)
        assert program.quota <= bounds.arbitrary_transvection_quota(gf.f)
        memory = Memory(MatrixGroup(gf, d), program.quota, basis)
        evaluate(program, memory)
        assert np.array_equal(memory[dst], transvection(gf, d, 2, 1, alpha))


def test_trans_arbitrary_of_zero(field):
    gf = field(8)
    builder = new_builder(gf, 3, reserved=3)
    assert not trans_arbitrary(builder, [1, 2, 3], gf.zero, gf, 4)
    assert not builder.instructions


@pytest.mark.parametrize('side,operands,expected', [
    (Side.LEFT, [(4, 3, 'alpha'), (3, 1, 1)], (4, 1)),
    (Side.RIGHT, [(3, 2, 'alpha'), (4, 3, 1)], (4, 2)),
])
def test_trans_offdiag(side, operands, expected, field):
    gf = field(9)
    alpha = gf.primitive ** 5
    values = [transvection(gf, 4, i, j, alpha if a == 'alpha' else a) for i, j, a in operands]
    builder = new_builder(gf, 4, reserved=2)
    dst = builder.alloc('t')
    trans_offdiag(builder, 1, 2, dst, side, *expected)
    program = builder.build()
    assert program.length() == 4
    memory = Memory(MatrixGroup(gf, 4), program.quota, values)
    evaluate(program, memory)
    assert np.array_equal(memory[dst], transvection(gf, 4, *expected, alpha))


@pytest.mark.parametrize('d', [4, 5, 6])
@pytest.mark.parametrize('q', [2, 3, 4, 5, 8, 9])
def test_commutator_forms_for_every_entry(d, q, field):
    gf = field(q)
    for i in range(3, d + 1):
        for j in range(1, i - 1):
            for level in range(gf.f):
                alpha = gf.primitive ** level
                forms = {
                    Side.LEFT: [transvection(gf, d, i, i - 1, alpha), transvection(gf, d, i - 1, j, 1)],
                    Side.RIGHT: [transvection(gf, d, j + 1, j, alpha), transvection(gf, d, i, j + 1, 1)],
                }
                for side, values in forms.items():
                    builder = new_builder(gf, d, reserved=2)
                    dst = builder.alloc('t')
                    trans_offdiag(builder, 1, 2, dst, side, i, j)
                    program = builder.build()
                    memory = Memory(MatrixGroup(gf, d), program.quota, values)
                    evaluate(program, memory)
                    assert np.array_equal(memory[dst], transvection(gf, d, i, j, alpha))


def test_trans_offdiag_rejects_subdiagonal(field):
    builder = new_builder(field(5), 4, reserved=2)
    with pytest.raises(ProgramError, match='subdiagonal'):
        trans_offdiag(builder, 1, 2, 3, Side.LEFT, 3, 2)


def assert_decomposition(g, gf, evaluate_programs=True):
    result = bruhat_full(g, gf, check_invariants=True)
    report = verify(g, result, evaluate_programs=evaluate_programs)
    assert report.passed_ignoring_bounds(), report.lines()
    d = g.shape[0]
    assert result.step2_program.length() <= bounds.step2_length(d, gf.q, gf.f)
    assert result.step2_program.quota <= bounds.step2_quota(d, gf.f)
    assert result.peak_slots <= bounds.total_quota(gf.f)
    assert bounds.length_ratio(result.total_length, d, gf.q) <= constants.length_ratio_limit
    return result


@pytest.mark.parametrize('d', [3, 4, 5, 6, 7, 8])
@pytest.mark.parametrize('q', [2, 3, 4, 5, 7, 8, 9])
def test_decomposition(d, q, field, rng):
    gf = field(q)
    for _ in range(2):
        result = assert_decomposition(random_special(d, gf, rng), gf)
        assert is_monomial(result.w)
        assert is_lower_unitriangular(result.u1) and is_lower_unitriangular(result.u2)


@pytest.mark.slow
@pytest.mark.parametrize('d', range(3, 21))
@pytest.mark.parametrize('q', [2, 3, 4, 5, 7, 8, 9, 16, 25, 27, 32])
def test_decomposition_sweep(d, q, field, rng):
    gf = field(q)
    for _ in range(5):
        assert_decomposition(random_special(d, gf, rng), gf)


def test_identity_needs_no_instructions(field):
    gf = field(7)
    result = assert_decomposition(identity(gf, 5), gf)
    assert result.total_length == 0
    assert np.array_equal(result.w, identity(gf, 5))


def test_monomial_input_skips_step_2(field):
    gf = field(5)
    g = permutation_matrix(gf, Permutation.from_cycles(4, [1, 3]))
    g[0, :] = -g[0, :]
    result = assert_decomposition(g, gf)
    assert result.step2_program.length() == 0
    assert np.array_equal(result.w, g)


def test_lower_unitriangular_input_lands_in_u2(field, rng):
    gf = field(9)
    g = identity(gf, 5)
    for i in range(1, 5):
        g[i, :i] = gf.GF(rng.integers(0, 9, size=i))
    result = assert_decomposition(g, gf)
    assert np.array_equal(result.w, identity(gf, 5))
    assert np.array_equal(result.u1, identity(gf, 5))
    assert np.array_equal(result.u2, g)


def test_subroutine_records(field, rng):
    gf = field(8)
    state, program = bruhat_step2(random_special(7, gf, rng), gf)
    names = {record.name for record in state.records}
    assert names <= {'first_transvections', 'left_update', 'last_transvections', 'right_update'}
    assert 'left_update' in names
    for record in state.records:
        if record.name == 'left_update':
            assert record.work <= bounds.left_update_length(gf.q, gf.f)
        elif record.name == 'first_transvections':
            assert record.work <= bounds.first_transvections_length(record.index - 1, gf.q, gf.f)
    # the rest is the final inversion of u1 and u2
    assert program.length() - sum(record.total for record in state.records) in (0, 1, 2)
    assert sorted(state.pivots) == list(range(1, 8))
    assert sorted(state.pivots.values()) == list(range(1, 8))


def test_step2_stats_count_field_operations(field, rng):
    gf = field(5)
    result = bruhat_full(random_special(4, gf, rng), gf)
    assert result.step2_stats().field_ops == result.state.field_ops > 0
    assert result.word_stats().field_ops == result.state.field_ops + 4
    assert result.word_stats().length == result.word_program.length()


def test_word_program_needs_only_the_generators(field, rng):
    gf = field(4)
    g = random_special(6, gf, rng)
    result = bruhat_full(g, gf)
    gens = standard_generators(6, gf)
    memory = Memory(MatrixGroup(gf, 6), result.word_program.quota, gens.memory_layout())
    evaluate(result.word_program, memory)
    w, u1, u2 = memory[11], memory[12], memory[13]
    assert np.array_equal(u1 @ w @ u2, g)
    assert np.array_equal(mat_inv(u1) @ g @ mat_inv(u2), w)


def test_verify_flags_a_tampered_result(field, rng):
    gf = field(7)
    g = random_special(4, gf, rng)
    result = bruhat_full(g, gf)
    tampered = replace(result, u1=result.u1 @ transvection(gf, 4, 3, 1, 2))
    report = verify(g, tampered)
    assert not report.passed
    failed = {check.name for check in report.failed()}
    assert {'product', 'step2 program', 'word program'} <= failed
    assert 'FAIL product: g = u1 * w * u2' in report.lines()


def test_verify_without_evaluation(field, rng):
    gf = field(3)
    g = random_special(3, gf, rng)
    report = verify(g, bruhat_full(g, gf), evaluate_programs=False)
    names = [check.name for check in report.checks]
    assert 'step2 program' not in names
    assert report.passed
    assert report.lines()[0] == 'PASS product: g = u1 * w * u2'


def test_verify_flags_an_oversized_quota(field, rng):
    gf = field(7)
    g = random_special(4, gf, rng)
    result = bruhat_full(g, gf)
    step2 = result.step2_program
    widened = Program(quota=bounds.total_quota(gf.f) + 1, header=step2.header, instructions=step2.instructions)
    report = verify(g, replace(result, step2_program=widened))
    assert not report.passed
    assert report.passed_ignoring_bounds()
    failed = {check.name for check in report.failed()}
    assert failed == {'step2 quota', 'peak slots'}


def test_step2_builds_in_linear_time(field, rng):
    gf = field(2)
    g = random_special(40, gf, rng)
    started = time.perf_counter()
    state, program = bruhat_step2(g, gf)
    assert time.perf_counter() - started < 30
    assert program.length() <= bounds.step2_length(40, gf.q, gf.f)
    assert np.array_equal(state.u1 @ state.w @ state.u2, g)


def test_rejects_bad_input(field):
    gf = field(5)
    with pytest.raises(DimensionError):
        bruhat_full(identity(gf, 2), gf)
    g = identity(gf, 3)
    g[2, 2] = 3
    with pytest.raises(DeterminantError):
        bruhat_full(g, gf)


@pytest.mark.slow
@pytest.mark.parametrize('d,q', [(100, 2), (250, 2)])
def test_large_dimension(d, q, field, rng):
    gf = field(q)
    result = bruhat_full(random_special(d, gf, rng), gf)
    report = verify(result.g, result, evaluate_programs=False)
    assert report.passed, report.lines()
    reference = constants.reference_runs.get((d, q))
    if reference:
        assert result.peak_slots <= reference['slots']
