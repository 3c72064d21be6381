"""
Bruhat decomposition g = u1 * w * u2 as a straight-line program.

The emitter walks the columns of g from right to left. Entries below each pivot are
cleared by left multiplication with lower transvections, entries left of the pivot by
right multiplication. Every transvection is built from the basis
T_i = {t_i(i-1)(omega^l)}, which is conjugated along the diagonal as the column and
row indices move, and from commutators of neighbouring transvections. A numeric copy
of w is updated in lockstep so that pivots and multipliers are known while emitting.
"""
from __future__ import annotations

import contextlib
import enum
import logging

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import bounds
from . import constants
from .colors import MessageColors, colorize
from .exceptions import BruhatError, ProgramError
from .gf import FieldParams
from .matgroup import (
    Matrix,
    StandardGenerators,
    check_dimension,
    check_special,
    identity,
    is_lower_unitriangular,
    is_monomial,
    mat_inv,
    standard_generators,
)
from .mslp import (
    Memory,
    PairedMatrixGroup,
    Program,
    ProgramHeader,
    ProgramStats,
    SlotBuilder,
    concat,
    emit_commutator,
    emit_power_product,
    evaluate,
)
from .wordgen import MonomialWord, monomial_word


logger = logging.getLogger(__name__)

Y = constants.generator_slots
W_SLOT = constants.payload_slots['w']
U1_SLOT = constants.payload_slots['u1']
U2_SLOT = constants.payload_slots['u2']


class Direction(enum.Enum):
    FORWARD = 'forward'
    BACKWARD = 'backward'


class Side(enum.Enum):
    LEFT = 'left'
    RIGHT = 'right'


def t21_basis(builder: SlotBuilder, f: int, odd: bool) -> list[int]:
    """
    Emit T_2 = {t_21(omega^l) : l < f} and return its slots, slot l holding omega^l.

    t_21(1) = s t^-1 s^-1. The other elements conjugate t_hat = c^-1 t_21(1) c by
    z_l = delta^-l c delta^-l, where c is v for odd d and x^-1 for even d. Costs 5f - 1
    instructions, or 2 when f = 1.
    """
    t1 = builder.alloc('T_2[0]')
    builder.mul(t1, Y['s'], Y['t_inv'])
    builder.mul(t1, t1, Y['s_inv'])
    basis = [t1]
    if f == 1:
        return basis

    conjugator, conjugator_inv = (Y['v'], Y['v_inv']) if odd else (Y['x_inv'], Y['x'])
    t_hat = builder.alloc('t_hat')
    builder.mul(t_hat, conjugator_inv, t1)
    builder.mul(t_hat, t_hat, conjugator)

    # z alternates between z_l and z_l^-1 so one slot holds both
    z = builder.alloc('z')
    for level in range(1, f):
        target = t_hat if level == f - 1 else builder.alloc(f'T_2[{level}]')
        if level % 2 == 1:
            builder.mul(z, Y['delta_inv'], conjugator if level == 1 else z)
            builder.mul(z, z, Y['delta_inv'])
            builder.mul(target, z, t_hat)
            builder.inv(z, z)
            builder.mul(target, target, z)
        else:
            builder.mul(z, Y['delta'], z)
            builder.mul(z, z, Y['delta'])
            builder.mul(target, t_hat, z)
            builder.inv(z, z)
            builder.mul(target, z, target)
        basis.append(target)
    builder.free(z)
    return basis


def _conjugate_slots(builder: SlotBuilder, slots: list[int], left: int, right: int) -> None:
    for slot in slots:
        builder.mul(slot, left, slot)
        builder.mul(slot, slot, right)


class BasisWalker:
    """
    Keeps the transvection basis positioned where the emitter needs it.

    For odd d one basis T_i is live and moves by conjugation with v. For even d
    conjugation by v moves indices by two, so the window {T_k, T_(k+1)} is live and
    each shift overwrites the basis that falls out of it.
    """

    def __init__(self, builder: SlotBuilder, d: int, f: int):
        self.builder = builder
        self.d = d
        self.f = f
        self.odd = d % 2 == 1
        # odd d: index of the live basis; even d: lower index of the live window
        self.index: int | None = None
        self._bases: list[list[int]] = []

    @property
    def started(self) -> bool:
        return self.index is not None

    def live_indices(self) -> list[int]:
        if self.index is None:
            return []
        return [self.index] if self.odd else [self.index, self.index + 1]

    def start(self) -> int:
        start = self.builder.length
        t2 = t21_basis(self.builder, self.f, self.odd)
        self._bases = [t2]
        self.index = 2
        if not self.odd:
            # T_3 = y T_2 y^-1 with y = x v^-1; y is inverted in place between the halves
            y = self.builder.alloc('x_v_inv')
            self.builder.mul(y, Y['x'], Y['v_inv'])
            t3 = []
            for level, slot in enumerate(t2):
                new = self.builder.alloc(f'T_3[{level}]')
                self.builder.mul(new, y, slot)
                t3.append(new)
            self.builder.inv(y, y)
            for new in t3:
                self.builder.mul(new, new, y)
            self.builder.free(y)
            self._bases.append(t3)
        logger.debug("Transvection basis started with %d instructions", self.builder.length - start)
        return self.builder.length - start

    def shift(self, direction: Direction) -> int:
        if self.index is None:
            raise ProgramError("transvection basis has not been started")
        start = self.builder.length
        if self.odd:
            if direction is Direction.FORWARD:
                if self.index >= self.d:
                    raise ProgramError(f"cannot shift T_{self.index} past T_{self.d}")
                _conjugate_slots(self.builder, self._bases[0], Y['v'], Y['v_inv'])
                self.index += 1
            else:
                if self.index <= 2:
                    raise ProgramError("cannot shift below T_2")
                _conjugate_slots(self.builder, self._bases[0], Y['v_inv'], Y['v'])
                self.index -= 1
        else:
            low, high = self._bases
            if direction is Direction.FORWARD:
                if self.index + 2 > self.d:
                    raise ProgramError(f"cannot shift to T_{self.index + 2} in dimension {self.d}")
                _conjugate_slots(self.builder, low, Y['v_inv'], Y['v'])
                self._bases = [high, low]
                self.index += 1
            else:
                if self.index - 1 < 2:
                    raise ProgramError("cannot shift below T_2")
                _conjugate_slots(self.builder, high, Y['v'], Y['v_inv'])
                self._bases = [high, low]
                self.index -= 1
        return self.builder.length - start

    def walk_to(self, i: int) -> int:
        """Shift until T_i is live; returns the number of instructions emitted."""
        if not 2 <= i <= self.d:
            raise ProgramError(f"no transvection basis T_{i} in dimension {self.d}")
        emitted = 0 if self.started else self.start()
        while i not in self.live_indices():
            direction = Direction.FORWARD if i > self.live_indices()[-1] else Direction.BACKWARD
            emitted += self.shift(direction)
        return emitted

    def slots(self, i: int) -> list[int]:
        live = self.live_indices()
        if i not in live:
            raise ProgramError(f"T_{i} is not live (live: {live})")
        return list(self._bases[live.index(i)])

    def release(self) -> None:
        for basis in self._bases:
            self.builder.free(*basis)
        self._bases = []
        self.index = None


def shift_basis(walker: BasisWalker, direction: Direction) -> int:
    return walker.shift(direction)


def trans_arbitrary(builder: SlotBuilder, basis: list[int], alpha, field: FieldParams, dst: int) -> bool:
    """
    Emit t_i(i-1)(alpha) into ``dst`` as the product of basis[l]^a_l over the
    coefficients a_l of alpha in omega.

    :returns: False when alpha is zero and nothing was emitted.
    """
    coeffs = field.coeffs(alpha)
    return emit_power_product(builder, zip(basis, coeffs), dst)


def trans_offdiag(builder: SlotBuilder, alpha_slot: int, unit_slot: int, dst: int,
                  side: Side = Side.LEFT, i: int | None = None, j: int | None = None) -> None:
    """
    Emit t_ij(alpha) for i - j > 1 as a commutator.

    LEFT: [t_i(i-1)(alpha), t_(i-1)j(1)]; RIGHT: [t_i(j+1)(1), t_(j+1)j(alpha)].
    """
    if i is not None and j is not None and i - j <= 1:
        raise ProgramError(f"t_{i}{j} is not off the subdiagonal")
    if side is Side.LEFT:
        emit_commutator(builder, alpha_slot, unit_slot, dst)
    else:
        emit_commutator(builder, unit_slot, alpha_slot, dst)


@dataclass
class SubroutineRecord:
    name: str
    column: int
    index: int
    walk: int = 0
    work: int = 0

    @property
    def total(self) -> int:
        return self.walk + self.work


@dataclass
class BruhatState:
    w: Matrix
    u1: Matrix
    u2: Matrix
    program: Program
    pivots: dict[int, int]
    records: list[SubroutineRecord] = dataclass_field(default_factory=list)
    field_ops: int = 0


class BruhatBuilder:
    """
    Emits the step-2 program for one matrix g in SL(d, q).

    :param g: Input matrix, det(g) = 1.
    :param field: Field g is defined over.
    :param gens: Standard generators, built when not given.
    :param check_invariants: Verify u1_acc * g * u2_acc == w after every column.
    """

    def __init__(self, g: Matrix, field: FieldParams, gens: StandardGenerators | None = None,
                 check_invariants: bool = False):
        self.d = g.shape[0]
        check_dimension(self.d)
        check_special(g)
        self.g = g
        self.field = field
        self.gens = gens or standard_generators(self.d, field)
        self.check_invariants = check_invariants

        self.builder = SlotBuilder(ProgramHeader.for_field(field, self.d), reserved=constants.memory_layout_size)
        self.walker = BasisWalker(self.builder, self.d, field.f)
        self.w = g.copy()
        self.u1_acc = identity(field, self.d)
        self.u2_acc = identity(field, self.d)
        self.pivots: dict[int, int] = {}
        self.records: list[SubroutineRecord] = []
        self.field_ops = 0
        self._left_used = False
        self._right_used = False

    @contextlib.contextmanager
    def _record(self, name: str, column: int, index: int):
        record = SubroutineRecord(name, column, index)
        start = self.builder.length
        yield record
        record.work = self.builder.length - start - record.walk
        self.records.append(record)

    def _multiplier(self, value, pivot_inv):
        self.field_ops += 2
        return -value * pivot_inv

    def _apply_left(self, slot: int, i: int, r: int, alpha) -> None:
        self.builder.mul(W_SLOT, slot, W_SLOT)
        self.builder.mul(U1_SLOT, slot, U1_SLOT)
        self.w[i - 1, :] = self.w[i - 1, :] + alpha * self.w[r - 1, :]
        self.u1_acc[i - 1, :] = self.u1_acc[i - 1, :] + alpha * self.u1_acc[r - 1, :]
        self._left_used = True

    def _apply_right(self, slot: int, c: int, j: int, alpha) -> None:
        self.builder.mul(W_SLOT, W_SLOT, slot)
        self.builder.mul(U2_SLOT, U2_SLOT, slot)
        self.w[:, j - 1] = self.w[:, j - 1] + alpha * self.w[:, c - 1]
        self.u2_acc[:, j - 1] = self.u2_acc[:, j - 1] + alpha * self.u2_acc[:, c - 1]
        self._right_used = True

    def _transvection(self, basis: list[int], alpha) -> int:
        slot = self.builder.alloc('t_alpha')
        trans_arbitrary(self.builder, basis, alpha, self.field, slot)
        return slot

    def _clear_column(self, c: int, r: int, rows: list[int], pivot_inv) -> None:
        last = rows[-1]
        with self._record('first_transvections', c, r + 1) as record:
            record.walk = self.walker.walk_to(r + 1)
            if rows[0] == r + 1:
                alpha = self._multiplier(self.w[r, c - 1], pivot_inv)
                slot = self._transvection(self.walker.slots(r + 1), alpha)
                self._apply_left(slot, r + 1, r, alpha)
                self.builder.free(slot)
        if last < r + 2:
            return

        unit = self.builder.alloc('unit')
        self.builder.copy(unit, self.walker.slots(r + 1)[0])
        for i in range(r + 2, last + 1):
            with self._record('left_update', c, i) as record:
                record.walk = self.walker.walk_to(i)
                basis = self.walker.slots(i)
                if self.w[i - 1, c - 1] != 0:
                    alpha = self._multiplier(self.w[i - 1, c - 1], pivot_inv)
                    t_alpha = self._transvection(basis, alpha)
                    t_ir = self.builder.alloc('t_ir')
                    trans_offdiag(self.builder, t_alpha, unit, t_ir, Side.LEFT, i, r)
                    self.builder.free(t_alpha)
                    self._apply_left(t_ir, i, r, alpha)
                    self.builder.free(t_ir)
                if i < last:
                    next_unit = self.builder.alloc('unit')
                    emit_commutator(self.builder, basis[0], unit, next_unit)
                    self.builder.free(unit)
                    unit = next_unit
        self.builder.free(unit)

    def _clear_row(self, c: int, r: int, columns: list[int], pivot_inv) -> None:
        first = columns[-1]
        with self._record('last_transvections', c, c - 1) as record:
            record.walk = self.walker.walk_to(c)
            if columns[0] == c - 1:
                alpha = self._multiplier(self.w[r - 1, c - 2], pivot_inv)
                slot = self._transvection(self.walker.slots(c), alpha)
                self._apply_right(slot, c, c - 1, alpha)
                self.builder.free(slot)
        if first > c - 2:
            return

        unit = self.builder.alloc('unit')
        self.builder.copy(unit, self.walker.slots(c)[0])
        for j in range(c - 2, first - 1, -1):
            with self._record('right_update', c, j) as record:
                record.walk = self.walker.walk_to(j + 1)
                basis = self.walker.slots(j + 1)
                if self.w[r - 1, j - 1] != 0:
                    alpha = self._multiplier(self.w[r - 1, j - 1], pivot_inv)
                    t_alpha = self._transvection(basis, alpha)
                    t_cj = self.builder.alloc('t_cj')
                    trans_offdiag(self.builder, t_alpha, unit, t_cj, Side.RIGHT, c, j)
                    self.builder.free(t_alpha)
                    self._apply_right(t_cj, c, j, alpha)
                    self.builder.free(t_cj)
                if j > first:
                    next_unit = self.builder.alloc('unit')
                    emit_commutator(self.builder, unit, basis[0], next_unit)
                    self.builder.free(unit)
                    unit = next_unit
        self.builder.free(unit)

    def _verify_column(self, c: int) -> None:
        if not np.array_equal(self.u1_acc @ self.g @ self.u2_acc, self.w):
            raise BruhatError(f"u1 * g * u2 diverged from w after column {c}")
        pattern = self.w[:, c - 1:].view(np.ndarray) != 0
        if not np.all(pattern.sum(axis=0) == 1) or np.any(pattern.sum(axis=1) > 1):
            raise BruhatError(f"columns {c}..{self.d} are not cleared after column {c}")

    def run(self) -> BruhatState:
        d = self.d
        for c in range(d, 0, -1):
            column = self.w[:, c - 1].view(np.ndarray)
            r = int(np.flatnonzero(column)[0]) + 1
            self.pivots[c] = r
            pivot_inv = self.field.inv(self.w[r - 1, c - 1])
            self.field_ops += 1

            rows = [i for i in range(r + 1, d + 1) if column[i - 1] != 0]
            if rows:
                self._clear_column(c, r, rows, pivot_inv)
            columns = [j for j in range(c - 1, 0, -1) if self.w[r - 1, j - 1] != 0]
            if columns:
                self._clear_row(c, r, columns, pivot_inv)
            logger.debug("Column %d: pivot row %d, cleared %d rows and %d columns, length %d",
                         c, r, len(rows), len(columns), self.builder.length)
            if self.check_invariants:
                self._verify_column(c)

        if self._left_used:
            self.builder.inv(U1_SLOT, U1_SLOT)
        if self._right_used:
            self.builder.inv(U2_SLOT, U2_SLOT)
        self.walker.release()

        program = self.builder.build(quota=constants.memory_layout_size)
        return BruhatState(
            w=self.w,
            u1=mat_inv(self.u1_acc),
            u2=mat_inv(self.u2_acc),
            program=program,
            pivots=dict(self.pivots),
            records=self.records,
            field_ops=self.field_ops,
        )


def bruhat_step2(g: Matrix, field: FieldParams, gens: StandardGenerators | None = None,
                 check_invariants: bool = False) -> tuple[BruhatState, Program]:
    """
    Reduce g to a monomial matrix, emitting a program over Y(g, 1, 1) that ends in Y(w, u1, u2).

    :raises: DeterminantError unless det(g) = 1, DimensionError for d < 3.
    """
    state = BruhatBuilder(g, field, gens, check_invariants).run()
    logger.info("Step 2 program for d=%d q=%d: length %d, quota %d",
                g.shape[0], field.q, state.program.length(), state.program.quota)
    return state, state.program


@dataclass(frozen=True)
class BruhatResult:
    g: Matrix
    field: FieldParams
    w: Matrix
    u1: Matrix
    u2: Matrix
    step2_program: Program
    word_program: Program
    monomial: MonomialWord
    state: BruhatState

    @property
    def d(self) -> int:
        return self.g.shape[0]

    @property
    def total_length(self) -> int:
        return self.step2_program.length() + self.monomial.program.length()

    @property
    def peak_slots(self) -> int:
        return max(self.step2_program.quota, self.word_program.quota)

    def step2_stats(self) -> ProgramStats:
        return self.step2_program.stats(field_ops=self.state.field_ops)

    def word_stats(self) -> ProgramStats:
        return self.word_program.stats(field_ops=self.state.field_ops + self.d)


def bruhat_full(g: Matrix, field: FieldParams, gens: StandardGenerators | None = None,
                check_invariants: bool = False) -> BruhatResult:
    """
    Full decomposition: the step-2 program plus a program over the standard generators alone.

    The u1 and u2 words are the step-2 transvection trail with every write to the w slot
    dropped; the monomial word for w is appended to it.
    """
    gens = gens or standard_generators(g.shape[0], field)
    state, step2 = bruhat_step2(g, field, gens, check_invariants)
    word = monomial_word(state.w, field, gens)
    word_program = concat(step2.without_writes_to(W_SLOT), word.program)
    logger.info("Word program: length %d, quota %d", word_program.length(), word_program.quota)
    return BruhatResult(
        g=g, field=field, w=state.w, u1=state.u1, u2=state.u2,
        step2_program=step2, word_program=word_program, monomial=word, state=state,
    )


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ''
    bound: bool = False


@dataclass
class VerificationReport:
    checks: list[Check] = dataclass_field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def add(self, name: str, passed: bool, detail: str = '', bound: bool = False) -> None:
        self.checks.append(Check(name, bool(passed), detail, bound))

    def passed_ignoring_bounds(self) -> bool:
        return all(check.passed for check in self.checks if not check.bound)

    def failed(self) -> list[Check]:
        return [check for check in self.checks if not check.passed]

    def lines(self, color: bool = False) -> list[str]:
        lines = []
        for check in self.checks:
            verdict = colorize('PASS', MessageColors.OKGREEN, color) if check.passed \
                else colorize('FAIL', MessageColors.FAIL, color)
            lines.append(f"{verdict} {check.name}" + (f": {check.detail}" if check.detail else ''))
        return lines


def _paired_layout(gens: StandardGenerators, group: PairedMatrixGroup, payload: list) -> list:
    pairs = []
    for name in constants.generator_slots:
        partner = name[:-len('_inv')] if name.endswith('_inv') else f'{name}_inv'
        pairs.append((getattr(gens, name), getattr(gens, partner)))
    return pairs + [group.pair(m) for m in payload]


def _payload_matches(program: Program, gens: StandardGenerators, payload: list, expected: list) -> bool:
    group = PairedMatrixGroup(gens.field, gens.d)
    memory = Memory(group, max(program.quota, constants.memory_layout_size), _paired_layout(gens, group, payload))
    if program.instructions:
        evaluate(program, memory)
    return all(np.array_equal(memory[slot][0], m) for slot, m in zip((W_SLOT, U1_SLOT, U2_SLOT), expected))


def verify(g: Matrix, result: BruhatResult, evaluate_programs: bool = True) -> VerificationReport:
    """Check a decomposition and its programs; failures are report entries."""
    report = VerificationReport()
    field = result.field
    d = g.shape[0]
    w, u1, u2 = result.w, result.u1, result.u2

    report.add('product', np.array_equal(u1 @ w @ u2, g), 'g = u1 * w * u2')
    report.add('w monomial', is_monomial(w))
    report.add('u1 lower unitriangular', is_lower_unitriangular(u1))
    report.add('u2 lower unitriangular', is_lower_unitriangular(u2))

    if evaluate_programs:
        gens = standard_generators(d, field)
        one = identity(field, d)
        report.add('step2 program', _payload_matches(result.step2_program, gens, [g, one, one], [w, u1, u2]),
                   'Y(g, 1, 1) evaluates to Y(w, u1, u2)')
        report.add('word program', _payload_matches(result.word_program, gens, [one, one, one], [w, u1, u2]),
                   'Y(1, 1, 1) evaluates to Y(w, u1, u2)')

    length = result.step2_program.length()
    limit = bounds.step2_length(d, field.q, field.f)
    report.add('step2 length', length <= limit, f"{length} <= {limit:.0f}", bound=True)
    quota = result.step2_program.quota
    quota_limit = bounds.step2_quota(d, field.f)
    report.add('step2 quota', quota <= quota_limit, f"{quota} <= {quota_limit}", bound=True)
    peak = result.peak_slots
    peak_limit = bounds.total_quota(field.f)
    report.add('peak slots', peak <= peak_limit, f"{peak} <= {peak_limit}", bound=True)
    ratio = bounds.length_ratio(result.total_length, d, field.q)
    report.add('length ratio', ratio <= constants.length_ratio_limit,
               f"{result.total_length} / (d^2 log2 q) = {ratio:.2f} <= {constants.length_ratio_limit}", bound=True)
    return report
