"""
Straight-line programs with memory.

A program is a fixed sequence of instructions over a memory of ``quota`` slots,
numbered from 1. Only multiplications and inversions count towards its length;
copies are relabellings and ``show`` only selects output.
"""
from __future__ import annotations

import abc
import logging
import re

from dataclasses import dataclass
from typing import Any, Iterable, Sequence, Union

import numpy as np

from . import constants
from .exceptions import ParseError, ProgramError
from .gf import FieldParams
from .matgroup import MonomialMatrix, Permutation, identity, mat_inv


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Copy:
    dst: int
    src: int

    def reads(self) -> tuple[int, ...]:
        return (self.src,)

    def writes(self) -> tuple[int, ...]:
        return (self.dst,)

    def __str__(self):
        return f"m{self.dst} <- m{self.src}"


@dataclass(frozen=True)
class Mul:
    dst: int
    lhs: int
    rhs: int

    def reads(self) -> tuple[int, ...]:
        return (self.lhs, self.rhs)

    def writes(self) -> tuple[int, ...]:
        return (self.dst,)

    def __str__(self):
        return f"m{self.dst} <- m{self.lhs} * m{self.rhs}"


@dataclass(frozen=True)
class Inv:
    dst: int
    src: int

    def reads(self) -> tuple[int, ...]:
        return (self.src,)

    def writes(self) -> tuple[int, ...]:
        return (self.dst,)

    def __str__(self):
        return f"m{self.dst} <- inv m{self.src}"


@dataclass(frozen=True)
class Show:
    slots: tuple[int, ...]

    def reads(self) -> tuple[int, ...]:
        return self.slots

    def writes(self) -> tuple[int, ...]:
        return ()

    def __str__(self):
        return 'show ' + ','.join(str(slot) for slot in self.slots)


Instruction = Union[Copy, Mul, Inv, Show]


def counts_towards_length(instruction: Instruction) -> bool:
    return isinstance(instruction, (Mul, Inv))


@dataclass(frozen=True)
class ProgramHeader:
    """Dimension and field an emitted program is meant to be evaluated over."""

    d: int
    p: int
    f: int
    modulus: int

    @classmethod
    def for_field(cls, field: FieldParams, d: int) -> ProgramHeader:
        return cls(d=d, p=field.p, f=field.f, modulus=field.modulus_int)

    @property
    def q(self) -> int:
        return self.p ** self.f


@dataclass
class ProgramStats:
    length: int
    copies: int
    shows: int
    quota: int
    peak_slots: int
    d: int
    q: int
    field_ops: int = 0

    def as_record(self) -> list[str]:
        return [
            f"length={self.length}",
            f"copies={self.copies}",
            f"shows={self.shows}",
            f"quota={self.quota}",
            f"peak_slots={self.peak_slots}",
            f"field_ops={self.field_ops}",
            f"d={self.d}",
            f"q={self.q}",
        ]


@dataclass(frozen=True)
class Program:
    quota: int
    header: ProgramHeader
    instructions: tuple[Instruction, ...] = ()

    def __post_init__(self):
        if self.quota < 1:
            raise ProgramError(f"quota must be positive, got {self.quota}")
        for n, instruction in enumerate(self.instructions, start=1):
            for slot in instruction.reads() + instruction.writes():
                if not 1 <= slot <= self.quota:
                    raise ProgramError(f"instruction {n} ({instruction}) references slot {slot} outside 1..{self.quota}")

    def __len__(self):
        return len(self.instructions)

    def length(self) -> int:
        return sum(1 for instruction in self.instructions if counts_towards_length(instruction))

    def slots_used(self) -> set[int]:
        used: set[int] = set()
        for instruction in self.instructions:
            used.update(instruction.reads())
            used.update(instruction.writes())
        return used

    def input_slots(self) -> list[int]:
        """Slots read before the program writes them."""
        written: set[int] = set()
        inputs: set[int] = set()
        for instruction in self.instructions:
            inputs.update(slot for slot in instruction.reads() if slot not in written)
            written.update(instruction.writes())
        return sorted(inputs)

    def stats(self, field_ops: int = 0) -> ProgramStats:
        return ProgramStats(
            length=self.length(),
            copies=sum(1 for i in self.instructions if isinstance(i, Copy)),
            shows=sum(1 for i in self.instructions if isinstance(i, Show)),
            quota=self.quota,
            peak_slots=len(self.slots_used()),
            d=self.header.d,
            q=self.header.q,
            field_ops=field_ops,
        )

    def without_writes_to(self, slot: int) -> Program:
        """Drop every instruction whose destination is ``slot``."""
        kept = tuple(i for i in self.instructions if slot not in i.writes())
        return Program(quota=self.quota, header=self.header, instructions=kept)


def concat(first: Program, second: Program) -> Program:
    if first.header != second.header:
        raise ProgramError(f"cannot concatenate programs for {first.header} and {second.header}")
    return Program(
        quota=max(first.quota, second.quota),
        header=first.header,
        instructions=first.instructions + second.instructions,
    )


class BlackBoxGroup(abc.ABC):
    """The operations program evaluation needs from a group."""

    @abc.abstractmethod
    def identity(self) -> Any:
        ...

    @abc.abstractmethod
    def multiply(self, a, b) -> Any:
        ...

    @abc.abstractmethod
    def invert(self, a) -> Any:
        ...

    @abc.abstractmethod
    def equal(self, a, b) -> bool:
        ...


class MatrixGroup(BlackBoxGroup):
    def __init__(self, field: FieldParams, d: int):
        self.field = field
        self.d = d

    def identity(self):
        return identity(self.field, self.d)

    def multiply(self, a, b):
        return a @ b

    def invert(self, a):
        return mat_inv(a)

    def equal(self, a, b) -> bool:
        return bool(np.array_equal(a, b))


class PairedMatrixGroup(MatrixGroup):
    """
    Matrices carried together with their inverses as ``(m, m^-1)`` pairs.

    A product costs two matrix multiplications and an inversion is a swap, so
    programs heavy in commutators evaluate without any Gaussian elimination.
    """

    def pair(self, m):
        return (m, mat_inv(m))

    def identity(self):
        one = identity(self.field, self.d)
        return (one, one)

    def multiply(self, a, b):
        return (a[0] @ b[0], b[1] @ a[1])

    def invert(self, a):
        return (a[1], a[0])

    def equal(self, a, b) -> bool:
        return bool(np.array_equal(a[0], b[0]))


class PermutationGroup(BlackBoxGroup):
    def __init__(self, d: int):
        self.d = d

    def identity(self):
        return Permutation.identity(self.d)

    def multiply(self, a, b):
        return a * b

    def invert(self, a):
        return a.inverse()

    def equal(self, a, b) -> bool:
        return a == b


class MonomialGroup(BlackBoxGroup):
    """Monomial matrices in permutation-and-scalars form."""

    def __init__(self, field: FieldParams, d: int):
        self.field = field
        self.d = d

    def identity(self):
        return MonomialMatrix.identity(self.field, self.d)

    def multiply(self, a, b):
        return a * b

    def invert(self, a):
        return a.inverse()

    def equal(self, a, b) -> bool:
        return a == b


class Memory:
    """
    Fixed-length list of group elements addressed by slots 1..len.

    Slots without an initial value hold the identity.
    """

    def __init__(self, group: BlackBoxGroup, size: int, values: Sequence = ()):
        if len(values) > size:
            raise ProgramError(f"{len(values)} initial values do not fit into {size} slots")
        self.group = group
        self._values = list(values) + [group.identity() for _ in range(size - len(values))]

    @classmethod
    def for_program(cls, program: Program, group: BlackBoxGroup, values: Sequence = ()) -> Memory:
        return cls(group, program.quota, values)

    def __len__(self):
        return len(self._values)

    def _check(self, slot: int) -> int:
        if not 1 <= slot <= len(self._values):
            raise ProgramError(f"slot {slot} is outside the memory of {len(self._values)} slots")
        return slot - 1

    def __getitem__(self, slot: int):
        return self._values[self._check(slot)]

    def __setitem__(self, slot: int, value):
        self._values[self._check(slot)] = value

    def values(self) -> list:
        return list(self._values)


def evaluate(program: Program, memory: Memory, start: int | None = None, stop: int | None = None):
    """
    Run instructions ``start`` through ``stop`` (1-based, inclusive) on ``memory``.

    With no range the whole program runs. ``start == stop == 0`` runs nothing and returns
    ``[identity]``. Otherwise the value of the last instruction is returned: the element
    it wrote, or the list selected by a ``show``.

    :raises: ProgramError for an invalid range or a memory shorter than the quota.
    """
    n = len(program.instructions)
    if start is None and stop is None:
        start, stop = (1, n) if n else (0, 0)
    if start is None or stop is None:
        raise ProgramError("both ends of the evaluation range must be given")
    if start == stop == 0:
        return [memory.group.identity()]
    if not 1 <= start <= stop <= n:
        raise ProgramError(f"evaluation range {start}..{stop} is outside 1..{n}")
    if len(memory) < program.quota:
        raise ProgramError(f"memory of {len(memory)} slots is smaller than the quota {program.quota}")

    group = memory.group
    result: Any = None
    for instruction in program.instructions[start - 1:stop]:
        if isinstance(instruction, Mul):
            result = group.multiply(memory[instruction.lhs], memory[instruction.rhs])
            memory[instruction.dst] = result
        elif isinstance(instruction, Inv):
            result = group.invert(memory[instruction.src])
            memory[instruction.dst] = result
        elif isinstance(instruction, Copy):
            result = memory[instruction.src]
            memory[instruction.dst] = result
        else:
            result = [memory[slot] for slot in instruction.slots]
    return result


class SlotBuilder:
    """
    Program under construction with a symbol table of live slots.

    Slots 1..reserved are fixed inputs; ``alloc`` hands out the lowest free slot
    above them and ``free`` returns it for reuse.
    """

    def __init__(self, header: ProgramHeader, reserved: int = 0, limit: int | None = None):
        self.header = header
        self.reserved = reserved
        self.limit = limit
        self.instructions: list[Instruction] = []
        self._live: dict[int, str] = {}
        self.max_slot = reserved
        self._length = 0

    @property
    def length(self) -> int:
        return self._length

    @property
    def live_slots(self) -> dict[int, str]:
        return dict(self._live)

    def alloc(self, name: str = 'tmp') -> int:
        slot = self.reserved + 1
        while slot in self._live:
            slot += 1
        if self.limit is not None and slot > self.limit:
            raise ProgramError(f"no free slot for {name}: all {self.limit} slots are live")
        self._live[slot] = name
        self.max_slot = max(self.max_slot, slot)
        logger.debug("alloc m%d for %s", slot, name)
        return slot

    def free(self, *slots: int | None) -> None:
        for slot in slots:
            if slot is None:
                continue
            if slot not in self._live:
                raise ProgramError(f"slot {slot} is not allocated")
            del self._live[slot]

    def lookup(self, name: str) -> int:
        for slot, live_name in self._live.items():
            if live_name == name:
                return slot
        raise KeyError(name)

    def _touch(self, *slots: int) -> None:
        for slot in slots:
            if slot < 1:
                raise ProgramError(f"slot {slot} is invalid, slots are numbered from 1")
            if self.limit is not None and slot > self.limit:
                raise ProgramError(f"slot {slot} exceeds the limit of {self.limit} slots")
            self.max_slot = max(self.max_slot, slot)

    def emit(self, instruction: Instruction) -> None:
        self._touch(*instruction.reads(), *instruction.writes())
        self.instructions.append(instruction)
        if counts_towards_length(instruction):
            self._length += 1

    def copy(self, dst: int, src: int) -> None:
        self.emit(Copy(dst, src))

    def mul(self, dst: int, lhs: int, rhs: int) -> None:
        self.emit(Mul(dst, lhs, rhs))

    def inv(self, dst: int, src: int) -> None:
        self.emit(Inv(dst, src))

    def show(self, slots: Iterable[int]) -> None:
        self.emit(Show(tuple(slots)))

    def build(self, quota: int | None = None) -> Program:
        return Program(
            quota=max(quota or 0, self.max_slot, 1),
            header=self.header,
            instructions=tuple(self.instructions),
        )


def emit_commutator(builder: SlotBuilder, a: int, b: int, dst: int) -> None:
    """Leave [a, b] = a^-1 b^-1 a b in ``dst`` with four instructions."""
    if dst in (a, b):
        raise ProgramError(f"commutator destination m{dst} collides with an operand")
    builder.mul(dst, b, a)
    builder.inv(dst, dst)
    builder.mul(dst, dst, a)
    builder.mul(dst, dst, b)


def emit_powers(builder: SlotBuilder,
                src: int,
                taps: Sequence[tuple[int, int]],
                square: int | None = None,
                identity_slot: int | None = None,
                ) -> None:
    """
    Write g^e into dst for every ``(e, dst)`` in ``taps`` from one squaring chain.

    The chain g^(2^k) lives in the ``square`` slot (allocated when not given). Each tap
    multiplies the chain value into its destination on the set bits of its exponent,
    so a tap costs at most ``2 * floor(log2 e)`` multiplications and fewer when taps
    share squarings. A negative exponent costs one extra inversion. Exponent 0 copies
    ``identity_slot`` and fails without one.
    """
    src_slots = {src}
    for exponent, dst in taps:
        if dst in src_slots or (square is not None and dst == square):
            raise ProgramError(f"power destination m{dst} collides with the source or another tap")
        src_slots.add(dst)
        if exponent == 0 and identity_slot is None:
            raise ProgramError("exponent 0 needs an identity slot")

    max_bit = max((abs(e).bit_length() - 1 for e, _ in taps if e), default=-1)
    own_square = square is None and max_bit >= 1
    if own_square:
        square = builder.alloc('square')
    elif square == src:
        raise ProgramError("square slot collides with the source")

    # None: no set bit seen yet; 'lazy': value equals src without an instruction
    state: dict[int, Any] = {dst: None for _, dst in taps}
    for bit in range(max_bit + 1):
        if bit == 1:
            builder.mul(square, src, src)
        elif bit > 1:
            builder.mul(square, square, square)
        current = src if bit == 0 else square
        for exponent, dst in taps:
            if not abs(exponent) >> bit & 1:
                continue
            if state[dst] is None:
                if bit == 0:
                    state[dst] = 'lazy'
                else:
                    builder.copy(dst, current)
                    state[dst] = 'set'
            elif state[dst] == 'lazy':
                builder.mul(dst, src, current)
                state[dst] = 'set'
            else:
                builder.mul(dst, current, dst)

    for exponent, dst in taps:
        if exponent == 0:
            builder.copy(dst, identity_slot)
            continue
        if state[dst] == 'lazy':
            builder.copy(dst, src)
        if exponent < 0:
            builder.inv(dst, dst)

    if own_square:
        builder.free(square)


def emit_power(builder: SlotBuilder,
               src: int,
               exponent: int,
               dst: int,
               square: int | None = None,
               identity_slot: int | None = None,
               ) -> None:
    emit_powers(builder, src, [(exponent, dst)], square=square, identity_slot=identity_slot)


class PowerProduct:
    """
    Accumulate a product of powers into ``dst``, left to right.

    The first nontrivial factor is written straight into ``dst``; later ones go through
    a scratch power slot unless the exponent is 1. Zero exponents are skipped, so an
    empty product leaves ``dst`` untouched and ``finish`` reports False.
    """

    def __init__(self, builder: SlotBuilder, dst: int):
        self.builder = builder
        self.dst = dst
        self.factors = 0
        self._power: int | None = None

    def multiply(self, src: int, exponent: int) -> None:
        if exponent == 0:
            return
        if exponent < 0:
            raise ProgramError("power products take non-negative exponents")
        if self.factors == 0:
            emit_power(self.builder, src, exponent, self.dst)
        elif exponent == 1:
            self.builder.mul(self.dst, self.dst, src)
        else:
            if self._power is None:
                self._power = self.builder.alloc('power')
            emit_power(self.builder, src, exponent, self._power)
            self.builder.mul(self.dst, self.dst, self._power)
        self.factors += 1

    def finish(self) -> bool:
        self.builder.free(self._power)
        self._power = None
        return self.factors > 0


def emit_power_product(builder: SlotBuilder, factors: Iterable[tuple[int, int]], dst: int) -> bool:
    product = PowerProduct(builder, dst)
    for src, exponent in factors:
        product.multiply(src, exponent)
    return product.finish()


_HEADER_RE = re.compile(r'^b=(\d+)\s+d=(\d+)\s+p=(\d+)\s+f=(\d+)\s+mod=(\d+)$')
_MUL_RE = re.compile(r'^m(\d+)\s*<-\s*m(\d+)\s*\*\s*m(\d+)$')
_INV_RE = re.compile(r'^m(\d+)\s*<-\s*inv\s+m(\d+)$')
_COPY_RE = re.compile(r'^m(\d+)\s*<-\s*m(\d+)$')
_SHOW_RE = re.compile(r'^show\s+(\d+(?:\s*,\s*\d+)*)$')


def serialize(program: Program) -> str:
    header = program.header
    lines = [
        constants.program_magic,
        f"b={program.quota} d={header.d} p={header.p} f={header.f} mod={header.modulus}",
    ]
    lines.extend(str(instruction) for instruction in program.instructions)
    return '\n'.join(lines) + '\n'


def parse_instruction(text: str, line: int | None = None, source: str | None = None) -> Instruction:
    text = text.strip()
    instruction: Instruction
    if match := _MUL_RE.match(text):
        instruction = Mul(*(int(g) for g in match.groups()))
    elif match := _INV_RE.match(text):
        instruction = Inv(*(int(g) for g in match.groups()))
    elif match := _COPY_RE.match(text):
        instruction = Copy(*(int(g) for g in match.groups()))
    elif match := _SHOW_RE.match(text):
        instruction = Show(tuple(int(g) for g in match.group(1).split(',')))
    else:
        raise ParseError(f"unrecognized instruction '{text}'", line=line, source=source)
    for slot in instruction.reads() + instruction.writes():
        if slot < 1:
            raise ParseError(f"slot m{slot} is invalid, slots are numbered from 1", line=line, source=source)
    return instruction


def parse(text: str, source: str | None = None) -> Program:
    """
    Parse the program text format.

    :raises: ParseError naming the offending line.
    """
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split('#', 1)[0].strip()
        if content:
            lines.append((number, content))

    if not lines or lines[0][1] != constants.program_magic:
        raise ParseError(f"missing '{constants.program_magic}' magic line", line=lines[0][0] if lines else None, source=source)
    if len(lines) < 2:
        raise ParseError("missing header line", source=source)

    header_number, header_text = lines[1]
    match = _HEADER_RE.match(header_text)
    if not match:
        raise ParseError("header must read 'b=<quota> d=<dim> p=<char> f=<deg> mod=<modulus>'",
                         line=header_number, source=source)
    quota, d, p, f, modulus = (int(g) for g in match.groups())
    if quota < 1:
        raise ParseError("quota must be positive", line=header_number, source=source)

    instructions = []
    for number, content in lines[2:]:
        instruction = parse_instruction(content, line=number, source=source)
        for slot in instruction.reads() + instruction.writes():
            if slot > quota:
                raise ParseError(f"slot m{slot} exceeds the quota {quota}", line=number, source=source)
        instructions.append(instruction)

    return Program(quota=quota, header=ProgramHeader(d=d, p=p, f=f, modulus=modulus), instructions=tuple(instructions))
