"""
Words for monomial matrices of SL(d, q) in the standard generators.

A monomial w factors as h * w' where w' is a word in the generators whose
permutation pattern matches w, and h is diagonal. The permutation part sifts
through the chain v_1, ..., v_d of cycles; the diagonal part is a product of
conjugates of delta.
"""
from __future__ import annotations

import logging

from dataclasses import dataclass
from typing import Sequence

from . import constants
from .exceptions import DeterminantError, MatrixKindError
from .gf import FieldParams, make_field
from .matgroup import (
    Matrix,
    MonomialMatrix,
    Permutation,
    StandardGenerators,
    check_dimension,
    check_special,
    is_monomial,
    psi,
    standard_generators,
)
from .mslp import Memory, MonomialGroup, PowerProduct, Program, ProgramHeader, SlotBuilder, evaluate


logger = logging.getLogger(__name__)

Y = constants.generator_slots
W_SLOT = constants.payload_slots['w']


def sift_exponents(pi: Permutation) -> tuple[int, ...]:
    """
    Exponents e_i with pi * v_1^e_1 * ... * v_d^e_d = 1.

    v_i = (i d d-1 ... i+1) moves every point of {i+1..d} down by one and i to d,
    so v_i^e sends the current image of i back to i for e = image - i taken modulo
    the cycle length d - i + 1.
    """
    d = pi.degree
    current = pi
    exponents = []
    for i in range(1, d + 1):
        length = d - i + 1
        exponent = (current(i) - i) % length
        exponents.append(exponent)
        if exponent:
            current = current * (cycle_v(d, i) ** exponent)
    if not current.is_identity():
        raise RuntimeError(f"internal error: sifting {pi} left {current}")
    return tuple(exponents)


def cycle_v(d: int, i: int) -> Permutation:
    """The cycle v_i = (i d d-1 ... i+1)."""
    if i == d:
        return Permutation.identity(d)
    return Permutation.from_cycles(d, [i] + list(range(d, i, -1)))


def permutation_generators(d: int) -> tuple[Permutation, Permutation, Permutation]:
    """s_1 = (1 2), v_1 and its inverse (1 2 ... d)."""
    v1 = cycle_v(d, 1)
    return Permutation.from_cycles(d, [1, 2]), v1, v1.inverse()


@dataclass(frozen=True)
class PermWordPlan:
    target: Permutation
    exponents: tuple[int, ...]

    @classmethod
    def for_permutation(cls, pi: Permutation) -> PermWordPlan:
        return cls(target=pi, exponents=sift_exponents(pi))

    @property
    def last_factor(self) -> int:
        return max((i for i, e in enumerate(self.exponents, start=1) if e), default=0)


@dataclass(frozen=True)
class DiagWordPlan:
    exponents: tuple[int, ...]
    partial_sums: tuple[int, ...]

    @classmethod
    def for_exponents(cls, exponents: Sequence[int], q: int) -> DiagWordPlan:
        order = q - 1
        normalized = tuple(int(e) % order for e in exponents)
        if sum(normalized) % order:
            raise DeterminantError(f"exponents {tuple(exponents)} do not sum to 0 modulo {order}")
        sums = []
        running = 0
        for e in normalized[:-1]:
            running = (running + e) % order
            sums.append(running)
        return cls(exponents=normalized, partial_sums=tuple(sums))

    @property
    def last_factor(self) -> int:
        return max((j for j, lam in enumerate(self.partial_sums, start=1) if lam), default=0)


def perm_word(pi: Permutation, builder: SlotBuilder, s1: int, v1: int, v1_inv: int, dst: int) -> PermWordPlan:
    """
    Emit (v_1^e_1 * ... * v_d^e_d)^-1 into ``dst``, which then has permutation pattern pi.

    s_i = v_1 s_(i-1) v_1^-1 and v_i = s_(i-1) v_(i-1) are each kept in one chain slot.
    An empty product emits nothing, so ``dst`` must already hold the identity.
    """
    check_dimension(pi.degree, needs_x=False)
    plan = PermWordPlan.for_permutation(pi)
    last = plan.last_factor
    product = PowerProduct(builder, dst)
    s_chain = v_chain = None
    s_cur, v_cur = s1, v1

    for i in range(1, last + 1):
        if i >= 2:
            if v_chain is None:
                v_chain = builder.alloc('v_i')
            builder.mul(v_chain, s_cur, v_cur)
            v_cur = v_chain
        product.multiply(v_cur, plan.exponents[i - 1])
        if 2 <= i < last:
            if s_chain is None:
                s_chain = builder.alloc('s_i')
            builder.mul(s_chain, v1, s_cur)
            builder.mul(s_chain, s_chain, v1_inv)
            s_cur = s_chain

    if product.finish():
        builder.inv(dst, dst)
    builder.free(s_chain, v_chain)
    logger.debug("Permutation word for %s uses exponents %s", pi, plan.exponents)
    return plan


def diag_word(exponents: Sequence[int], builder: SlotBuilder, d: int, q: int, dst: int,
              slots: dict[str, int] | None = None) -> tuple[DiagWordPlan, bool]:
    """
    Emit diag(omega^l_1, ..., omega^l_d) into ``dst`` as the product of h_j^lambda_j.

    h_1 = delta; for odd d, h_j = v h_(j-1) v^-1; for even d, h_2 = x^-1 h_1 x and
    h_j = v^-1 h_(j-2) v, which needs two chain slots.

    :returns: The plan and whether anything was written to ``dst``.
    """
    slots = slots or Y
    plan = DiagWordPlan.for_exponents(exponents, q)
    last = plan.last_factor
    product = PowerProduct(builder, dst)
    odd_chain = even_chain = None
    h_slot = {1: slots['delta']}

    for j in range(1, last + 1):
        if j >= 2:
            if d % 2 == 1:
                if odd_chain is None:
                    odd_chain = builder.alloc('h_j')
                builder.mul(odd_chain, slots['v'], h_slot[j - 1])
                builder.mul(odd_chain, odd_chain, slots['v_inv'])
                h_slot[j] = odd_chain
            elif j == 2:
                even_chain = builder.alloc('h_even')
                builder.mul(even_chain, slots['x_inv'], slots['delta'])
                builder.mul(even_chain, even_chain, slots['x'])
                h_slot[j] = even_chain
            else:
                if j == 3:
                    odd_chain = builder.alloc('h_odd')
                chain = odd_chain if j % 2 == 1 else even_chain
                builder.mul(chain, slots['v_inv'], h_slot[j - 2])
                builder.mul(chain, chain, slots['v'])
                h_slot[j] = chain
        product.multiply(h_slot[j], plan.partial_sums[j - 1])

    written = product.finish()
    builder.free(odd_chain, even_chain)
    return plan, written


@dataclass(frozen=True)
class MonomialWord:
    program: Program
    permutation: Permutation
    relabelled: Permutation
    perm_plan: PermWordPlan
    diag_plan: DiagWordPlan
    w_prime: Matrix


def _cycle_labels(cycle: Permutation, start: int) -> list[int]:
    labels = [start]
    while len(labels) < cycle.degree:
        labels.append(cycle(labels[-1]))
    return labels


def monomial_word(w: Matrix, field: FieldParams, gens: StandardGenerators | None = None) -> MonomialWord:
    """
    Build a program that leaves the monomial matrix ``w`` in the w slot of Y.

    For odd d the permutation word runs on (s, v, v^-1). For even d, Psi(s) and Psi(v)
    do not generate S_d in the required shape, so the word runs on s' = x^-1 s x,
    z^-1 and z with z = s v: Psi(z) is a d-cycle C in which Psi(s') = (2 3) swaps
    neighbours, and the target permutation is relabelled along C starting at 2.
    This prelude costs four instructions: two for s' and one each for z and z^-1.
    Scratch slots start above the 13-slot layout and slots 12, 13 are never touched.

    :raises: MatrixKindError for non-monomial input, DeterminantError unless det(w) = 1.
    """
    d = w.shape[0]
    check_dimension(d)
    if not is_monomial(w):
        raise MatrixKindError("monomial_word needs a monomial matrix")
    check_special(w)
    gens = gens or standard_generators(d, field)

    header = ProgramHeader.for_field(field, d)
    builder = SlotBuilder(header, reserved=constants.memory_layout_size)
    pi = psi(w)

    prelude: list[int] = []
    if d % 2 == 1 or pi.is_identity():
        s1, v1, v1_inv = Y['s'], Y['v'], Y['v_inv']
        tau = pi
    else:
        s1 = builder.alloc('s_prime')
        builder.mul(s1, Y['x_inv'], Y['s'])
        builder.mul(s1, s1, Y['x'])
        z = builder.alloc('z')
        builder.mul(z, Y['s'], Y['v'])
        z_inv = builder.alloc('z_inv')
        builder.inv(z_inv, z)
        v1, v1_inv = z_inv, z
        prelude = [s1, z, z_inv]

        sigma = _cycle_labels(psi(gens.s) * psi(gens.v), start=2)
        position = {point: k for k, point in enumerate(sigma, start=1)}
        tau = Permutation(position[pi(sigma[i - 1])] for i in range(1, d + 1))

    perm_plan = perm_word(tau, builder, s1, v1, v1_inv, W_SLOT)
    builder.free(*prelude)

    memory = Memory(MonomialGroup(field, d), memory_size(builder), monomial_generators(gens))
    if builder.instructions:
        evaluate(builder.build(quota=memory_size(builder)), memory)
    w_prime = memory[W_SLOT]
    if w_prime.perm != pi:
        raise RuntimeError(f"internal error: permutation word produced {w_prime.perm}, expected {pi}")

    h = MonomialMatrix.from_matrix(field, w) * w_prime.inverse()
    exponents = [field.dlog(c) for c in h.scalars]
    h_slot = builder.alloc('h')
    diag_plan, written = diag_word(exponents, builder, d, field.q, h_slot)
    if written:
        builder.mul(W_SLOT, h_slot, W_SLOT)
    builder.free(h_slot)

    program = builder.build()
    logger.info("Monomial word for %s: length %d, %d slots", pi, program.length(), program.quota)
    return MonomialWord(
        program=program,
        permutation=pi,
        relabelled=tau,
        perm_plan=perm_plan,
        diag_plan=diag_plan,
        w_prime=w_prime.to_matrix(),
    )


def monomial_generators(gens: StandardGenerators) -> list[MonomialMatrix]:
    """The first ten slots of Y in monomial form; t and t^-1 are not monomial and become the identity."""
    identity = MonomialMatrix.identity(gens.field, gens.d)
    return [MonomialMatrix.from_matrix(gens.field, m) if is_monomial(m) else identity for m in gens.as_list()]


def memory_size(builder: SlotBuilder) -> int:
    return max(builder.max_slot, constants.memory_layout_size)


def permutation_program(pi: Permutation) -> tuple[Program, int]:
    """
    Standalone program over slots (s_1, v_1, v_1^-1) = (1, 2, 3) computing a word for pi.

    :returns: The program and the slot holding the result.
    """
    d = pi.degree
    header = ProgramHeader.for_field(make_field(2), d)
    builder = SlotBuilder(header, reserved=3)
    dst = builder.alloc('pi')
    perm_word(pi, builder, 1, 2, 3, dst)
    return builder.build(), dst
