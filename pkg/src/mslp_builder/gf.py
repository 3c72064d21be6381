"""
Finite fields GF(p^f) with a pinned primitive element.

Field arithmetic is delegated to ``galois``; this module fixes the modulus and the
primitive element omega so that every emitted program can be re-evaluated bit-exactly,
and exposes the two readouts the word generators need: the coefficients of an element
as a polynomial in omega, and its discrete logarithm to base omega.
"""
from __future__ import annotations

import functools
import logging

from dataclasses import dataclass

import galois

from . import constants
from .exceptions import FieldError


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FieldParams:
    """
    Immutable description of GF(p^f) together with its galois field class.

    ``omega`` is the packed integer of the primitive element: the class of the
    indeterminate ``x`` (packed value ``p``) when f > 1, or the smallest primitive
    root modulo p when f = 1.
    """

    p: int
    f: int
    modulus: galois.Poly
    omega: int
    GF: type[galois.FieldArray]

    @property
    def q(self) -> int:
        return self.p ** self.f

    @property
    def modulus_int(self) -> int:
        """Packed base-p integer of the modulus, as recorded in program headers."""
        return int(self.modulus)

    @property
    def primitive(self) -> galois.FieldArray:
        return self.GF(self.omega)

    @property
    def zero(self) -> galois.FieldArray:
        return self.GF(0)

    @property
    def one(self) -> galois.FieldArray:
        return self.GF(1)

    def element(self, value: int) -> galois.FieldArray:
        """Decode a packed integer in [0, q)."""
        if not 0 <= value < self.q:
            raise FieldError(f"value {value} is not a packed element of GF({self.q})")
        return self.GF(value)

    def from_coeffs(self, coeffs) -> galois.FieldArray:
        """Element sum(coeffs[l] * omega^l) for an ascending coefficient vector."""
        if len(coeffs) != self.f:
            raise FieldError(f"expected {self.f} coefficients, got {len(coeffs)}")
        return self.GF.Vector([int(c) % self.p for c in coeffs][::-1])

    def coeffs(self, a) -> tuple[int, ...]:
        """
        Coefficients (a_0, ..., a_{f-1}) of ``a`` as a polynomial in omega.

        galois stores vectors in descending order of degree, hence the reversal.
        For prime fields omega is a primitive root rather than x, so the single
        coefficient is the element itself.
        """
        a = self.GF(a)
        if self.f == 1:
            return (int(a),)
        return tuple(int(c) for c in a.vector()[::-1])

    def dlog(self, a) -> int:
        a = self.GF(a)
        if a == 0:
            raise FieldError("discrete logarithm of zero is undefined")
        return int(a.log())

    def inv(self, a) -> galois.FieldArray:
        a = self.GF(a)
        if a == 0:
            raise FieldError("inversion of zero")
        return a ** -1

    def header(self) -> dict[str, int]:
        return {'p': self.p, 'f': self.f, 'mod': self.modulus_int}

    def __eq__(self, other):
        if not isinstance(other, FieldParams):
            return NotImplemented
        return (self.p, self.f, self.modulus_int) == (other.p, other.f, other.modulus_int)

    def __hash__(self):
        return hash((self.p, self.f, self.modulus_int))

    def __str__(self):
        return f"GF({self.p}^{self.f}) modulus={self.modulus} omega={self.omega}"


def _is_primitive(GF: type[galois.FieldArray], value: int) -> bool:
    order = GF.order - 1
    if order == 1:
        return value == 1
    a = GF(value)
    primes, _ = galois.factors(order)
    return all(a ** (order // r) != 1 for r in primes)


def _modulus_for(p: int, f: int) -> galois.Poly:
    try:
        return galois.conway_poly(p, f)
    except LookupError:
        logger.info("No Conway polynomial tabulated for GF(%d^%d), using the minimal primitive polynomial", p, f)
        return galois.primitive_poly(p, f, method="min")


@functools.lru_cache(maxsize=None)
def make_field(p: int, f: int = 1) -> FieldParams:
    """
    Build GF(p^f) with a deterministic modulus and primitive element.

    :param int p: Field characteristic, must be prime.
    :param int f: Extension degree, at least 1.

    :returns: FieldParams whose omega has been verified primitive.
    :raises: FieldError for invalid parameters.
    """
    if p < 2 or not galois.is_prime(p):
        raise FieldError(f"characteristic {p} is not prime")
    if f < 1:
        raise FieldError(f"extension degree {f} must be at least 1")
    q = p ** f
    if q > constants.max_field_order:
        raise FieldError(f"field order {q} exceeds the supported maximum {constants.max_field_order}")

    if f == 1:
        GF = galois.GF(p)
        omega = int(GF.primitive_element)
        modulus = galois.Poly([1, int(-GF(omega))], field=GF)
    else:
        modulus = _modulus_for(p, f)
        omega = p
        GF = galois.GF(q, irreducible_poly=modulus, primitive_element=omega)

    if not _is_primitive(GF, omega):
        raise FieldError(f"internal error: {omega} is not primitive in GF({q})")

    params = FieldParams(p=p, f=f, modulus=modulus, omega=omega, GF=GF)
    logger.debug("Constructed %s", params)
    return params


def field_for_order(q: int) -> FieldParams:
    """Resolve a prime power q to its field."""
    if q < 2:
        raise FieldError(f"{q} is not a prime power")
    primes, exponents = galois.factors(q)
    if len(primes) != 1:
        raise FieldError(f"{q} is not a prime power")
    return make_field(int(primes[0]), int(exponents[0]))


def field_for_header(p: int, f: int, modulus: int) -> FieldParams:
    """Resolve a program header, checking that it names the pinned modulus."""
    field = make_field(p, f)
    if field.modulus_int != modulus:
        raise FieldError(
            f"modulus {modulus} does not match the modulus {field.modulus_int} used for GF({p}^{f})"
        )
    return field

