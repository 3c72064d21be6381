import pytest

from mslp_builder.exceptions import FieldError
from mslp_builder.gf import field_for_header, field_for_order, make_field


@pytest.mark.parametrize('q', [2, 3, 4, 5, 7, 8, 9, 16, 25, 27])
def test_omega_generates_the_multiplicative_group(q, field):
    gf = field(q)
    powers = {int(gf.primitive ** k) for k in range(q - 1)}
    assert len(powers) == q - 1
    assert 0 not in powers


@pytest.mark.parametrize('q', [4, 8, 9, 25])
def test_coefficients_round_trip_through_omega(q, field):
    gf = field(q)
    for value in range(q):
        a = gf.element(value)
        coeffs = gf.coeffs(a)
        assert len(coeffs) == gf.f
        total = gf.zero
        for level, c in enumerate(coeffs):
            total = total + gf.GF(c) * gf.primitive ** level
        assert total == a
        assert gf.from_coeffs(coeffs) == a


def test_prime_field_coefficient_is_the_element(field):
    gf = field(7)
    assert gf.coeffs(gf.element(5)) == (5,)


def test_gf4_omega_squared(field):
    gf = field(4)
    # omega is a root of x^2 + x + 1
    assert gf.coeffs(gf.primitive ** 2) == (1, 1)


def test_gf8_modulus_and_omega_plus_one(field):
    gf = field(8)
    # x^3 + x + 1
    assert gf.modulus_int == 11
    assert gf.dlog(gf.primitive + gf.one) == 3


def test_prime_field_omega_is_the_least_primitive_root():
    assert make_field(5).omega == 2
    assert make_field(7).omega == 3


@pytest.mark.parametrize('q', [2, 8, 9])
def test_characteristic(q, field):
    gf = field(q)
    for value in range(q):
        a = gf.element(value)
        assert a + (-a) == gf.zero
        assert sum([a] * gf.p, gf.zero) == gf.zero
        assert a * gf.one == a


@pytest.mark.parametrize('q', [3, 4, 5, 8, 9])
def test_dlog_inverts_powering(q, field):
    gf = field(q)
    for k in range(q - 1):
        assert gf.dlog(gf.primitive ** k) == k


def test_dlog_of_zero(field):
    with pytest.raises(FieldError, match='zero'):
        field(5).dlog(0)


def test_inverse_of_zero(field):
    with pytest.raises(FieldError, match='inversion of zero'):
        field(9).inv(0)


def test_inverse(field):
    gf = field(9)
    for value in range(1, 9):
        assert gf.element(value) * gf.inv(gf.element(value)) == gf.one


@pytest.mark.parametrize('p,f', [(4, 1), (1, 1), (2, 0)])
def test_make_field_rejects_bad_parameters(p, f):
    with pytest.raises(FieldError):
        make_field(p, f)


def test_field_order_cap():
    with pytest.raises(FieldError, match='exceeds'):
        make_field(2, 21)


@pytest.mark.parametrize('q', [0, 1, 6, 12, 100])
def test_field_for_order_rejects_non_prime_powers(q):
    with pytest.raises(FieldError, match='prime power'):
        field_for_order(q)


def test_field_for_order_is_cached():
    assert field_for_order(8) is field_for_order(8)
    assert field_for_order(8) == make_field(2, 3)


def test_element_range(field):
    with pytest.raises(FieldError):
        field(5).element(5)


def test_header_round_trip(field):
    gf = field(27)
    assert field_for_header(gf.p, gf.f, gf.modulus_int) == gf


def test_header_with_foreign_modulus(field):
    gf = field(8)
    with pytest.raises(FieldError, match='does not match'):
        field_for_header(gf.p, gf.f, gf.modulus_int + 1)
