"""Closed-form upper bounds on program length and memory quota."""
from __future__ import annotations

import math

from . import constants


def perm_word_length(d: int) -> float:
    return 2 * d * math.log2(d) + 4 * d


perm_word_quota = 8


def diag_word_length(d: int, q: int) -> float:
    return 2 * d * math.log2(d) + 2 * d * math.log2(q) + 3 * d


diag_word_quota = 15


def t21_basis_length(f: int) -> int:
    return 5 * f - 1


def t21_basis_quota(f: int) -> int:
    return f + 14


def arbitrary_transvection_length(q: int, f: int) -> float:
    return 2 * math.log2(q) + f - 1


def arbitrary_transvection_quota(f: int) -> int:
    return f + 3


def first_transvections_length(r: int, q: int, f: int) -> float:
    return f * (2 * r - 1) + 2 * math.log2(q) + 2


def left_update_length(q: int, f: int) -> float:
    return 2 * math.log2(q) + 3 * f + 10


def step2_length(d: int, q: int, f: int) -> float:
    log_q = math.log2(q)
    return d * d * (2 * log_q + 5 * f + 10) + 4 * d * (log_q + 1) + 5 * f + 2


def step2_quota(d: int, f: int) -> int:
    return f + 18 if d % 2 == 1 else 2 * f + 18


def total_quota(f: int) -> int:
    return 2 * f + 18


def total_length(d: int, q: int) -> float:
    return constants.length_ratio_limit * d * d * math.log2(q)


def length_ratio(length: int, d: int, q: int) -> float:
    return length / (d * d * math.log2(q))
