"""Multiple Wiener terms and truncated expansions of iterated Ito integrals.

For a multi-index (i_1..i_k) and basis indices (j_1..j_k) the symmetrized
multiple Wiener term J''[phi_{j_1}...phi_{j_k}] is a polynomial in the
Gaussian coordinates zeta_j^{(i)} = int phi_j dw^{(i)}. Three algebraically
equivalent evaluations are provided:

* ``term_partition``: full product minus alternating pair-contraction sums
* ``term_hermite``: product of Hermite polynomials over repeated (i, j) groups
* ``term_recurrence``: peel off the last factor and contract it with each
  earlier matching factor

Table values may carry trailing batch axes, in which case every function
here evaluates all samples at once.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .basis import BasisKind, Interval, UNIT, integrate_basis
from .coefficients import CoefficientTensor
from .combinatorics import (
    MAX_ORDER,
    enumerate_pair_partitions,
    j_grouping,
    multiplicity_structure,
)
from .errors import DomainError
from .hermite import hermite

FORMS = ("partition", "hermite", "recurrence")


@dataclass(frozen=True, eq=False)
class GaussianTable:
    """zeta_j^{(i)} for i = 0..m, j = 0..p.

    Row 0 is the deterministic time row int phi_j dtau; rows 1..m are
    (approximately) independent standard normals. ``values`` has shape
    (m + 1, p + 1) followed by optional batch axes.
    """

    values: np.ndarray
    basis: BasisKind = BasisKind.LEGENDRE
    iv: Interval = UNIT

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim < 2 or vals.shape[0] < 2:
            raise DomainError("table needs shape (m + 1, p + 1, ...) with m >= 1")
        object.__setattr__(self, "values", vals)

    @property
    def m(self) -> int:
        return self.values.shape[0] - 1

    @property
    def p(self) -> int:
        return self.values.shape[1] - 1

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.values.shape[2:]

    def value(self, i: int, j: int):
        return self.values[i, j]


def time_row(basis: BasisKind, p: int, iv: Interval) -> np.ndarray:
    return np.array([integrate_basis(basis, j, iv) for j in range(p + 1)])


def entry_rng(seed: int, i: int, j: int) -> np.random.Generator:
    """Generator for table entry (i, j); independent of the table size."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(i), int(j))))


def sample_table(seed: int, m: int, p: int, basis: BasisKind = BasisKind.LEGENDRE,
                 iv: Interval = UNIT, batch: int | None = None) -> GaussianTable:
    """A reproducible GaussianTable.

    Entry (i, j) for i >= 1 is drawn from its own stream keyed on
    (seed, i, j), so growing ``p`` or ``m`` leaves existing entries
    unchanged. With ``batch`` each entry holds that many draws.
    """
    if m < 1 or p < 0:
        raise DomainError(f"table needs m >= 1 and p >= 0, got m={m}, p={p}")
    shape = (m + 1, p + 1) if batch is None else (m + 1, p + 1, batch)
    values = np.empty(shape)
    row0 = time_row(basis, p, iv)
    values[0] = row0.reshape((p + 1,) + (1,) * (len(shape) - 2))
    for i in range(1, m + 1):
        for j in range(p + 1):
            values[i, j] = entry_rng(seed, i, j).standard_normal(batch)
    return GaussianTable(values, basis, iv)


def _check_indices(mi, jx, tab: GaussianTable):
    mi = tuple(int(i) for i in mi)
    jx = tuple(int(j) for j in jx)
    if len(mi) != len(jx):
        raise DomainError(f"multi-index length {len(mi)} differs from j-index length {len(jx)}")
    if not 1 <= len(mi) <= MAX_ORDER:
        raise DomainError(f"multiplicity must be in [1, {MAX_ORDER}], got {len(mi)}")
    if any(i < 0 or i > tab.m for i in mi):
        raise DomainError(f"multi-index {mi} outside 0..{tab.m}")
    if any(j < 0 or j > tab.p for j in jx):
        raise DomainError(f"j-index {jx} outside 0..{tab.p}")
    return mi, jx


@functools.lru_cache(maxsize=None)
def partition_monomials(k: int) -> tuple[tuple[int, tuple[tuple[int, int], ...], tuple[int, ...]], ...]:
    """(sign, pairs, singles) for every monomial of the partition form.

    The leading (+1, (), (1..k)) term is the full product.
    """
    out = [(1, (), tuple(range(1, k + 1)))]
    for r in range(1, k // 2 + 1):
        for part in enumerate_pair_partitions(k, r):
            out.append(((-1) ** r, part.pairs, part.singles))
    return tuple(out)


def term_partition(mi, jx, tab: GaussianTable):
    mi, jx = _check_indices(mi, jx, tab)
    zeta = [tab.values[i, j] for i, j in zip(mi, jx)]
    total = 0.0
    for sign, pairs, singles in partition_monomials(len(mi)):
        if not all(mi[a - 1] == mi[b - 1] != 0 and jx[a - 1] == jx[b - 1] for a, b in pairs):
            continue
        prod = 1.0
        for q in singles:
            prod = prod * zeta[q - 1]
        total = total + sign * prod
    return total


def term_hermite(mi, jx, tab: GaussianTable):
    mi, jx = _check_indices(mi, jx, tab)
    ms = multiplicity_structure(mi)
    grouping = j_grouping(ms, jx)
    prod = 1.0
    for i, values, counts in zip(ms.distinct_values, grouping.values, grouping.counts):
        for j, n in zip(values, counts):
            z = tab.values[i, j]
            prod = prod * (hermite(n, z) if i != 0 else z**n)
    return prod


def term_recurrence(mi, jx, tab: GaussianTable):
    mi, jx = _check_indices(mi, jx, tab)
    memo: dict[tuple, object] = {}

    def rec(items: tuple[tuple[int, int], ...]):
        if not items:
            return 1.0
        if items in memo:
            return memo[items]
        i_k, j_k = items[-1]
        head = items[:-1]
        val = tab.values[i_k, j_k] * rec(head)
        if i_k != 0:
            for l, (i_l, j_l) in enumerate(head):
                if i_l == i_k and j_l == j_k:
                    val = val - rec(head[:l] + head[l + 1:])
        memo[items] = val
        return val

    return rec(tuple(zip(mi, jx)))


TERM_FORMS = {"partition": term_partition, "hermite": term_hermite, "recurrence": term_recurrence}


def term(mi, jx, tab: GaussianTable, form: str = "hermite"):
    try:
        fn = TERM_FORMS[form]
    except KeyError:
        raise DomainError(f"unknown form {form!r}; expected one of {FORMS}") from None
    return fn(mi, jx, tab)


def approximate_integral(tensor: CoefficientTensor, mi: Sequence[int], tab: GaussianTable,
                         form: str = "hermite"):
    """Truncated expansion sum_j C[j] * J''[phi_j] of the iterated integral.

    Terms are accumulated in lexicographic order of (j_1, ..., j_k).
    """
    mi = tuple(int(i) for i in mi)
    if tensor.k != len(mi):
        raise DomainError(f"tensor has k={tensor.k}, multi-index has length {len(mi)}")
    if max(tensor.truncation) > tab.p:
        raise DomainError(f"table has p={tab.p}, tensor needs {max(tensor.truncation)}")
    if tab.basis is not tensor.basis:
        raise DomainError("table and tensor use different bases")
    fn = TERM_FORMS.get(form)
    if fn is None:
        raise DomainError(f"unknown form {form!r}; expected one of {FORMS}")
    total = np.zeros(tab.batch_shape)
    for jx in itertools.product(*(range(s) for s in tensor.values.shape)):
        total = total + tensor.values[jx] * fn(mi, jx, tab)
    return total if total.ndim else float(total)


class MseEstimate(NamedTuple):
    value: float
    exact: bool  # False: repeated or zero indices, value is only a surrogate


def mse_estimate(tensor: CoefficientTensor, mi: Sequence[int], kernel_norm_sq: float) -> MseEstimate:
    """Mean-square truncation error ||K||^2 - sum C^2.

    Exact when the entries of ``mi`` are nonzero and pairwise distinct;
    otherwise returned with ``exact=False`` as a surrogate for the bound.
    """
    mi = tuple(int(i) for i in mi)
    if tensor.k != len(mi):
        raise DomainError(f"tensor has k={tensor.k}, multi-index has length {len(mi)}")
    s = tensor.sum_sq()
    if kernel_norm_sq < s - 1e-9:
        raise DomainError(f"kernel norm {kernel_norm_sq} is below the coefficient energy {s}")
    exact = 0 not in mi and len(set(mi)) == len(mi)
    return MseEstimate(kernel_norm_sq - s, exact)

