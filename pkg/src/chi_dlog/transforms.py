"""The Fourier transform over Z/mZ and the exact division/power permutations.

The Fourier operator is a dense matrix with entries exp(2*pi*i*x*y/m)/sqrt(m);
exponents are reduced mod m before evaluation so the phase argument never
grows. The division and power operators are pure basis permutations built
from group multiplication alone (never from a discrete-log lookup), realized
as explicit joint-index tables validated bijective at construction.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import WrongLayout, WrongRegisterKind
from .group import GroupSpec
from .qstate import (
    BasisPermutation,
    ExponentRegister,
    GroupRegister,
    QState,
    apply_basis_permutation,
    apply_register_unitary,
)

__all__ = [
    "div_alpha_apply",
    "div_alpha_permutation",
    "div_x_apply",
    "div_x_permutation",
    "fourier_matrix",
    "power_oracle_apply",
    "power_oracle_permutation",
    "qft_apply",
]


@lru_cache(maxsize=64)
def fourier_matrix(m: int, inverse: bool = False) -> np.ndarray:
    """Dense m x m Fourier matrix; the inverse is the conjugate transpose."""
    if m < 1:
        raise ValueError(f"dimension {m} must be positive")
    k = np.outer(np.arange(m), np.arange(m)) % m
    sign = -1.0 if inverse else 1.0
    mat = np.exp(sign * 2j * np.pi * k / m) / np.sqrt(m)
    mat.setflags(write=False)
    return mat


def qft_apply(state: QState, register_index: int, inverse: bool = False,
              use_fft: bool = False, check_unitary: bool = False) -> QState:
    """Fourier-transform one exponent register.

    The dense matrix application is the normative path. use_fft switches to a
    mixed-radix fast path (numpy's pocketfft) that agrees with the dense path
    within 1e-9; it exists for large orders only and is off by default.
    """
    regs = state.layout.registers
    if not 0 <= register_index < len(regs):
        raise WrongLayout(f"no register {register_index} in this layout")
    reg = regs[register_index]
    if not isinstance(reg, ExponentRegister):
        raise WrongRegisterKind("the Fourier transform acts on exponent registers only")
    if not use_fft:
        return apply_register_unitary(
            state, register_index, fourier_matrix(reg.dim, inverse), check_unitary)
    m = reg.dim
    root = np.sqrt(m)
    if len(regs) == 1:
        axis = 0
        data = state.amplitudes
    else:
        data = state.amplitudes.reshape(regs[1].dim, regs[0].dim)
        axis = 1 if register_index == 0 else 0
    # forward transform has the +2*pi*i/m kernel: that is ifft scaled by m
    out = np.fft.fft(data, axis=axis) / root if inverse else np.fft.ifft(data, axis=axis) * root
    return QState(state.layout, np.ascontiguousarray(out).reshape(-1))


def _mult_index_perm(spec: GroupSpec, c: int) -> np.ndarray:
    """Basis-index table of right multiplication y -> y*c."""
    return np.fromiter((spec.index_of(spec.mul(y, c)) for y in spec.elements),
                       dtype=np.int64, count=spec.order)


def _joint_table(rows: np.ndarray, d0: int) -> np.ndarray:
    """Assemble |i0, i1> -> |i0, rows[i0, i1]> into a flat joint table."""
    i1, i0 = np.divmod(np.arange(d0 * rows.shape[1], dtype=np.int64), d0)
    return i0 + d0 * rows[i0, i1]


@lru_cache(maxsize=128)
def div_alpha_permutation(spec: GroupSpec, alpha: int) -> BasisPermutation:
    """Joint table of |x, y> -> |x, y * x**(-alpha)> on a (group, group) pair."""
    m = spec.order
    alpha %= m
    rows = np.empty((m, m), dtype=np.int64)
    for ix, x in enumerate(spec.elements):
        rows[ix] = _mult_index_perm(spec, spec.pow(x, -alpha))
    return BasisPermutation(_joint_table(rows, m))


@lru_cache(maxsize=128)
def div_x_permutation(spec: GroupSpec, x: int) -> BasisPermutation:
    """Joint table of |a, y> -> |a, y * x**(-a)> on an (exponent, group) pair."""
    m = spec.order
    step = _mult_index_perm(spec, spec.inverse(x))
    rows = np.empty((m, m), dtype=np.int64)
    rows[0] = np.arange(m)
    for a in range(1, m):
        rows[a] = step[rows[a - 1]]
    return BasisPermutation(_joint_table(rows, m))


@lru_cache(maxsize=128)
def power_oracle_permutation(spec: GroupSpec) -> BasisPermutation:
    """Joint table of |r, y> -> |r, y * g**r> on an (exponent, group) pair."""
    m = spec.order
    step = _mult_index_perm(spec, spec.generator)
    rows = np.empty((m, m), dtype=np.int64)
    rows[0] = np.arange(m)
    for r in range(1, m):
        rows[r] = step[rows[r - 1]]
    return BasisPermutation(_joint_table(rows, m))


def _group_group(state: QState) -> GroupSpec:
    regs = state.layout.registers
    if len(regs) != 2 or not all(isinstance(r, GroupRegister) for r in regs):
        raise WrongLayout("expected a (group, group) register pair")
    if regs[0].group != regs[1].group:
        raise WrongLayout("both registers must carry the same group")
    return regs[0].group


def _exponent_group(state: QState) -> GroupSpec:
    regs = state.layout.registers
    if len(regs) != 2 or not isinstance(regs[0], ExponentRegister) \
            or not isinstance(regs[1], GroupRegister):
        raise WrongLayout("expected an (exponent, group) register pair")
    spec = regs[1].group
    if regs[0].dim != spec.order:
        raise WrongLayout(
            f"exponent register dimension {regs[0].dim} != group order {spec.order}")
    return spec


def div_alpha_apply(state: QState, alpha: int) -> QState:
    """Divide the right register by the left register raised to alpha."""
    spec = _group_group(state)
    return apply_basis_permutation(state, div_alpha_permutation(spec, alpha % spec.order))


def div_x_apply(state: QState, x: int) -> QState:
    """Divide the right register by x raised to the left exponent register."""
    spec = _exponent_group(state)
    spec.index_of(x)
    return apply_basis_permutation(state, div_x_permutation(spec, x))


def power_oracle_apply(state: QState) -> QState:
    """Multiply the right register by g raised to the left exponent register."""
    spec = _exponent_group(state)
    return apply_basis_permutation(state, power_oracle_permutation(spec))
