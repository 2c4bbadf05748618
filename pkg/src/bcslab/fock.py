"""Occupation-number basis and fermionic operator algebra on C^(2^(2M)).

Basis encoding: a basis state is an unsigned integer of 2M bits, bit j
holding the occupation of spin-orbital j.  Bit 0 is the first spin-orbital
listed in the ket, so the zero-based column index of a basis vector equals
its bit pattern (vacuum = index 0, fully filled = index 2^(2M)-1).

Fermionic signs are (-1)^(number of occupied orbitals below j) and are
computed in exact integer arithmetic; floating point only enters through
amplitudes.  Operators are scipy CSR arrays, states are 1-d complex
numpy arrays.
"""

from __future__ import annotations

import math
import os

import numpy as np
from scipy.sparse import csr_array, eye_array

from .errors import ConvergenceError, ResourceLimitError, ValidationError

DEFAULT_MODE_CAP = 7
DENSE_MODE_CAP = 5

SELFADJOINT_TOL = 1e-12


def mode_cap() -> int:
    """Largest allowed pair count M; override with env var BCSLAB_DIM_CAP."""
    raw = os.environ.get("BCSLAB_DIM_CAP")
    if raw is None:
        return DEFAULT_MODE_CAP
    return int(raw)


def check_mode_count(n_modes: int) -> None:
    cap = mode_cap()
    if n_modes > cap:
        raise ResourceLimitError(
            f"M={n_modes} gives dimension 2^{2 * n_modes}, beyond the cap M<={cap} "
            f"(set BCSLAB_DIM_CAP to override)"
        )


def space_dim(n_modes: int) -> int:
    """Dimension 2^(2M) of the Fock space for M mode pairs."""
    return 1 << (2 * n_modes)


# ---------------------------------------------------------------------------
# bit-level ladder action


def apply_annihilate(j: int, bits: int, n_orbitals: int):
    """Act with the annihilator of spin-orbital j on basis state `bits`.

    Returns (sign, bits') with sign = +-1, or None when orbital j is empty.
    """
    if not 0 <= j < n_orbitals:
        raise ValueError(f"orbital index {j} out of range [0, {n_orbitals})")
    if not (bits >> j) & 1:
        return None
    below = bits & ((1 << j) - 1)
    sign = -1 if below.bit_count() & 1 else 1
    return sign, bits ^ (1 << j)


def apply_create(j: int, bits: int, n_orbitals: int):
    """Act with the creator of spin-orbital j; None when j is already filled."""
    if not 0 <= j < n_orbitals:
        raise ValueError(f"orbital index {j} out of range [0, {n_orbitals})")
    if (bits >> j) & 1:
        return None
    below = bits & ((1 << j) - 1)
    sign = -1 if below.bit_count() & 1 else 1
    return sign, bits | (1 << j)


# ---------------------------------------------------------------------------
# matrix realizations


def ladder_matrix(j: int, n_modes: int) -> csr_array:
    """Matrix of the annihilator C_j on the full 2^(2M)-dim space.

    Exactly 2^(2M-1) nonzeros, each +-1.  The creator is its adjoint.
    """
    check_mode_count(n_modes)
    n_orb = 2 * n_modes
    if not 0 <= j < n_orb:
        raise ValueError(f"orbital index {j} out of range [0, {n_orb})")
    dim = space_dim(n_modes)
    src = np.arange(dim, dtype=np.int64)
    occupied = (src >> j) & 1 == 1
    cols = src[occupied]
    rows = cols ^ (1 << j)
    below = np.bitwise_count(cols & ((1 << j) - 1))
    signs = np.where(below & 1, -1.0, 1.0).astype(np.complex128)
    return csr_array((signs, (rows, cols)), shape=(dim, dim))


def creator_matrix(j: int, n_modes: int) -> csr_array:
    return adjoint(ladder_matrix(j, n_modes))


def identity_op(dim: int) -> csr_array:
    return eye_array(dim, dtype=np.complex128, format="csr")


def adjoint(a: csr_array) -> csr_array:
    return csr_array(a.conj().T)


def commutator(a, b) -> csr_array:
    return a @ b - b @ a


def anticommutator(a, b) -> csr_array:
    return a @ b + b @ a


def op_norm_inf(a) -> float:
    """Operator infinity-norm (max absolute row sum)."""
    if a.nnz == 0:
        return 0.0
    return float(abs(a).sum(axis=1).max())


def is_selfadjoint(a, tol: float = SELFADJOINT_TOL) -> bool:
    return op_norm_inf(a - adjoint(a)) <= tol


def anticommutator_check(n_modes: int) -> float:
    """Max deviation of the canonical anticommutation relations at pair count M.

    Checks {C_j, C*_j'} - delta_jj' I, {C_j, C_j'}, {C*_j, C*_j'} for all
    orbital pairs; exact sign arithmetic makes the result 0.0, not merely small.
    """
    check_mode_count(n_modes)
    n_orb = 2 * n_modes
    ann = [ladder_matrix(j, n_modes) for j in range(n_orb)]
    cre = [adjoint(c) for c in ann]
    ident = identity_op(space_dim(n_modes))
    worst = 0.0
    for j in range(n_orb):
        for jp in range(n_orb):
            mixed = anticommutator(ann[j], cre[jp])
            if j == jp:
                mixed = mixed - ident
            worst = max(worst, op_norm_inf(mixed))
            worst = max(worst, op_norm_inf(anticommutator(ann[j], ann[jp])))
            worst = max(worst, op_norm_inf(anticommutator(cre[j], cre[jp])))
    return worst


# ---------------------------------------------------------------------------
# exponential conjugation and state evolution (truncated Taylor series)

CONJUGATE_MAX_TERMS = 200
EVOLVE_MAX_TERMS = 500


def conjugate_series(a, b, alpha: float, tol: float = 1e-12) -> csr_array:
    """exp(-i*alpha*B) A exp(i*alpha*B) via the nested-commutator series.

    Sums (i*alpha)^n / n! [..[A,B],..,B] and truncates once the appended
    term drops below `tol` in infinity-norm; the result then matches the
    exact conjugation within 10*tol.  B must be selfadjoint.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not is_selfadjoint(b):
        raise ValueError("B must be selfadjoint for conjugation by exp(i*alpha*B)")
    total = csr_array(a, dtype=np.complex128, copy=True)
    if alpha == 0.0:
        return total
    term = total
    coeff = 1.0 + 0.0j
    small_streak = 0
    for n in range(1, CONJUGATE_MAX_TERMS + 1):
        term = commutator(term, b)
        coeff *= 1j * alpha / n
        scaled = csr_array(term * coeff)
        total = total + scaled
        # two consecutive sub-tol terms guard against an accidental small term
        if op_norm_inf(scaled) <= tol:
            small_streak += 1
            if small_streak >= 2:
                return csr_array(total)
        else:
            small_streak = 0
    raise ConvergenceError(
        f"commutator series did not reach tol={tol} within {CONJUGATE_MAX_TERMS} terms"
    )


def evolve_state(b, v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Apply exp(i*B) to the vector v by a truncated Taylor series.

    B must be selfadjoint, so the result keeps the norm of v up to 10*tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not is_selfadjoint(b):
        raise ValueError("B must be selfadjoint for exp(i*B)")
    if b.shape[1] != v.shape[0]:
        raise ValueError(f"dimension mismatch: operator {b.shape}, state {v.shape}")
    total = np.array(v, dtype=np.complex128, copy=True)
    term = total.copy()
    small_streak = 0
    for n in range(1, EVOLVE_MAX_TERMS + 1):
        term = (1j / n) * (b @ term)
        term_norm = float(np.linalg.norm(term))
        if not math.isfinite(term_norm):
            raise ConvergenceError(
                f"Taylor series for exp(i*B)v overflowed at term {n}; |B| too large"
            )
        total += term
        if term_norm <= tol / 10.0:
            small_streak += 1
            if small_streak >= 2:
                return total
        else:
            small_streak = 0
    raise ConvergenceError(
        f"Taylor series for exp(i*B)v did not reach tol={tol} within {EVOLVE_MAX_TERMS} terms"
    )


# ---------------------------------------------------------------------------
# states and expectation values


def basis_state(bits: int, n_modes: int) -> np.ndarray:
    dim = space_dim(n_modes)
    if not 0 <= bits < dim:
        raise ValueError(f"basis index {bits} out of range [0, {dim})")
    v = np.zeros(dim, dtype=np.complex128)
    v[bits] = 1.0
    return v


def vacuum_state(n_modes: int) -> np.ndarray:
    """The vacuum ket (all occupations zero)."""
    return basis_state(0, n_modes)


def expectation(phi: np.ndarray, a, psi: np.ndarray) -> complex:
    """Inner product (phi, A psi), antilinear in the first argument."""
    if a.shape[1] != psi.shape[0] or a.shape[0] != phi.shape[0]:
        raise ValueError(
            f"dimension mismatch: operator {a.shape}, bra {phi.shape}, ket {psi.shape}"
        )
    return complex(np.vdot(phi, a @ psi))


def state_norm(v: np.ndarray) -> float:
    return float(np.linalg.norm(v))


def check_normalized(v: np.ndarray, tol: float = 1e-12) -> None:
    n = state_norm(v)
    if not math.isclose(n, 1.0, rel_tol=0.0, abs_tol=tol):
        raise ValidationError(f"state norm {n} deviates from 1 by more than {tol}")
