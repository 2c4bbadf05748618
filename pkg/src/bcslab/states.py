"""Reference states and quasiparticle operators.

Builds the filled-sea vacuum, the paired product state (two independent
routes: the explicit product and exp(i G_B)|0>), the rotated quasiparticle
operators gamma, the four-quasiparticle correction vector Phi, and the
normalized corrected state (Psi_ref + Phi)/sqrt(1 + (Phi,Phi)).

The same constructions serve the classic and corrected gap equations: feed
them an angle table from whichever gap table is in play.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_array

from .errors import ConsistencyError, ValidationError
from .fock import (
    DENSE_MODE_CAP,
    adjoint,
    apply_create,
    conjugate_series,
    evolve_state,
    ladder_matrix,
    op_norm_inf,
    vacuum_state,
)
from .gapsolve import AngleTable, EPS_GUARD
from .hamiltonian import build_GB, pair_annihilator
from .model import Kernel, ModeTable

GAMMA_CROSSCHECK_TOL = 1e-9


def fermi_vacuum(mt: ModeTable) -> np.ndarray:
    """Normal state: every mode with xi_k <= 0 contributes C*_{k,up} C*_{-k,dn}.

    Creators are applied in canonical mode order (rightmost factor first),
    so the sign bookkeeping is exact.
    """
    string = []  # creator orbitals, leftmost factor first
    for i in range(mt.n_modes):
        if mt.xi[i] <= 0:
            string.append(mt.orb_up(i))
            string.append(mt.orb_dn(mt.pair[i]))
    bits = 0
    sign = 1
    for j in reversed(string):
        res = apply_create(j, bits, mt.n_orbitals)
        if res is None:  # self-paired modes never collide; distinct orbitals
            raise ValidationError(f"orbital {j} doubly created while filling the Fermi sea")
        s, bits = res
        sign *= s
    v = np.zeros(mt.dim, dtype=np.complex128)
    v[bits] = float(sign)
    return v


def bcs_state(mt: ModeTable, angles: AngleTable) -> np.ndarray:
    """Paired product state prod_k (cos theta_k + sin theta_k C*_{k,up} C*_{-k,dn}) |0>."""
    angles.validate(mt)
    v = vacuum_state(mt.n_modes)
    for i in reversed(range(mt.n_modes)):
        c, s = angles.cos_t[i], angles.sin_t[i]
        if s == 0.0:
            v = c * v
            continue
        creator_pair = adjoint(pair_annihilator(mt, i))
        v = c * v + s * (creator_pair @ v)
    return v


def bcs_state_exponential(mt: ModeTable, angles: AngleTable, tol: float = 1e-12) -> np.ndarray:
    """Same state through exp(i G_B)|0>; independent route for cross-checks."""
    gb = build_GB(mt, angles)
    return evolve_state(gb, vacuum_state(mt.n_modes), tol=tol)


@dataclass(frozen=True, eq=False)
class QuasiOps:
    """Rotated quasiparticle annihilators per mode: up[i], dn[i] for (k_i, spin)."""

    up: list
    dn: list

    def all_ops(self) -> list:
        """All 2M annihilators in spin-orbital order (up_0, dn_0, up_1, ...)."""
        out = []
        for u, d in zip(self.up, self.dn):
            out.append(u)
            out.append(d)
        return out


def quasi_ops(mt: ModeTable, angles: AngleTable, verify: bool | None = None) -> QuasiOps:
    """Quasiparticle operators from the closed-form rotation

        gamma_{k,up} = cos theta_k C_{k,up} - sin theta_k C*_{-k,dn}
        gamma_{k,dn} = sin theta_k C*_{-k,up} + cos theta_k C_{k,dn}

    and, for small instances (or verify=True), cross-checked against the
    conjugation exp(i G_B) C exp(-i G_B) via the commutator series.
    """
    angles.validate(mt)
    m = mt.n_modes
    up = []
    dn = []
    for i in range(m):
        c, s = angles.cos_t[i], angles.sin_t[i]
        ann_up = ladder_matrix(mt.orb_up(i), m)
        cre_dn_partner = adjoint(ladder_matrix(mt.orb_dn(mt.pair[i]), m))
        up.append(csr_array(c * ann_up - s * cre_dn_partner))
        ann_dn = ladder_matrix(mt.orb_dn(i), m)
        cre_up_partner = adjoint(ladder_matrix(mt.orb_up(mt.pair[i]), m))
        dn.append(csr_array(s * cre_up_partner + c * ann_dn))
    ops = QuasiOps(up=up, dn=dn)
    if verify is None:
        verify = m <= DENSE_MODE_CAP
    if verify:
        gb = build_GB(mt, angles)
        for i in range(m):
            for closed, j in ((ops.up[i], mt.orb_up(i)), (ops.dn[i], mt.orb_dn(i))):
                rotated = conjugate_series(
                    ladder_matrix(j, m), gb, alpha=-1.0, tol=GAMMA_CROSSCHECK_TOL / 100.0
                )
                dev = op_norm_inf(closed - rotated)
                if dev > GAMMA_CROSSCHECK_TOL:
                    raise ConsistencyError(
                        f"quasiparticle operator for orbital {j} deviates from the "
                        f"conjugation route by {dev:.3e}"
                    )
    return ops


@dataclass(frozen=True, eq=False)
class CorrectionState:
    """Four-quasiparticle correction Phi with its overlap and coefficient table.

    coeffs[p, p'] = U_{p,p'} (C_p^2 S_p'^2 + C_p'^2 S_p^2) / (E_p + E_p').
    """

    phi: np.ndarray
    overlap: float
    coeffs: np.ndarray


def pair_coefficients(mt: ModeTable, kernel: Kernel, angles: AngleTable) -> np.ndarray:
    if angles.energy is None:
        raise ValidationError("angle table must carry quasiparticle energies (build it from a gap)")
    c2 = angles.cos_t**2
    s2 = angles.sin_t**2
    num = kernel.u * (np.outer(c2, s2) + np.outer(s2, c2))
    denom = np.maximum(angles.energy[:, None] + angles.energy[None, :], EPS_GUARD)
    return num / denom


def correction_state(
    mt: ModeTable,
    kernel: Kernel,
    angles: AngleTable,
    quasi: QuasiOps,
    psi_ref: np.ndarray,
) -> CorrectionState:
    """Phi = 1/2 sum_{p,p'} c_{p,p'} gamma*_{p,up} gamma*_{-p,dn} gamma*_{p',up} gamma*_{-p',dn} Psi_ref.

    The double sum collapses to unordered pairs: the p=p' strings vanish by
    nilpotency and the two orderings contribute equally (even permutation).
    """
    coeffs = pair_coefficients(mt, kernel, angles)
    m = mt.n_modes
    phi = np.zeros(mt.dim, dtype=np.complex128)
    cre_up = [adjoint(quasi.up[i]) for i in range(m)]
    # gamma*_{-p,dn} is the adjoint of the dn operator attached to mode -p
    cre_dn_neg = [adjoint(quasi.dn[mt.pair[i]]) for i in range(m)]
    for p in range(m):
        for pp in range(p + 1, m):
            c = coeffs[p, pp]
            if c == 0.0:
                continue
            w = cre_dn_neg[pp] @ psi_ref
            w = cre_up[pp] @ w
            w = cre_dn_neg[p] @ w
            w = cre_up[p] @ w
            phi += c * w
    overlap = float(np.vdot(phi, phi).real)
    return CorrectionState(phi=phi, overlap=overlap, coeffs=coeffs)


def correction_state_literal(
    mt: ModeTable,
    kernel: Kernel,
    angles: AngleTable,
    quasi: QuasiOps,
    psi_ref: np.ndarray,
) -> np.ndarray:
    """Literal ordered double sum with the 1/2 prefactor; oracle for the pair-collapsed form."""
    coeffs = pair_coefficients(mt, kernel, angles)
    m = mt.n_modes
    cre_up = [adjoint(quasi.up[i]) for i in range(m)]
    cre_dn_neg = [adjoint(quasi.dn[mt.pair[i]]) for i in range(m)]
    phi = np.zeros(mt.dim, dtype=np.complex128)
    for p in range(m):
        for pp in range(m):
            c = coeffs[p, pp]
            if c == 0.0:
                continue
            w = cre_dn_neg[pp] @ psi_ref
            w = cre_up[pp] @ w
            w = cre_dn_neg[p] @ w
            w = cre_up[p] @ w
            phi += 0.5 * c * w
    return phi


def normalized_psi(psi_ref: np.ndarray, correction: CorrectionState) -> np.ndarray:
    """(Psi_ref + Phi) / sqrt(1 + (Phi,Phi)); requires (Psi_ref, Phi) = 0."""
    ortho = abs(np.vdot(psi_ref, correction.phi))
    if ortho > 1e-10:
        raise ValidationError(
            f"correction is not orthogonal to the reference state: |(ref, Phi)| = {ortho:.3e}"
        )
    return (psi_ref + correction.phi) / np.sqrt(1.0 + correction.overlap)
