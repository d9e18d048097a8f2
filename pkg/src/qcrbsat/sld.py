"""Symmetric logarithmic derivatives in block form, and the quantum Fisher
information matrix.

With the support split of the state, the defining equation
``(L rho + rho L) / 2 = d rho`` decouples: the ++ block is solved entrywise
in the support eigenbasis (denominators q_j + q_k stay away from zero by
construction), the +0 block is ``2 diag(q)^-1 (d rho)_{+0}``, and the 00
block is unconstrained; it is set to zero here, which minimizes the
operator norm and changes nothing downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import numkernel as nk
from .errors import QcrbSatError
from .model import SupportDecomposition


class SLDInconsistentError(QcrbSatError):
    pass


@dataclass(frozen=True)
class BlockOperator:
    """Blocks of an operator with respect to the support/null split."""

    opp: np.ndarray  # (r+, r+)
    opz: np.ndarray  # (r+, r0)
    ozp: np.ndarray  # (r0, r+)
    ozz: np.ndarray  # (r0, r0)


def to_blocks(op: np.ndarray, dec: SupportDecomposition) -> BlockOperator:
    op = np.asarray(op, dtype=complex)
    n = dec.V.shape[0]
    if op.shape != (n, n):
        raise nk.ShapeError(f"operator has shape {op.shape}, expected ({n}, {n})")
    v, y = dec.V, dec.Y
    return BlockOperator(
        opp=v.conj().T @ op @ v,
        opz=v.conj().T @ op @ y,
        ozp=y.conj().T @ op @ v,
        ozz=y.conj().T @ op @ y,
    )


def from_blocks(blocks: BlockOperator, dec: SupportDecomposition) -> np.ndarray:
    v, y = dec.V, dec.Y
    return (
        v @ blocks.opp @ v.conj().T
        + v @ blocks.opz @ y.conj().T
        + y @ blocks.ozp @ v.conj().T
        + y @ blocks.ozz @ y.conj().T
    )


@dataclass(frozen=True)
class SLDSet:
    """SLD observables for every parameter, in blocks and in full space."""

    Lpp: tuple  # ++ blocks
    Lpz: tuple  # +0 blocks
    Lzz: tuple  # 00 blocks (zero by convention)
    full: tuple  # full-space observables
    residuals: np.ndarray  # defining-equation residuals, normalized
    sld_tol: float

    @property
    def n_params(self) -> int:
        return len(self.full)

    def with_lzz(self, lzz_list, dec: SupportDecomposition) -> "SLDSet":
        """Copy with replaced 00 blocks (they are free by construction)."""
        full = []
        for l, lzz in enumerate(lzz_list):
            b = BlockOperator(self.Lpp[l], self.Lpz[l], self.Lpz[l].conj().T, np.asarray(lzz))
            full.append(nk.hermitize(from_blocks(b, dec)))
        return replace(self, Lzz=tuple(np.asarray(z) for z in lzz_list), full=tuple(full))


def compute_sld(
    dec: SupportDecomposition, drho: np.ndarray, sld_tol: float = 1e-8
) -> SLDSet:
    """Solve the SLD defining equation for every parameter.

    Raises :class:`SLDInconsistentError` when the assembled observable does
    not reproduce the derivative to ``sld_tol`` (relative); that typically
    signals bad derivatives or a misdetected rank.
    """
    q = dec.q
    v, y = dec.V, dec.Y
    denom = q[:, None] + q[None, :]

    lpp, lpz, lzz, full, residuals = [], [], [], [], []
    for l in range(len(drho)):
        d = np.asarray(drho[l], dtype=complex)
        r = v.conj().T @ d @ v
        lpp_l = nk.hermitize(2.0 * r / denom)
        lpz_l = 2.0 * (v.conj().T @ d @ y) / q[:, None]
        lzz_l = np.zeros((dec.r_zero, dec.r_zero), dtype=complex)
        b = BlockOperator(lpp_l, lpz_l, lpz_l.conj().T, lzz_l)
        l_full = nk.hermitize(from_blocks(b, dec))

        rho = v @ np.diag(q).astype(complex) @ v.conj().T
        res = nk.fro((l_full @ rho + rho @ l_full) / 2.0 - d) / max(1.0, nk.fro(d))
        if res > sld_tol:
            raise SLDInconsistentError(
                f"SLD defining equation violated for parameter {l}: "
                f"residual {res:.3e} > {sld_tol:.1e}",
                param=l,
                residual=res,
            )
        lpp.append(lpp_l)
        lpz.append(lpz_l)
        lzz.append(lzz_l)
        full.append(l_full)
        residuals.append(res)

    return SLDSet(
        Lpp=tuple(lpp),
        Lpz=tuple(lpz),
        Lzz=tuple(lzz),
        full=tuple(full),
        residuals=np.array(residuals),
        sld_tol=sld_tol,
    )


def qfim(dec: SupportDecomposition, slds: SLDSet) -> np.ndarray:
    """Quantum Fisher information matrix F_jk = Re tr(rho L_j L_k).

    Computed in blocks; the 00 blocks never enter because rho vanishes
    outside the support.
    """
    p = slds.n_params
    q = dec.q
    f = np.zeros((p, p))
    for j in range(p):
        for k in range(j, p):
            m = slds.Lpp[j] @ slds.Lpp[k] + slds.Lpz[j] @ slds.Lpz[k].conj().T
            val = float(np.sum(q * np.diag(m).real))
            f[j, k] = f[k, j] = val
    return (f + f.T) / 2.0
