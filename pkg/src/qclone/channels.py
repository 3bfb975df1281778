"""Quantum channels stored as Choi states.

The Choi state uses the trace-one convention ``tau = (id x T)(|Omega><Omega|)``,
so ``T(rho) = d * Tr_0[(rho^T x 1) tau]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .tensor import (
    DenseOperator,
    as_rng,
    haar_unitaries,
    max_entangled,
    partial_trace,
)

__all__ = [
    "ChoiChannel",
    "choi_of",
    "apply",
    "marginal",
    "twirl_mc",
    "covariance_residual",
    "random_channel",
    "random_pure_state",
    "cloning_witness",
]

CP_TOL = 1e-9
TP_TOL = 1e-9


@dataclass(frozen=True)
class ChoiChannel:
    input_dim: int
    output_dims: tuple[int, ...]
    choi: DenseOperator

    def __post_init__(self):
        dims = (self.input_dim,) + tuple(self.output_dims)
        object.__setattr__(self, "output_dims", tuple(self.output_dims))
        if self.choi.dims != dims:
            raise ValueError(f"Choi state dims {self.choi.dims} do not match {dims}")

    @property
    def n_outputs(self) -> int:
        return len(self.output_dims)

    def cp_error(self) -> float:
        """Magnitude of the most negative Choi eigenvalue (0 if PSD)."""
        h = 0.5 * (self.choi.mat + self.choi.mat.conj().T)
        return max(0.0, -float(np.linalg.eigvalsh(h).min()))

    def tp_error(self) -> float:
        reduced = partial_trace(self.choi, {0}).mat
        return float(np.abs(reduced - np.eye(self.input_dim) / self.input_dim).max())

    def is_cptp(self, cp_tol: float = CP_TOL, tp_tol: float = TP_TOL) -> bool:
        return self.cp_error() <= cp_tol and self.tp_error() <= tp_tol

    def __call__(self, rho: DenseOperator) -> DenseOperator:
        return apply(self, rho)


def choi_of(transform: Callable[[np.ndarray], np.ndarray], input_dim: int,
            output_dims: Sequence[int]) -> ChoiChannel:
    """Choi state of a linear map given as a function on raw matrices."""
    d = int(input_dim)
    output_dims = tuple(int(x) for x in output_dims)
    d_out = int(np.prod(output_dims))
    blocks = np.zeros((d, d_out, d, d_out), dtype=complex)
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            out = np.asarray(transform(unit), dtype=complex)
            if out.shape != (d_out, d_out):
                raise ValueError(f"map returned shape {out.shape}, expected {(d_out, d_out)}")
            blocks[i, :, j, :] = out
    choi = DenseOperator(blocks.reshape(d * d_out, d * d_out) / d, (d,) + output_dims)
    return ChoiChannel(d, output_dims, choi)


def apply(ch: ChoiChannel, rho: DenseOperator) -> DenseOperator:
    d = ch.input_dim
    if rho.dim != d:
        raise ValueError(f"input has dimension {rho.dim}, channel expects {d}")
    d_out = int(np.prod(ch.output_dims))
    t = ch.choi.mat.reshape(d, d_out, d, d_out)
    # d * sum_ij rho_ij * tau[i, :, j, :]
    out = d * np.einsum("ij,iajb->ab", rho.mat, t)
    return DenseOperator(out, ch.output_dims)


def marginal(ch: ChoiChannel, i: int) -> ChoiChannel:
    """Reduced channel onto clone ``i`` (1 or 2)."""
    if ch.n_outputs != 2:
        raise ValueError("marginal() needs a channel with two output factors")
    if i not in (1, 2):
        raise ValueError(f"clone index must be 1 or 2, got {i}")
    reduced = partial_trace(ch.choi, {0, i})
    return ChoiChannel(ch.input_dim, (ch.output_dims[i - 1],), reduced)


def _twirl_operators(us: np.ndarray, n_outputs: int) -> np.ndarray:
    """conj(U) x U x ... x U for a batch of unitaries."""
    w = us.conj()
    for _ in range(n_outputs):
        w = np.einsum("nab,ncd->nacbd", w, us).reshape(len(us), w.shape[1] * us.shape[1], -1)
    return w


def twirl_mc(ch: ChoiChannel, n_samples: int, rng=None, unitaries=None,
             batch: int = 512, checkpoints: Sequence[int] | None = None):
    """Monte Carlo estimate of the unitary twirl, computed on the Choi state.

    Averages ``W tau W^dag`` with ``W = conj(U) x U x U`` over Haar samples.
    ``unitaries`` (shape (n, d, d)) overrides sampling. With ``checkpoints``
    the running averages at those sample counts are returned as well, as a
    list of ``(n, ChoiChannel)`` pairs.
    """
    d = ch.input_dim
    if any(x != d for x in ch.output_dims):
        raise ValueError("twirl needs input and output factors of equal dimension")
    if unitaries is not None:
        us_all = np.asarray(unitaries, dtype=complex).reshape(-1, d, d)
        n_samples = len(us_all)
    elif n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = as_rng(rng)
    marks = sorted({int(c) for c in checkpoints or () if 1 <= int(c) <= n_samples})
    tau = ch.choi.mat
    acc = np.zeros_like(tau)
    done = 0
    snaps = []
    while done < n_samples:
        m = min(batch, n_samples - done)
        if unitaries is not None:
            us = us_all[done:done + m]
        else:
            us = haar_unitaries(d, m, rng)
        ws = _twirl_operators(us, ch.n_outputs)
        terms = ws @ tau @ ws.conj().transpose(0, 2, 1)
        if marks:
            # cumulative sums in sample order, so checkpoints are exact prefixes
            cums = np.cumsum(terms, axis=0)
            for c in marks:
                if done < c <= done + m:
                    snaps.append((c, (acc + cums[c - done - 1]) / c))
            acc = acc + cums[-1]
        else:
            acc = acc + terms.sum(axis=0)
        done += m
    out = ChoiChannel(d, ch.output_dims, DenseOperator(acc / n_samples, ch.choi.spec))
    if checkpoints is None:
        return out
    return out, [(c, ChoiChannel(d, ch.output_dims, DenseOperator(m_, ch.choi.spec)))
                 for c, m_ in snaps]


def random_pure_state(d: int, rng=None) -> DenseOperator:
    rng = as_rng(rng)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return DenseOperator.ket(v / np.linalg.norm(v))


def covariance_residual(ch: ChoiChannel, n_samples: int, rng=None) -> float:
    """max ||T(U rho U^dag) - U T(rho) U^dag||_F over sampled unitaries and pure states."""
    if ch.n_outputs != 1 or ch.output_dims[0] != ch.input_dim:
        raise ValueError("covariance check needs a channel M_d -> M_d")
    rng = as_rng(rng)
    d = ch.input_dim
    worst = 0.0
    for u in haar_unitaries(d, n_samples, rng):
        rho = random_pure_state(d, rng)
        rotated = DenseOperator(u @ rho.mat @ u.conj().T)
        lhs = apply(ch, rotated).mat
        rhs = u @ apply(ch, rho).mat @ u.conj().T
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst


def random_channel(d: int, output_dims: Sequence[int] = None, rng=None,
                   env_dim: int | None = None) -> ChoiChannel:
    """Random CPTP map from a Haar-ish Stinespring isometry."""
    rng = as_rng(rng)
    output_dims = tuple(output_dims) if output_dims is not None else (d, d)
    d_out = int(np.prod(output_dims))
    k = env_dim or d * d_out
    g = rng.standard_normal((d_out * k, d)) + 1j * rng.standard_normal((d_out * k, d))
    iso, _ = np.linalg.qr(g)
    kraus = iso.reshape(d_out, k, d).transpose(1, 0, 2)

    def transform(x):
        return np.einsum("kab,bc,kdc->ad", kraus, x, kraus.conj())

    return choi_of(transform, d, output_dims)


def cloning_witness(ch: ChoiChannel, probes: Sequence[DenseOperator]) -> float:
    """max over probe states of ||T(rho) - rho x rho||_F; zero only for a perfect cloner."""
    if ch.n_outputs != 2:
        raise ValueError("cloning witness needs a two-output channel")
    worst = 0.0
    for rho in probes:
        target = np.kron(rho.mat, rho.mat)
        worst = max(worst, float(np.linalg.norm(apply(ch, rho).mat - target)))
    return worst
