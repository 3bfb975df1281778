"""Dense operators on tensor products of small Hilbert spaces.

Factor indices are 0-based; factor 0 is the reference system of a Choi
state, factors 1 and 2 are the clones.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

__all__ = [
    "HilbertSpec",
    "DenseOperator",
    "Permutation3",
    "tensor",
    "partial_trace",
    "partial_transpose",
    "perm_operator",
    "flip",
    "max_entangled",
    "eigh",
    "haar_unitary",
    "haar_unitaries",
    "as_rng",
]

HERMITIAN_TOL = 1e-10


def as_rng(rng=None) -> np.random.Generator:
    """Coerce a seed, ``None`` or a Generator into a ``numpy.random.Generator``."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class HilbertSpec:
    local_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(x) for x in self.local_dims)
        if not dims or any(x < 1 for x in dims):
            raise ValueError(f"local dimensions must be positive integers, got {self.local_dims}")
        object.__setattr__(self, "local_dims", dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.local_dims))

    @property
    def n_factors(self) -> int:
        return len(self.local_dims)


class DenseOperator:
    """Square complex matrix together with its tensor-factor structure.

    The matrix is copied on construction and marked read-only, so values can be
    shared freely.
    """

    __slots__ = ("spec", "mat")

    def __init__(self, mat, dims: Sequence[int] | HilbertSpec | None = None):
        mat = np.array(mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator must be a square matrix, got shape {mat.shape}")
        if dims is None:
            dims = (mat.shape[0],)
        spec = dims if isinstance(dims, HilbertSpec) else HilbertSpec(tuple(dims))
        if spec.total_dim != mat.shape[0]:
            raise ValueError(f"dims {spec.local_dims} do not match matrix side {mat.shape[0]}")
        mat.setflags(write=False)
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "mat", mat)

    def __setattr__(self, name, value):
        raise AttributeError("DenseOperator is immutable")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.spec.local_dims

    @property
    def dim(self) -> int:
        return self.spec.total_dim

    def __repr__(self):
        return f"DenseOperator(dims={self.dims})"

    def __matmul__(self, other: "DenseOperator") -> "DenseOperator":
        _check_same_dims(self, other)
        return DenseOperator(self.mat @ other.mat, self.spec)

    def __add__(self, other: "DenseOperator") -> "DenseOperator":
        _check_same_dims(self, other)
        return DenseOperator(self.mat + other.mat, self.spec)

    def __sub__(self, other: "DenseOperator") -> "DenseOperator":
        _check_same_dims(self, other)
        return DenseOperator(self.mat - other.mat, self.spec)

    def __mul__(self, scalar) -> "DenseOperator":
        return DenseOperator(scalar * self.mat, self.spec)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "DenseOperator":
        return DenseOperator(self.mat / scalar, self.spec)

    def dag(self) -> "DenseOperator":
        return DenseOperator(self.mat.conj().T, self.spec)

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self.mat))

    def hermiticity_error(self) -> float:
        return float(np.abs(self.mat - self.mat.conj().T).max())

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.hermiticity_error() <= tol

    def is_density(self, tol: float = 1e-12, eig_tol: float = 1e-10) -> bool:
        if not self.is_hermitian(tol):
            return False
        if abs(self.trace() - 1) > tol:
            return False
        return float(np.linalg.eigvalsh(self.mat).min()) >= -eig_tol

    def allclose(self, other: "DenseOperator", atol: float = 1e-12) -> bool:
        return self.dims == other.dims and bool(np.abs(self.mat - other.mat).max() <= atol)

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "DenseOperator":
        spec = HilbertSpec(tuple(dims))
        return cls(np.eye(spec.total_dim), spec)

    @classmethod
    def ket(cls, vec, dims: Sequence[int] | None = None) -> "DenseOperator":
        """Projector |v><v| (unnormalized if ``vec`` is)."""
        v = np.asarray(vec, dtype=complex).reshape(-1)
        return cls(np.outer(v, v.conj()), dims if dims is not None else (v.size,))


def _check_same_dims(a: DenseOperator, b: DenseOperator):
    if a.dims != b.dims:
        raise ValueError(f"factor structures differ: {a.dims} vs {b.dims}")


def _check_factor(op: DenseOperator, k: int):
    if not 0 <= k < op.spec.n_factors:
        raise IndexError(f"factor index {k} out of range for {op.spec.n_factors} factors")


def tensor(*ops: DenseOperator) -> DenseOperator:
    """Kronecker product; factor lists are concatenated in argument order."""
    if not ops:
        raise ValueError("tensor() needs at least one operator")
    mat = reduce(np.kron, (op.mat for op in ops))
    dims = tuple(itertools.chain.from_iterable(op.dims for op in ops))
    return DenseOperator(mat, dims)


def partial_trace(op: DenseOperator, keep) -> DenseOperator:
    """Trace out every factor not listed in ``keep``."""
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one factor")
    for k in keep:
        _check_factor(op, k)
    dims = op.dims
    n = len(dims)
    t = op.mat.reshape(dims + dims)
    # einsum letters: ket indices 0..n-1, bra indices n..2n-1; traced factors share a letter
    letters = [chr(ord("a") + i) for i in range(2 * n)]
    ket = letters[:n]
    bra = [letters[n + i] if i in keep else letters[i] for i in range(n)]
    out = [ket[i] for i in keep] + [bra[i] for i in keep]
    sub = "".join(ket) + "".join(bra) + "->" + "".join(out)
    kd = tuple(dims[i] for i in keep)
    side = int(np.prod(kd))
    return DenseOperator(np.einsum(sub, t).reshape(side, side), kd)


def partial_transpose(op: DenseOperator, factor: int) -> DenseOperator:
    _check_factor(op, factor)
    dims = op.dims
    n = len(dims)
    axes = list(range(2 * n))
    axes[factor], axes[n + factor] = axes[n + factor], axes[factor]
    t = op.mat.reshape(dims + dims).transpose(axes)
    return DenseOperator(t.reshape(op.dim, op.dim), dims)


@dataclass(frozen=True)
class Permutation3:
    """Bijection of {0, 1, 2}; ``mapping[i]`` is the image of ``i``.

    Composition follows function composition: ``(p * q)(i) == p(q(i))``.
    """

    mapping: tuple[int, int, int]

    def __post_init__(self):
        m = tuple(int(x) for x in self.mapping)
        if sorted(m) != [0, 1, 2]:
            raise ValueError(f"{self.mapping} is not a permutation of (0, 1, 2)")
        object.__setattr__(self, "mapping", m)

    def __call__(self, i: int) -> int:
        return self.mapping[i]

    def __mul__(self, other: "Permutation3") -> "Permutation3":
        return Permutation3(tuple(self.mapping[other.mapping[i]] for i in range(3)))

    def inverse(self) -> "Permutation3":
        inv = [0, 0, 0]
        for i, p in enumerate(self.mapping):
            inv[p] = i
        return Permutation3(tuple(inv))

    def n_cycles(self) -> int:
        seen, count = set(), 0
        for start in range(3):
            if start in seen:
                continue
            count += 1
            i = start
            while i not in seen:
                seen.add(i)
                i = self.mapping[i]
        return count

    @classmethod
    def identity(cls) -> "Permutation3":
        return cls((0, 1, 2))

    @classmethod
    def cycle(cls, *elems: int) -> "Permutation3":
        """Build from cycle notation, e.g. ``cycle(0, 1, 2)`` sends 0->1->2->0."""
        m = [0, 1, 2]
        for a, b in zip(elems, elems[1:] + elems[:1]):
            m[a] = b
        return cls(tuple(m))

    @classmethod
    def all(cls) -> list["Permutation3"]:
        return [cls(p) for p in itertools.permutations(range(3))]


def perm_operator(pi: Permutation3, d: int) -> DenseOperator:
    """V_pi on (C^d)^{x3}: the vector in slot i is moved to slot pi(i)."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    inv = pi.inverse().mapping
    D = d**3
    idx = np.arange(D)
    digits = np.stack(np.unravel_index(idx, (d, d, d)))
    out_digits = digits[list(inv)]
    rows = np.ravel_multi_index(tuple(out_digits), (d, d, d))
    mat = np.zeros((D, D))
    mat[rows, idx] = 1.0
    return DenseOperator(mat, (d, d, d))


def flip(d: int) -> DenseOperator:
    """Swap operator sum_ij |ji><ij| on C^d x C^d."""
    mat = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            mat[j * d + i, i * d + j] = 1.0
    return DenseOperator(mat, (d, d))


def max_entangled(d: int) -> DenseOperator:
    """|Omega><Omega| with |Omega> = d^{-1/2} sum_i |ii>."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    v = np.eye(d).reshape(-1) / np.sqrt(d)
    return DenseOperator.ket(v, (d, d))


def eigh(op: DenseOperator, tol: float = HERMITIAN_TOL):
    """Eigenvalues in descending order and the matching unitary of eigenvectors."""
    err = op.hermiticity_error()
    if err > tol:
        raise ValueError(f"operator is not hermitian (max |A - A^dag| = {err:.3e})")
    h = 0.5 * (op.mat + op.mat.conj().T)
    w, v = np.linalg.eigh(h)
    return w[::-1].copy(), v[:, ::-1].copy()


def haar_unitaries(d: int, n: int, rng=None) -> np.ndarray:
    """``n`` Haar-distributed d x d unitaries, shape (n, d, d).

    QR of a complex Ginibre matrix, with the phases of R's diagonal moved
    into Q so that the distribution is exactly Haar.
    """
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    rng = as_rng(rng)
    z = (rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    phases = diag / np.abs(diag)
    return q * phases[:, None, :]


def haar_unitary(d: int, rng=None) -> DenseOperator:
    return DenseOperator(haar_unitaries(d, 1, rng)[0], (d,))
