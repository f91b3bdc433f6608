"""Sampling of the random MPS ensemble.

One draw is the tuple ``(U, V, W, lam, omega)``: ``U`` Haar on the unitary
group of size d*D, ``V, W`` Haar on size D, ``lam`` i.i.d. uniform on [0, 1],
``omega`` a point of the probability simplex.  The derived pieces are the
site tensors ``A_i`` (blocks of ``U``) and the boundary matrices
``L = V diag(lam) V^dag`` and ``R = W diag(omega) W^dag``.

Randomness is counter-based: :func:`stream` keys a Philox generator by
``(seed, index)``, so per-sample draws are reproducible bit for bit at any
worker count.  Indices at or above ``FIXED_DRAW_BASE`` are reserved for
held-fixed draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .persist import matrix_to_pairs, pairs_to_matrix, vector_to_list

_UINT64 = (1 << 64) - 1
FIXED_DRAW_BASE = 1 << 62
OMEGA_DISTS = ("dirichlet", "uniform-normalized")


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for one Monte Carlo sample."""
    return np.random.Generator(np.random.Philox(key=[seed & _UINT64, index & _UINT64]))


@dataclass(frozen=True)
class EnsembleParams:
    """Chain and sampling parameters: d physical, D bond, n sites, l window."""

    d: int
    D: int
    n: int
    l: int
    seed: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"need d >= 1, got {self.d}")
        if self.D < 1:
            raise ValueError(f"need D >= 1, got {self.D}")
        if self.n < 1:
            raise ValueError(f"need n >= 1, got {self.n}")
        if not 1 <= self.l <= self.n:
            raise ValueError(f"need 1 <= l <= n, got l={self.l}, n={self.n}")
        if (self.n - self.l) % 2 != 0:
            raise ValueError(
                f"centered window needs n - l even, got n={self.n}, l={self.l}"
            )


def haar_unitaries(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar unitaries of size ``dim``, shape ``(count, dim, dim)``.

    QR of a complex standard-Gaussian matrix with the R-diagonal phase fix,
    which makes the factorization unique and the law exactly Haar.
    """
    if dim < 1:
        raise ValueError(f"need dim >= 1, got {dim}")
    z = (
        rng.standard_normal((count, dim, dim))
        + 1j * rng.standard_normal((count, dim, dim))
    ) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phase = diag / np.abs(diag)
    return q * phase[:, None, :]


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return haar_unitaries(dim, 1, rng)[0]


def mps_tensors(u: np.ndarray, d: int, D: int) -> np.ndarray:
    """Site tensors from a unitary: ``A_i`` is the ``(i, 0)`` block of ``u``.

    Row blocks are indexed by the physical basis, so the first D columns of
    ``u`` stack the ``A_i`` and ``sum_i A_i^dag A_i = 1`` exactly: the traced
    map ``X -> sum_i A_i X A_i^dag`` is trace preserving.  Returns shape
    ``(d, D, D)``.
    """
    u = np.asarray(u)
    if u.shape != (d * D, d * D):
        raise ValueError(f"expected a {d * D}x{d * D} matrix, got {u.shape}")
    return np.stack([u[i * D:(i + 1) * D, :D] for i in range(d)])


def _sample_simplex(D: int, rng: np.random.Generator, omega_dist: str) -> np.ndarray:
    if omega_dist == "dirichlet":
        return rng.dirichlet(np.ones(D))
    if omega_dist == "uniform-normalized":
        u = rng.uniform(size=D)
        return u / u.sum()
    raise ValueError(f"omega_dist must be one of {OMEGA_DISTS}, got {omega_dist!r}")


def sample_boundaries(D: int, rng: np.random.Generator, omega_dist: str = "dirichlet"):
    """Draw the boundary pair: returns ``(L, R, lam, omega, V, W)``.

    ``lam`` is uniform on ``[0, 1]^D`` and ``omega`` permutation-invariant on
    the simplex (flat Dirichlet by default); ``V, W`` are independent Haar.
    """
    lam = rng.uniform(0.0, 1.0, size=D)
    v = haar_unitary(D, rng)
    omega = _sample_simplex(D, rng, omega_dist)
    w = haar_unitary(D, rng)
    l_mat = (v * lam) @ v.conj().T
    r_mat = (w * omega) @ w.conj().T
    return l_mat, r_mat, lam, omega, v, w


@dataclass
class MpsSample:
    """One ensemble draw plus its derived tensors and boundary matrices."""

    d: int
    D: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    lam: np.ndarray
    omega: np.ndarray
    tensors: np.ndarray  # (d, D, D)
    l_mat: np.ndarray
    r_mat: np.ndarray

    def to_json(self) -> dict:
        dim = self.d * self.D
        return {
            "d": self.d,
            "D": self.D,
            "u": matrix_to_pairs(self.u),
            "v": matrix_to_pairs(self.v),
            "w": matrix_to_pairs(self.w),
            "lam": vector_to_list(self.lam),
            "omega": vector_to_list(self.omega),
            "u_dim": dim,
        }

    @staticmethod
    def from_json(doc: dict) -> "MpsSample":
        d, D = int(doc["d"]), int(doc["D"])
        dim = d * D
        return assemble_sample(
            d,
            D,
            pairs_to_matrix(doc["u"], dim, dim),
            pairs_to_matrix(doc["v"], D, D),
            pairs_to_matrix(doc["w"], D, D),
            np.array(doc["lam"], dtype=float),
            np.array(doc["omega"], dtype=float),
        )


def assemble_sample(
    d: int,
    D: int,
    u: np.ndarray,
    v: np.ndarray,
    w: np.ndarray,
    lam: np.ndarray,
    omega: np.ndarray,
) -> MpsSample:
    """Build an :class:`MpsSample` from explicit ensemble coordinates."""
    return MpsSample(
        d=d,
        D=D,
        u=u,
        v=v,
        w=w,
        lam=np.asarray(lam, dtype=float),
        omega=np.asarray(omega, dtype=float),
        tensors=mps_tensors(u, d, D),
        l_mat=(v * lam) @ v.conj().T,
        r_mat=(w * omega) @ w.conj().T,
    )


def sample_mps(
    d: int,
    D: int,
    rng: np.random.Generator,
    omega_dist: str = "dirichlet",
    fixed_u: np.ndarray | None = None,
    fixed_omega: np.ndarray | None = None,
) -> MpsSample:
    """Draw one sample; ``fixed_u``/``fixed_omega`` hold those coordinates.

    Draw order is fixed (U, lam, V, omega, W); held coordinates are skipped,
    not drawn-and-discarded, so a run is deterministic for a given flag set.
    """
    u = fixed_u if fixed_u is not None else haar_unitary(d * D, rng)
    lam = rng.uniform(0.0, 1.0, size=D)
    v = haar_unitary(D, rng)
    omega = fixed_omega if fixed_omega is not None else _sample_simplex(D, rng, omega_dist)
    w = haar_unitary(D, rng)
    return assemble_sample(d, D, u, v, w, lam, omega)
