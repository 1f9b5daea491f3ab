"""Dense complex linear algebra kernels.

The matrix exponential is a degree-13 Padé approximant with scaling and
squaring (Higham, 2005).  Every routine accepts a single ``(d, d)`` matrix or
a stack ``(..., d, d)``; stacks are processed in one vectorized pass, which is
how the gradient code evaluates many exponentials per objective call.
"""

from __future__ import annotations

import numpy as np

# b_k for the [13/13] approximant
_PADE13 = np.array(
    [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ]
)
# largest 1-norm for which the unscaled [13/13] approximant is accurate to
# double precision
THETA_13 = 5.371920351148152


def _as_square(A, name: str = "A") -> np.ndarray:
    A = np.asarray(A)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if A.shape[-1] == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A.astype(np.complex128, copy=False)


def maxnorm(A) -> float:
    """Entrywise max-norm, the norm used for every tolerance in this package."""
    A = np.asarray(A)
    return float(np.max(np.abs(A))) if A.size else 0.0


def _scaling_exponents(A: np.ndarray) -> np.ndarray:
    norms = np.abs(A).sum(axis=-2).max(axis=-1)
    s = np.zeros(norms.shape, dtype=int)
    big = norms > THETA_13
    if np.any(big):
        s[big] = np.ceil(np.log2(norms[big] / THETA_13)).astype(int)
    return np.maximum(s, 0)


def _pade13(A: np.ndarray) -> np.ndarray:
    b = _PADE13
    eye = np.broadcast_to(np.eye(A.shape[-1], dtype=A.dtype), A.shape)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A2 @ A4
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * eye)
    V = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * eye
    return np.linalg.solve(V - U, V + U)


def expm(A) -> np.ndarray:
    """Matrix exponential of a square matrix or a stack of them.

    Each matrix is scaled by ``2**-s`` so its 1-norm is at most ``THETA_13``,
    exponentiated with the [13/13] Padé approximant, then squared ``s`` times.
    Raises ``ValueError`` for non-square or non-finite input.
    """
    A = _as_square(A)
    s = _scaling_exponents(A)
    if A.ndim == 2:
        F = _pade13(A / 2.0 ** int(s))
        for _ in range(int(s)):
            F = F @ F
        return F
    scale = (2.0 ** -s.astype(float))[..., None, None]
    F = _pade13(A * scale)
    smax = int(s.max()) if s.size else 0
    for k in range(smax):
        need = (s > k)[..., None, None]
        F = np.where(need, F @ F, F)
    return F


def expm_frechet(A, E, *, return_expm: bool = False):
    """Fréchet derivative ``L(A, E) = d/dt exp(A + tE)`` at ``t = 0``.

    Computed as the top-right block of ``exp([[A, E], [0, A]])``.  With
    ``return_expm`` the top-left block, ``exp(A)``, is returned as well.
    """
    A = _as_square(A)
    E = _as_square(E, "E")
    if A.shape[-1] != E.shape[-1]:
        raise ValueError(f"dimension mismatch: {A.shape} vs {E.shape}")
    A, E = np.broadcast_arrays(A, E)
    d = A.shape[-1]
    big = np.zeros(A.shape[:-2] + (2 * d, 2 * d), dtype=np.complex128)
    big[..., :d, :d] = A
    big[..., :d, d:] = E
    big[..., d:, d:] = A
    X = expm(big)
    L = X[..., :d, d:]
    if return_expm:
        return X[..., :d, :d], L
    return L


def kron(A, B) -> np.ndarray:
    """Kronecker product; ``out[i*dB + k, j*dB + l] = A[i, j] * B[k, l]``."""
    A = _as_square(A)
    B = _as_square(B, "B")
    return np.kron(A, B)


def kron_all(*mats) -> np.ndarray:
    out = np.eye(1, dtype=np.complex128)
    for M in mats:
        out = np.kron(out, M)
    return out


def is_unitary(U, tol: float = 1e-10) -> bool:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    return maxnorm(U @ U.conj().T - np.eye(U.shape[0])) <= tol


def is_hermitian(H, tol: float = 1e-12) -> bool:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        return False
    return maxnorm(H - H.conj().T) <= tol
