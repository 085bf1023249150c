"""Hermitian matrix primitives with a deterministic eigensolver.

Everything downstream (functional calculus, spectral projections, ranks,
operator norms) routes through one cyclic complex Jacobi eigendecomposition
with a fixed sweep order, so results are bit-reproducible across runs and
thread counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DomainError, JacobiConvergenceError, ValidationError

DEFAULT_HERMITICITY_TOL = 1e-12
DEFAULT_RANK_TOL = 1e-8


def as_complex_matrix(data, *, name: str = "matrix") -> np.ndarray:
    """Validate and return a finite complex128 2-d array."""
    m = np.asarray(data, dtype=np.complex128)
    if m.ndim != 2:
        raise ValidationError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if m.size and not (np.all(np.isfinite(m.real)) and np.all(np.isfinite(m.imag))):
        raise ValidationError(f"{name} has non-finite entries")
    return m


def fro_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m)) if m.size else 0.0


def re_part(m: np.ndarray) -> np.ndarray:
    """Operator real part (M + M*)/2."""
    return 0.5 * (m + m.conj().T)


def im_part(m: np.ndarray) -> np.ndarray:
    """Operator imaginary part (M - M*)/(2i)."""
    return (m - m.conj().T) / 2j


class HermitianMatrix:
    """A validated Hermitian matrix; stores the exactly symmetrized entries."""

    __slots__ = ("_mat", "_decomp")

    def __init__(self, entries, hermiticity_tol: float = DEFAULT_HERMITICITY_TOL):
        m = as_complex_matrix(entries, name="hermitian matrix")
        if m.shape[0] != m.shape[1]:
            raise ValidationError(f"hermitian matrix must be square, got shape {m.shape}")
        if m.size:
            defect = float(np.max(np.abs(m - m.conj().T)))
            if defect > hermiticity_tol:
                raise ValidationError(
                    f"matrix is not Hermitian: max |H - H*| = {defect:.3e} > {hermiticity_tol:.1e}"
                )
        sym = 0.5 * (m + m.conj().T)
        sym.setflags(write=False)
        self._mat = sym
        self._decomp: SpectralDecomposition | None = None

    @classmethod
    def diagonal(cls, values: Iterable[float]) -> "HermitianMatrix":
        return cls(np.diag(np.asarray(list(values), dtype=np.complex128)))

    @property
    def mat(self) -> np.ndarray:
        return self._mat

    @property
    def dim(self) -> int:
        return self._mat.shape[0]

    @property
    def decomposition(self) -> "SpectralDecomposition":
        if self._decomp is None:
            self._decomp = eigh(self)
        return self._decomp

    def __eq__(self, other) -> bool:
        return isinstance(other, HermitianMatrix) and np.array_equal(self._mat, other._mat)

    def __repr__(self) -> str:
        return f"HermitianMatrix(dim={self.dim})"


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues ascending with a matching unitary of eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eigh(h: HermitianMatrix, max_sweeps: int = 100) -> SpectralDecomposition:
    """Cyclic complex Jacobi eigendecomposition, row-major sweep order.

    Deterministic by construction; raises JacobiConvergenceError with the
    residual off-diagonal norm if the sweep budget is exhausted.
    """
    a = np.array(h.mat, dtype=np.complex128, copy=True)
    n = a.shape[0]
    u = np.eye(n, dtype=np.complex128)
    if n <= 1:
        vals = a.real.diagonal().astype(np.float64).copy() if n else np.zeros(0)
        return SpectralDecomposition(vals, u)

    scale = fro_norm(a)
    if scale == 0.0:
        return SpectralDecomposition(np.zeros(n), u)
    stop = np.finfo(np.float64).eps * scale

    def off_norm() -> float:
        d = a.copy()
        np.fill_diagonal(d, 0.0)
        return fro_norm(d)

    converged = False
    for _ in range(max_sweeps):
        if off_norm() <= stop:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                w = apq / mag
                wbar = w.conjugate()
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                sign = 1.0 if tau >= 0.0 else -1.0
                t = sign / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - (s * wbar) * cq
                a[:, q] = s * cp + (c * wbar) * cq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - (s * w) * rq
                a[q, :] = s * rp + (c * w) * rq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                up = u[:, p].copy()
                uq = u[:, q].copy()
                u[:, p] = c * up - (s * wbar) * uq
                u[:, q] = s * up + (c * wbar) * uq
    else:
        converged = off_norm() <= stop

    if not converged:
        res = off_norm()
        raise JacobiConvergenceError(
            f"Jacobi sweep budget {max_sweeps} exhausted, off-diagonal norm {res:.3e}", res
        )

    vals = a.real.diagonal().astype(np.float64).copy()
    order = np.argsort(vals, kind="stable")
    return SpectralDecomposition(vals[order], u[:, order])


def matrix_function(h: HermitianMatrix, f: Callable[[float], complex]) -> np.ndarray:
    """Apply a scalar function through the eigendecomposition."""
    d = h.decomposition
    out = np.empty(h.dim, dtype=np.complex128)
    for k, lam in enumerate(d.eigenvalues):
        try:
            v = complex(f(float(lam)))
        except (ArithmeticError, ValueError) as exc:
            raise DomainError(f"scalar function failed at eigenvalue {lam!r}: {exc}") from exc
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise DomainError(f"scalar function is not finite at eigenvalue {lam!r}")
        out[k] = v
    u = d.eigenvectors
    return (u * out) @ u.conj().T


def spectral_projection(h: HermitianMatrix, delta) -> HermitianMatrix:
    """Orthogonal projection onto eigenspaces with eigenvalue in delta."""
    d = h.decomposition
    sel = [k for k, lam in enumerate(d.eigenvalues) if delta.contains(float(lam))]
    if not sel:
        return HermitianMatrix(np.zeros((h.dim, h.dim), dtype=np.complex128))
    cols = d.eigenvectors[:, sel]
    return HermitianMatrix(cols @ cols.conj().T, hermiticity_tol=1e-10)


def singular_values(m: np.ndarray) -> np.ndarray:
    """Descending singular values via the Hermitian dilation [[0, M], [M*, 0]]."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise ValidationError(f"expected a 2-d array, got shape {m.shape}")
    r, c = m.shape
    k = min(r, c)
    if k == 0 or not m.any():
        return np.zeros(k)
    dil = np.zeros((r + c, r + c), dtype=np.complex128)
    dil[:r, r:] = m
    dil[r:, :r] = m.conj().T
    vals = eigh(HermitianMatrix(dil)).eigenvalues
    # eigenvalues of the dilation are +-sigma_i plus |r - c| zeros
    return np.sort(np.abs(vals))[::-1][::2][:k].copy()


def rank_eps(m: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> int:
    """Count singular values above tol times the largest one."""
    if not (isinstance(tol, float) or isinstance(tol, int)) or not 0.0 < tol < 1.0:
        raise ValidationError(f"rank tolerance must lie in (0, 1), got {tol!r}")
    s = singular_values(np.asarray(m, dtype=np.complex128))
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def op_norm(m: np.ndarray) -> float:
    """Largest singular value, from the Gram matrix of the shorter side."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise ValidationError(f"expected a 2-d array, got shape {m.shape}")
    r, c = m.shape
    if min(r, c) == 0 or not m.any():
        return 0.0
    gram = m @ m.conj().T if r <= c else m.conj().T @ m
    top = float(eigh(HermitianMatrix(gram)).eigenvalues[-1])
    return math.sqrt(max(top, 0.0))


def min_eigenvalue(h: HermitianMatrix) -> float:
    d = h.decomposition
    return float(d.eigenvalues[0]) if d.eigenvalues.size else math.inf


def matrix_to_json(m: np.ndarray) -> dict:
    """Row-major [re, im] pairs; square matrices use the key "dim"."""
    m = np.asarray(m, dtype=np.complex128)
    entries = [[float(v.real), float(v.imag)] for v in m.reshape(-1)]
    r, c = m.shape
    if r == c:
        return {"dim": r, "entries": entries}
    return {"rows": r, "cols": c, "entries": entries}


def matrix_from_json(obj, *, name: str = "matrix") -> np.ndarray:
    if not isinstance(obj, dict):
        raise ValidationError(f"{name} must be an object with matrix entries")
    if "dim" in obj:
        extra = set(obj) - {"dim", "entries"}
        r = c = obj["dim"]
    else:
        extra = set(obj) - {"rows", "cols", "entries"}
        r, c = obj.get("rows"), obj.get("cols")
    if extra:
        raise ValidationError(f"unknown keys in {name}: {sorted(extra)}")
    if not isinstance(r, int) or not isinstance(c, int) or r < 0 or c < 0:
        raise ValidationError(f"{name} needs integer dimensions")
    raw = obj.get("entries")
    if not isinstance(raw, list) or len(raw) != r * c:
        raise ValidationError(f"{name} needs {r * c} entries, got {len(raw) if isinstance(raw, list) else 'none'}")
    flat = np.empty(r * c, dtype=np.complex128)
    for k, e in enumerate(raw):
        if isinstance(e, (int, float)) and not isinstance(e, bool):
            flat[k] = complex(e)
        elif isinstance(e, list) and len(e) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in e):
            flat[k] = complex(e[0], e[1])
        else:
            raise ValidationError(f"{name} entry {k} must be a number or an [re, im] pair")
    return as_complex_matrix(flat.reshape(r, c), name=name)


def hermitian_from_json(obj, *, name: str = "matrix") -> HermitianMatrix:
    return HermitianMatrix(matrix_from_json(obj, name=name))
