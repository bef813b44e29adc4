"""Minimal dense complex-matrix layer.

Operators are plain complex ndarrays.  Dimensions in this package never
exceed 9 (3 x 3 tensor factors), so everything is dense and exact up to
float64 rounding; there is no sparse or arbitrary-precision path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NotHermitianError

HERMITICITY_TOL = 1e-10
DEFAULT_GROUP_TOL = 1e-9


def as_operator(entries) -> np.ndarray:
    """Coerce to a square, finite complex matrix."""
    a = np.asarray(entries, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"operator must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError("operator entries must be finite")
    return a


def max_abs(a) -> float:
    a = np.asarray(a)
    return 0.0 if a.size == 0 else float(np.abs(a).max())


def hermiticity_defect(a: np.ndarray) -> float:
    """Max-entry norm of A - A^dagger."""
    return max_abs(a - a.conj().T)


def require_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL, what: str = "operator") -> None:
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NotHermitianError(f"{what} is not Hermitian (defect {defect:.3e} > {tol:.1e})")


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; row index convention (i1*d2 + i2, j1*d2 + j2)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Grouped eigendecomposition of a Hermitian operator.

    ``eigenvalues`` are distinct after grouping and sorted descending;
    ``projectors[k]`` projects onto the eigenspace of ``eigenvalues[k]``.
    """

    eigenvalues: tuple[float, ...]
    projectors: tuple[np.ndarray, ...]

    def reconstruct(self) -> np.ndarray:
        dim = self.projectors[0].shape[0]
        out = np.zeros((dim, dim), dtype=complex)
        for lam, proj in zip(self.eigenvalues, self.projectors):
            out += lam * proj
        return out


def hermitian_eigendecomposition(
    a: np.ndarray, group_tol: float = DEFAULT_GROUP_TOL
) -> SpectralDecomposition:
    """Eigenvalues and eigenprojectors of a Hermitian matrix.

    Eigenvalues closer than ``group_tol`` (chained on adjacent gaps) are
    merged into a single eigenvalue -- their mean -- with the summed
    projector, so degenerate spectra come out with one projector per
    eigenspace instead of per eigenvector.
    """
    a = as_operator(a)
    require_hermitian(a)
    evals, evecs = np.linalg.eigh(a)
    # eigh returns ascending order; group on adjacent gaps, then flip.
    groups: list[list[int]] = [[0]]
    for i in range(1, len(evals)):
        if evals[i] - evals[groups[-1][-1]] <= group_tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    eigenvalues = []
    projectors = []
    for idx in reversed(groups):
        eigenvalues.append(float(np.mean(evals[idx])))
        vecs = evecs[:, idx]
        projectors.append(vecs @ vecs.conj().T)
    return SpectralDecomposition(tuple(eigenvalues), tuple(projectors))


def min_eigenvalue(a: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian matrix (no Hermiticity check)."""
    return float(np.linalg.eigvalsh(a)[0])


def is_positive_semidefinite(a: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    a = as_operator(a)
    require_hermitian(a, tol)
    return min_eigenvalue(a) >= -tol


# ---------------------------------------------------------------------------
# Wire format, shared with the CLI: a matrix is a row-major list of rows,
# each entry either a plain real or a 2-element [re, im] list.
# ---------------------------------------------------------------------------


def _entry_from_wire(entry) -> complex:
    if isinstance(entry, (int, float)) and not isinstance(entry, bool):
        return complex(entry, 0.0)
    if (
        isinstance(entry, (list, tuple))
        and len(entry) == 2
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
    ):
        return complex(entry[0], entry[1])
    raise ValueError(f"matrix entry must be a real or a [re, im] pair, got {entry!r}")


def matrix_from_wire(rows) -> np.ndarray:
    """Parse the shared matrix literal format into a square complex matrix."""
    if not isinstance(rows, list) or not rows:
        raise ValueError("matrix must be a non-empty list of rows")
    n = len(rows)
    out = np.zeros((n, n), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise ValueError(f"matrix row {i} must be a list of length {n}")
        for j, entry in enumerate(row):
            out[i, j] = _entry_from_wire(entry)
    return as_operator(out)


def matrix_to_wire(a: np.ndarray) -> list[list[list[float]]]:
    a = np.asarray(a, dtype=complex)
    return [[[float(x.real), float(x.imag)] for x in row] for row in a]


def vector_from_wire(entries) -> np.ndarray:
    if not isinstance(entries, list) or not entries:
        raise ValueError("vector must be a non-empty list of entries")
    return np.array([_entry_from_wire(e) for e in entries], dtype=complex)


def vector_to_wire(v: np.ndarray) -> list[list[float]]:
    return [[float(x.real), float(x.imag)] for x in np.asarray(v, dtype=complex)]
