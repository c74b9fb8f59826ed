"""Dense Hermitian operators, quantum states and spectral decompositions.

Everything here works on plain ``numpy`` complex arrays. Operators are not
wrapped in a class; :func:`as_hermitian` validates and returns the array.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, NumericalError

HBAR = 1.0

HERMITIAN_RTOL = 1e-12
DENSITY_TRACE_TOL = 1e-12
DENSITY_MIN_EIG = -1e-10


def as_hermitian(A, rtol=HERMITIAN_RTOL, name="operator"):
    """Return ``A`` as a complex square array, checking Hermiticity."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"{name} must be a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name} has non-finite entries")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if np.max(np.abs(A - A.conj().T), initial=0.0) > rtol * max(scale, 1e-300):
        raise InvalidInputError(f"{name} is not Hermitian")
    return A


def frobenius_norm(A):
    """Frobenius norm ``sqrt(Tr[A^dagger A])``."""
    A = np.asarray(A)
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("operator has non-finite entries")
    return float(np.sqrt(np.sum(np.abs(A) ** 2)))


def commutator(A, B):
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise InvalidInputError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return A @ B - B @ A


@dataclass(frozen=True)
class QuantumState:
    """A pure state vector or a density matrix.

    Use :meth:`pure` / :meth:`density` to build validated instances.
    """

    kind: str
    data: np.ndarray

    @classmethod
    def pure(cls, vector, tol=1e-12):
        v = np.asarray(vector, dtype=complex).ravel()
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("state vector has non-finite entries")
        if abs(np.linalg.norm(v) - 1.0) > tol:
            raise InvalidInputError("pure state must have unit norm")
        return cls("pure", v)

    @classmethod
    def density(cls, matrix, tol=DENSITY_TRACE_TOL):
        rho = as_hermitian(matrix, rtol=1e-10, name="density matrix")
        if abs(np.trace(rho).real - 1.0) > tol:
            raise InvalidInputError(f"density matrix trace {np.trace(rho).real!r} != 1")
        if np.linalg.eigvalsh(rho)[0] < DENSITY_MIN_EIG:
            raise InvalidInputError("density matrix is not positive semidefinite")
        return cls("density", rho)

    @property
    def dim(self):
        return self.data.shape[0]

    @property
    def is_pure(self):
        return self.kind == "pure"

    def rho(self):
        """Density matrix of the state (outer product for pure states)."""
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def probability(self, projector):
        """``Tr[rho P]`` clamped to ``[0, 1]``."""
        if self.is_pure:
            p = np.vdot(self.data, projector @ self.data).real
        else:
            p = np.einsum("ij,ji->", self.data, projector).real
        return float(min(max(p, 0.0), 1.0))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues grouped into degenerate eigenspaces.

    ``energies[j]`` is the (mean) eigenvalue of group ``j``; its eigenvectors
    are ``eigenvectors[:, slices[j]]``.
    """

    energies: np.ndarray
    multiplicities: np.ndarray
    eigenvectors: np.ndarray
    eigenvalues: np.ndarray
    degeneracy_tol: float
    slices: tuple = field(repr=False)

    @property
    def n_groups(self):
        return len(self.energies)

    def projector(self, j):
        V = self.eigenvectors[:, self.slices[j]]
        return V @ V.conj().T

    @property
    def projectors(self):
        return [self.projector(j) for j in range(self.n_groups)]

    @property
    def groups(self):
        """List of ``(energy, multiplicity, projector)`` triples."""
        return [
            (float(E), int(m), self.projector(j))
            for j, (E, m) in enumerate(zip(self.energies, self.multiplicities))
        ]

    def group_of(self):
        """Group index for every eigenvector column."""
        return np.repeat(np.arange(self.n_groups), self.multiplicities)


def default_degeneracy_tol(eigenvalues):
    spread = float(eigenvalues[-1] - eigenvalues[0]) if len(eigenvalues) else 0.0
    return 1e-9 * max(spread, 1e-300)


def group_eigenvalues(eigenvalues, tol):
    """Split sorted eigenvalues into chains whose neighbours differ by <= tol."""
    if len(eigenvalues) == 0:
        return []
    breaks = np.flatnonzero(np.diff(eigenvalues) > tol) + 1
    bounds = np.concatenate(([0], breaks, [len(eigenvalues)]))
    return [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


def eigendecompose(H, degeneracy_tol=None):
    """Diagonalize a Hermitian matrix and group degenerate eigenvalues.

    Groups are formed by transitive chaining, so ``a ~ b`` and ``b ~ c`` puts
    all three in one group even if ``|a - c| > degeneracy_tol``. The default
    tolerance is relative to the spectral width.
    """
    H = as_hermitian(H)
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(H)
        raise NumericalError(f"eigensolver failed (condition number {cond:.3e})") from exc
    tol = default_degeneracy_tol(w) if degeneracy_tol is None else float(degeneracy_tol)
    slices = group_eigenvalues(w, tol)
    energies = np.array([w[s].mean() for s in slices])
    mult = np.array([s.stop - s.start for s in slices])
    return SpectralDecomposition(energies, mult, V, w, tol, tuple(slices))


def thermal_state(H, beta):
    """Gibbs state ``exp(-beta H) / Z``; ``beta = np.inf`` gives the ground group."""
    beta = float(beta)
    if np.isnan(beta) or beta < 0:
        raise InvalidInputError(f"inverse temperature must be >= 0, got {beta}")
    dec = eigendecompose(H)
    if np.isinf(beta):
        weights = np.zeros(len(dec.eigenvalues))
        weights[dec.slices[0]] = 1.0
    else:
        # shift by the ground energy so exp() cannot overflow
        weights = np.exp(-beta * (dec.eigenvalues - dec.eigenvalues[0]))
    weights /= weights.sum()
    V = dec.eigenvectors
    rho = (V * weights) @ V.conj().T
    return QuantumState("density", 0.5 * (rho + rho.conj().T))


def expectation_and_variance(state, A):
    """Return ``(<A>, Var A)``; tiny negative variances are clamped to zero."""
    A = np.asarray(A, dtype=complex)
    if A.shape != (state.dim, state.dim):
        raise InvalidInputError(f"dimension mismatch: {A.shape} vs state dim {state.dim}")
    if state.is_pure:
        Av = A @ state.data
        mean = np.vdot(state.data, Av).real
        second = np.vdot(Av, Av).real
    else:
        rho = state.data
        mean = np.einsum("ij,ji->", rho, A).real
        second = np.einsum("ij,ji->", rho, A @ A).real
    var = second - mean**2
    if var < -1e-12 * max(1.0, abs(second)):
        raise NumericalError(f"negative variance {var}")
    return float(mean), float(max(var, 0.0))


def random_hermitian(dim, rng):
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (X + X.conj().T)


def random_unitary(dim, rng):
    """Unitary built from the eigenvectors of a random Hermitian matrix."""
    return eigendecompose(random_hermitian(dim, rng)).eigenvectors
