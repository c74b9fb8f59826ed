"""Time-dependent schedules and fixed-step RK4 propagation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateCrossingError,
    IntegrationDivergedError,
    InvalidInputError,
)
from .operators import HBAR, QuantumState, as_hermitian, eigendecompose

FD_STEP = 1e-6
CROSSING_COUPLING_TOL = 1e-8


@dataclass(frozen=True)
class Schedule:
    """A Hamiltonian ``H(t)`` on ``[t0, t1]`` with its time derivative.

    ``sectors`` optionally lists index arrays that partition the basis into
    blocks left invariant by ``H(t)`` for all ``t`` (conserved symmetries).
    Spectral quantities are then computed block by block, which keeps
    eigenvectors from mixing across exact symmetry crossings.
    """

    hamiltonian: Callable[[float], np.ndarray]
    t0: float
    t1: float
    derivative: Optional[Callable[[float], np.ndarray]] = None
    sectors: Optional[Sequence[np.ndarray]] = None
    name: str = "schedule"

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise InvalidInputError(f"need t0 < t1, got [{self.t0}, {self.t1}]")

    @property
    def duration(self):
        return self.t1 - self.t0

    @property
    def dim(self):
        return self.hamiltonian(self.t0).shape[0]

    def H(self, t):
        return np.asarray(self.hamiltonian(t), dtype=complex)

    def dH(self, t):
        """Analytic derivative if supplied, else a central finite difference."""
        if self.derivative is not None:
            return np.asarray(self.derivative(t), dtype=complex)
        h = FD_STEP * self.duration
        return (self.H(t + h) - self.H(t - h)) / (2 * h)

    def grid(self, steps):
        return np.linspace(self.t0, self.t1, int(steps) + 1)

    def sector_list(self):
        if self.sectors is None:
            return [np.arange(self.dim)]
        return [np.asarray(s) for s in self.sectors]

    def decompose(self, t):
        """Per-sector spectral decompositions of ``H(t)``.

        Returns a list of ``(indices, SpectralDecomposition)``.
        """
        H = self.H(t)
        return [(idx, eigendecompose(H[np.ix_(idx, idx)])) for idx in self.sector_list()]


@dataclass(frozen=True)
class IntegratorConfig:
    steps: int = 4000
    method: str = "rk4"
    renormalize: bool = True

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 100:
            raise InvalidInputError(f"steps must be an integer >= 100, got {self.steps}")
        if self.method != "rk4":
            raise InvalidInputError(f"unknown integration method {self.method!r}")


@dataclass(frozen=True)
class Trajectory:
    """States sampled on the integrator grid.

    ``states`` has shape ``(n_times, dim)`` for pure states and
    ``(n_times, dim, dim)`` for density matrices. Iterating yields
    ``(t, QuantumState)`` pairs.
    """

    times: np.ndarray
    states: np.ndarray
    kind: str

    def __len__(self):
        return len(self.times)

    def __iter__(self):
        for t, s in zip(self.times, self.states):
            yield float(t), QuantumState(self.kind, s)

    def __getitem__(self, i):
        return float(self.times[i]), QuantumState(self.kind, self.states[i])

    @property
    def final(self):
        return self[-1][1]

    def densities(self):
        if self.kind == "density":
            return self.states
        return np.einsum("ti,tj->tij", self.states, self.states.conj())


def _total_hamiltonian(schedule, extra_field):
    if extra_field is None:
        return schedule.H

    def H(t):
        V = as_hermitian(extra_field(t), rtol=1e-10, name="extra field")
        return schedule.H(t) + V

    return H


def _rk4(rhs, y0, times, renorm=None):
    # overflow is detected below and reported as a divergence
    with np.errstate(over="ignore", invalid="ignore"):
        return _rk4_steps(rhs, y0, times, renorm)


def _rk4_steps(rhs, y0, times, renorm):
    out = np.empty((len(times),) + y0.shape, dtype=complex)
    out[0] = y = y0
    for i in range(len(times) - 1):
        t, h = times[i], times[i + 1] - times[i]
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegrationDivergedError(i + 1, times[i + 1])
        if renorm is not None:
            y = renorm(y)
        out[i + 1] = y
    return out


class _CachedHamiltonian:
    # RK4 evaluates t+h/2 twice and t+h is the next step's t
    def __init__(self, H):
        self._H = H
        self._cache = {}

    def __call__(self, t):
        Ht = self._cache.get(t)
        if Ht is None:
            if len(self._cache) > 4:
                self._cache.clear()
            Ht = self._cache[t] = self._H(t)
        return Ht


def evolve(schedule, initial, cfg=IntegratorConfig(), extra_field=None, hbar=HBAR, times=None):
    """Integrate the Schrodinger (or von Neumann) equation with fixed-step RK4.

    ``extra_field`` is an optional callable ``t -> Hermitian matrix`` added to
    the schedule's Hamiltonian, e.g. a counterdiabatic field. ``times``
    overrides the default uniform grid of ``cfg.steps`` steps.
    """
    if initial.dim != schedule.dim:
        raise InvalidInputError(f"state dim {initial.dim} != schedule dim {schedule.dim}")
    if times is None:
        times = schedule.grid(cfg.steps)
    H = _CachedHamiltonian(_total_hamiltonian(schedule, extra_field))
    c = -1j / hbar
    if initial.is_pure:
        def rhs(t, psi):
            return c * (H(t) @ psi)

        renorm = (lambda psi: psi / np.linalg.norm(psi)) if cfg.renormalize else None
    else:
        def rhs(t, rho):
            Hr = H(t) @ rho
            return c * (Hr - Hr.conj().T)

        def renorm(rho):
            rho = 0.5 * (rho + rho.conj().T)
            return rho / np.trace(rho).real

        if not cfg.renormalize:
            renorm = None
    states = _rk4(rhs, initial.data.astype(complex), times, renorm)
    return Trajectory(np.asarray(times, dtype=float), states, initial.kind)


def unitary(schedule, cfg=IntegratorConfig(), extra_field=None, hbar=HBAR):
    """Time-ordered propagator from ``t0`` to ``t1`` (identity propagated columnwise).

    RK4 is not norm-preserving; with ``cfg.renormalize`` the result is
    replaced by the nearest unitary matrix (polar factor), mirroring the
    state renormalization in :func:`evolve`.
    """
    H = _CachedHamiltonian(_total_hamiltonian(schedule, extra_field))
    c = -1j / hbar

    def rhs(t, U):
        return c * (H(t) @ U)

    U = np.eye(schedule.dim, dtype=complex)
    t = schedule.grid(cfg.steps)
    # only the endpoint is needed; avoid storing every step
    for i in range(len(t) - 1):
        h = t[i + 1] - t[i]
        k1 = rhs(t[i], U)
        k2 = rhs(t[i] + h / 2, U + h / 2 * k1)
        k3 = rhs(t[i] + h / 2, U + h / 2 * k2)
        k4 = rhs(t[i] + h, U + h * k3)
        U = U + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(U)):
            raise IntegrationDivergedError(i + 1, t[i + 1])
    if cfg.renormalize:
        W, _, Vh = np.linalg.svd(U)
        U = W @ Vh
    return U


def check_degenerate_couplings(dec, dH_eig, scale):
    """Raise if a degenerate group is split by the derivative (a true crossing).

    ``dH_eig`` is the derivative in the eigenbasis of ``dec``. Inside an exact
    symmetry degeneracy the derivative acts as a multiple of the identity.
    """
    tol = CROSSING_COUPLING_TOL * max(1.0, scale)
    for s, m in zip(dec.slices, dec.multiplicities):
        if m < 2:
            continue
        block = dH_eig[s, s]
        off = block - np.trace(block) / m * np.eye(m)
        if np.linalg.norm(off) > tol:
            raise DegenerateCrossingError(
                f"levels at E={dec.eigenvalues[s].mean():.6g} are degenerate "
                f"but coupled by dH/dt (|coupling|={np.linalg.norm(off):.3e})"
            )


def gap_weights(dec):
    """Matrix ``W[a, b] = 1 / (E_b - E_a)`` between different groups, 0 inside a group."""
    g = dec.group_of()
    E = dec.energies[g]
    diff = E[None, :] - E[:, None]
    same = g[:, None] == g[None, :]
    W = np.zeros_like(diff)
    W[~same] = 1.0 / diff[~same]
    return W


def projector_derivatives(schedule, t, decomp=None):
    """``dP_j/dt`` for every eigenvalue group of ``H(t)``.

    Uses first-order perturbation theory summed over groups, which is
    independent of the phase and basis choice inside each group.
    """
    if decomp is None:
        decomp = eigendecompose(schedule.H(t))
    dH = schedule.dH(t)
    V = decomp.eigenvectors
    D = V.conj().T @ dH @ V
    check_degenerate_couplings(decomp, D, np.linalg.norm(dH))
    K = D * gap_weights(decomp)  # K[m, j] = <m|dH|j> / (E_j - E_m)
    out = []
    for s in decomp.slices:
        # sum_m P_m dH P_j / (E_j - E_m) is column block j of K; add its adjoint
        X = np.zeros_like(K)
        X[:, s] = K[:, s]
        dP = V @ (X + X.conj().T) @ V.conj().T
        out.append(dP)
    return out
