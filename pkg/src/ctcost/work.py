"""Work statistics of the two-time energy measurement protocol.

Energies are measured at ``t0`` and ``t1``; a run that finds level ``n``
first and level ``m`` afterwards does work ``E_m(t1) - E_n(t0)``. Levels are
eigenvalue groups, so degenerate subspaces never need a basis choice.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .counterdiabatic import CostReport, _occupied_top, level_populations, track_levels
from .errors import InvalidInputError

UNITARY_TOL = 1e-8
MERGE_TOL = 1e-10


@dataclass(frozen=True)
class WorkDistribution:
    """Distinct work values ``w`` with probabilities ``prob`` (sorted by ``w``)."""

    w: np.ndarray
    prob: np.ndarray
    duration: float

    def __post_init__(self):
        if np.any(self.prob < 0) or abs(self.prob.sum() - 1.0) > 1e-9:
            raise InvalidInputError("work probabilities must be >= 0 and sum to 1")

    @property
    def outcomes(self):
        return list(zip(self.w.tolist(), self.prob.tolist()))

    @property
    def mean(self):
        return float(np.dot(self.w, self.prob))

    def average(self, f):
        """``sum_w p(w) f(w)`` for a vectorized function ``f``."""
        return float(np.dot(self.prob, f(self.w)))


def _levels(schedule, t):
    """Embedded group projectors and energies of ``H(t)``, sector after sector."""
    dim = schedule.dim
    projs, energies, mult = [], [], []
    for idx, dec in schedule.decompose(t):
        for j in range(dec.n_groups):
            P = np.zeros((dim, dim), dtype=complex)
            P[np.ix_(idx, idx)] = dec.projector(j)
            projs.append(P)
            energies.append(dec.energies[j])
            mult.append(dec.multiplicities[j])
    return projs, np.array(energies), np.array(mult)


def _check_unitary(U, dim):
    U = np.asarray(U, dtype=complex)
    if U.shape != (dim, dim):
        raise InvalidInputError(f"propagator shape {U.shape} does not match dim {dim}")
    err = np.linalg.norm(U.conj().T @ U - np.eye(dim))
    if err > UNITARY_TOL:
        raise InvalidInputError(f"propagator is not unitary (||U^dagger U - 1|| = {err:.3e})")
    return U


def transition_matrix(schedule, U):
    """``T[m, n]`` = probability of ending in level ``m`` after starting in level ``n``.

    For a degenerate initial level the probability is averaged over the
    level, ``Tr[P_m(t1) U P_n(t0) U^dagger] / d_n``, so every column sums to one.
    """
    U = _check_unitary(U, schedule.dim)
    P0, _, d0 = _levels(schedule, schedule.t0)
    P1, _, _ = _levels(schedule, schedule.t1)
    T = np.empty((len(P1), len(P0)))
    for n, Pn in enumerate(P0):
        moved = U @ Pn @ U.conj().T
        for m, Pm in enumerate(P1):
            T[m, n] = np.einsum("ij,ji->", Pm, moved).real / d0[n]
    return np.clip(T, 0.0, 1.0)


def _merge(w, p, tol=MERGE_TOL):
    order = np.argsort(w, kind="stable")
    w, p = w[order], p[order]
    keep_w, keep_p = [], []
    for wi, pi in zip(w, p):
        if keep_w and wi - keep_w[-1] <= tol:
            keep_p[-1] += pi
        else:
            keep_w.append(wi)
            keep_p.append(pi)
    return np.array(keep_w), np.array(keep_p)


def work_distribution(schedule, initial, U):
    """Two-time measurement work distribution for propagator ``U``.

    The first measurement dephases the initial state, so only the level
    populations ``p_n = Tr[rho P_n(t0)]`` enter. Work values closer than
    ``1e-10`` are merged.
    """
    U = _check_unitary(U, schedule.dim)
    if initial.dim != schedule.dim:
        raise InvalidInputError(f"state dim {initial.dim} != schedule dim {schedule.dim}")
    P0, E0, _ = _levels(schedule, schedule.t0)
    P1, E1, _ = _levels(schedule, schedule.t1)
    rho = initial.rho()
    w, p = [], []
    for n, Pn in enumerate(P0):
        pn = initial.probability(Pn)
        if pn == 0.0:
            continue
        # state right after finding level n, then evolved
        moved = U @ (Pn @ rho @ Pn) @ U.conj().T
        for m, Pm in enumerate(P1):
            pmn = np.einsum("ij,ji->", Pm, moved).real
            if pmn > 0:
                w.append(E1[m] - E0[n])
                p.append(pmn)
    w, p = _merge(np.array(w), np.array(p))
    return WorkDistribution(w, p / p.sum(), schedule.duration)


def adiabatic_work(schedule, initial):
    """Mean work ``sum_n p_n [E_n(t1) - E_n(t0)]`` of a perfectly adiabatic sweep.

    Levels are continued by sorted index within each sector; this is the
    same tracking used by :func:`ctcost.counterdiabatic.cost_selected`.
    """
    pops = level_populations(schedule, initial)
    top = _occupied_top(pops)
    first, last = track_levels(schedule, [schedule.t0, schedule.t1], top)
    total = 0.0
    for p, (_, d0), (_, d1), k in zip(pops, first, last, top):
        total += float(np.dot(p[: k + 1], d1.energies[: k + 1] - d0.energies[: k + 1]))
    return total


def inner_friction(schedule, initial, U):
    """Excess mean work ``<W> - <W_ad>`` of the protocol generated by ``U``."""
    return work_distribution(schedule, initial, U).mean - adiabatic_work(schedule, initial)


@dataclass(frozen=True)
class Benefit:
    """Signed net gain of driving; positive means the field pays for itself."""

    value: float
    comparable: bool
    note: str = ""

    def __float__(self):
        return self.value


def driving_benefit(friction, cost: CostReport):
    """``friction - C`` where ``C`` already carries the prefactor ``nu``.

    For ``n != 1`` the cost is not an energy, and the comparison depends on
    how the field is physically produced; the result says so.
    """
    comparable = cost.n == 1
    note = "" if comparable else "units differ: comparison is setup-dependent"
    return Benefit(float(friction) - float(cost.total), comparable, note)
