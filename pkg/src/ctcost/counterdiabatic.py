"""Counterdiabatic fields and their energetic cost.

The full (transitionless) field keeps every instantaneous eigenspace
transitionless; the selected field for level ``j`` only protects that level.
Both are computed from eigenspace projectors, so no eigenvector phase
convention is ever needed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCrossingError, InvalidInputError
from .operators import HBAR, QuantumState, eigendecompose, frobenius_norm
from .propagation import (
    IntegratorConfig,
    Trajectory,
    check_degenerate_couplings,
    evolve,
    gap_weights,
)


@dataclass(frozen=True)
class CostReport:
    """Integrated cost with the instantaneous integrand on the time grid."""

    total: float
    n: int
    nu: float
    times: np.ndarray
    values: np.ndarray
    label: str = ""

    @property
    def samples(self):
        return list(zip(self.times.tolist(), self.values.tolist()))

    @property
    def tau(self):
        """Times rescaled to ``[0, 1]``."""
        return (self.times - self.times[0]) / (self.times[-1] - self.times[0])


def _report(times, values, n, nu, label):
    values = np.asarray(values, dtype=float)
    return CostReport(float(np.trapezoid(values, times)), n, nu, np.asarray(times), values, label)


def _sector_kernels(schedule, t, hbar):
    """Yield ``(indices, decomposition, V, K)`` per sector.

    The full field restricted to the sector is ``i hbar V K V^dagger``.

    ``K[m, j] = <m|dH|j> / (E_j - E_m)`` in the sector eigenbasis.
    """
    H = schedule.H(t)
    dH = schedule.dH(t)
    scale = np.linalg.norm(dH)
    for idx in schedule.sector_list():
        sub = np.ix_(idx, idx)
        dec = eigendecompose(H[sub])
        V = dec.eigenvectors
        D = V.conj().T @ dH[sub] @ V
        check_degenerate_couplings(dec, D, scale)
        yield idx, dec, V, D * gap_weights(dec)


def cd_full(schedule, t, hbar=HBAR):
    """Transitionless field ``i hbar sum_j (dP_j/dt) P_j`` at time ``t``."""
    dim = schedule.dim
    out = np.zeros((dim, dim), dtype=complex)
    for idx, _, V, K in _sector_kernels(schedule, t, hbar):
        out[np.ix_(idx, idx)] = 1j * hbar * (V @ K @ V.conj().T)
    return 0.5 * (out + out.conj().T)


def _level_index(schedule, t, level):
    """Map a flat level index to ``(sector, group)`` counting sector by sector."""
    if level < 0:
        raise InvalidInputError(f"level index must be >= 0, got {level}")
    offset = 0
    for s, (idx, dec) in enumerate(schedule.decompose(t)):
        if level < offset + dec.n_groups:
            return s, level - offset
        offset += dec.n_groups
    raise InvalidInputError(f"level index {level} out of range ({offset} levels)")


def _selected_from_kernel(V, K, sl, hbar):
    X = np.zeros_like(K)
    X[:, sl] = K[:, sl]
    X[sl, :] = K[sl, :]
    return 1j * hbar * (V @ X @ V.conj().T)


def cd_selected(schedule, t, level, hbar=HBAR):
    """Selected field ``i hbar [dP_j/dt, P_j]`` for one eigenvalue group.

    ``level`` counts groups in increasing energy, sector after sector (a
    schedule without sectors has a single sector).
    """
    s, j = _level_index(schedule, t, level)
    dim = schedule.dim
    out = np.zeros((dim, dim), dtype=complex)
    for k, (idx, dec, V, K) in enumerate(_sector_kernels(schedule, t, hbar)):
        if k == s:
            field = _selected_from_kernel(V, K, dec.slices[j], hbar)
            out[np.ix_(idx, idx)] = field
    return 0.5 * (out + out.conj().T)


def _field_norms(schedule, t, hbar):
    """Full-field norm and the selected-field norm of every group, per sector."""
    total_sq = 0.0
    selected = []
    for idx, dec, V, K in _sector_kernels(schedule, t, hbar):
        A = np.abs(K) ** 2
        total_sq += A.sum()
        # K is anti-Hermitian up to sign: row block j mirrors column block j
        col = A.sum(axis=0)
        selected.append(np.array([hbar * np.sqrt(2 * col[s].sum()) for s in dec.slices]))
    return hbar * np.sqrt(total_sq), selected


def transitionless_norms(schedule, times, hbar=HBAR):
    """Frobenius norm of the transitionless field at each of ``times``."""
    return np.array([_field_norms(schedule, t, hbar)[0] for t in times])


def cost_transitionless(schedule, n=1, nu=1.0, grid=IntegratorConfig(), hbar=HBAR, norms=None):
    """``nu * integral ||H_t||^n dt`` by the trapezoidal rule on the integrator grid.

    ``norms`` may pass precomputed :func:`transitionless_norms` on that grid,
    so several exponents can share one pass over the spectrum.
    """
    _check_exponent(n)
    times = schedule.grid(grid.steps)
    if norms is None:
        norms = transitionless_norms(schedule, times, hbar)
    elif len(norms) != len(times):
        raise InvalidInputError("precomputed norms do not match the grid")
    return _report(times, nu * np.asarray(norms) ** n, n, nu, "transitionless")


def _check_exponent(n):
    if int(n) != n or n < 1:
        raise InvalidInputError(f"norm exponent must be an integer >= 1, got {n}")


def level_populations(schedule, state, tol=1e-8):
    """Occupations ``Tr[rho P_j(t0)]`` per sector and group.

    Raises if the state has coherences between different levels at ``t0``.
    """
    rho = state.rho()
    decs = schedule.decompose(schedule.t0)
    dephased = np.zeros_like(rho)
    pops = []
    for idx, dec in decs:
        p = []
        for j in range(dec.n_groups):
            P = np.zeros_like(rho)
            P[np.ix_(idx, idx)] = dec.projector(j)
            dephased += P @ rho @ P
            p.append(state.probability(P))
        pops.append(np.array(p))
    if np.linalg.norm(rho - dephased) > tol:
        raise InvalidInputError(
            "initial state is not diagonal in the energy eigenbasis at t0"
        )
    return pops


def track_levels(schedule, times, occupied=None):
    """Follow eigenvalue groups along ``times`` by sorted index within each sector.

    ``occupied[s]`` is the highest group index in sector ``s`` that must be
    followed; by default all groups. A change in the multiplicity pattern of
    the followed groups means a genuine level crossing and raises.
    Returns ``decs[i][s] = (indices, SpectralDecomposition)`` for time ``times[i]``.
    """
    out = []
    ref = None
    for t in times:
        decs = schedule.decompose(t)
        if ref is None:
            ref = [dec.multiplicities.copy() for _, dec in decs]
            if occupied is None:
                occupied = [len(m) - 1 for m in ref]
        for s, (_, dec) in enumerate(decs):
            top = occupied[s] + 1
            if top <= 0:
                continue
            m = dec.multiplicities[:top]
            if len(m) < top or np.any(m != ref[s][:top]):
                raise DegenerateCrossingError(
                    f"level crossing in sector {s} at t={t:.6g}; adiabatic level tracking is ambiguous"
                )
        out.append(decs)
    return out


def _occupied_top(pops, tol=1e-14):
    return [int(np.flatnonzero(p > tol).max()) if np.any(p > tol) else -1 for p in pops]


def cost_selected(schedule, initial, n=1, nu=1.0, grid=IntegratorConfig(), hbar=HBAR):
    """Occupation-weighted cost of the selected fields.

    ``nu * sum_j p_j integral ||H_W,j(t)||^n dt`` where ``p_j`` are the level
    occupations at ``t0`` and level ``j`` is followed adiabatically.
    """
    _check_exponent(n)
    pops = level_populations(schedule, initial)
    times = schedule.grid(grid.steps)
    track_levels(schedule, times, _occupied_top(pops))
    vals = []
    for t in times:
        _, sel = _field_norms(schedule, t, hbar)
        v = 0.0
        for p, norms in zip(pops, sel):
            k = min(len(p), len(norms))
            v += float(np.dot(p[:k], norms[:k] ** n))
        vals.append(nu * v)
    return _report(times, vals, n, nu, "selected")


def adiabatic_trajectory(schedule, initial, grid=IntegratorConfig()):
    """Density matrices ``sum_j p_j P_j(t)`` of perfectly transitionless evolution.

    This is the state reached when the full counterdiabatic field is applied,
    obtained without integrating anything.
    """
    pops = level_populations(schedule, initial)
    times = schedule.grid(grid.steps)
    tracked = track_levels(schedule, times, _occupied_top(pops))
    dim = schedule.dim
    states = np.zeros((len(times), dim, dim), dtype=complex)
    for i, decs in enumerate(tracked):
        for (idx, dec), p in zip(decs, pops):
            V = dec.eigenvectors
            w = np.zeros(V.shape[1])
            for j, pj in enumerate(p):
                if pj > 0:
                    w[dec.slices[j]] = pj / dec.multiplicities[j]
            states[i][np.ix_(idx, idx)] = (V * w) @ V.conj().T
    return Trajectory(times, states, "density")


def exigency(schedule, trajectory):
    """``integral ||[dH/dt, rho(t)]|| dt`` along a sampled trajectory."""
    times = trajectory.times
    tol = 1e-9 * schedule.duration
    if abs(times[0] - schedule.t0) > tol or abs(times[-1] - schedule.t1) > tol:
        raise InvalidInputError(
            "trajectory grid does not span the schedule interval "
            f"[{schedule.t0}, {schedule.t1}]"
        )
    rhos = trajectory.densities()
    vals = [
        frobenius_norm(_comm(schedule.dH(t), rho)) for t, rho in zip(times, rhos)
    ]
    return _report(times, vals, 1, 1.0, "exigency")


def _comm(A, B):
    return A @ B - B @ A


def friction_power_expansion(schedule, initial, dt_list, steps=400, hbar=HBAR):
    """Short-time deviation ``||rho(t0 + dt) - rho(t0)||`` for each ``dt``.

    Each ``dt`` is integrated separately with ``steps`` RK4 steps. The
    log-log slope of the result is the order of the first non-vanishing term.
    """
    level_populations(schedule, initial)
    rho0 = initial.rho()
    out = []
    for dt in dt_list:
        dt = float(dt)
        # below ~10 ulp of t0 the grid points would collide
        if dt <= 10 * np.finfo(float).eps * max(abs(schedule.t0), schedule.duration):
            raise InvalidInputError(f"dt={dt} is below the integrator time resolution")
        if dt > schedule.duration:
            raise InvalidInputError(f"dt={dt} exceeds the schedule duration")
        times = np.linspace(schedule.t0, schedule.t0 + dt, steps + 1)
        traj = evolve(schedule, QuantumState("density", rho0), IntegratorConfig(max(steps, 100)),
                      hbar=hbar, times=times)
        out.append((dt, frobenius_norm(traj.states[-1] - rho0)))
    return out


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
