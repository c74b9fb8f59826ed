"""Lipkin-Meshkov-Glick model in the maximal collective-spin sector.

``H = -(2 delta / N) (Sx^2 + gamma Sy^2) - 2 g(t) Sz`` on the ``N + 1``
states ``|S, m>``, ``S = N / 2``, ordered ``m = S, S-1, ..., -S``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ..errors import InvalidInputError
from ..operators import QuantumState, commutator, expectation_and_variance, frobenius_norm
from ..propagation import Schedule

CRITICAL_GUARD = 1e-3


def collective_spin(N):
    """``Sx, Sy, Sz`` for total spin ``N / 2`` (hbar = 1)."""
    S = N / 2
    m = S - np.arange(N + 1)
    # <m+1| S+ |m> = sqrt(S(S+1) - m(m+1)); index i holds m = S - i
    sp = np.diag(np.sqrt(S * (S + 1) - m[1:] * (m[1:] + 1)), 1).astype(complex)
    sm = sp.conj().T
    Sx = (sp + sm) / 2
    Sy = (sp - sm) / 2j
    Sz = np.diag(m).astype(complex)
    return Sx, Sy, Sz


@dataclass(frozen=True)
class LMGModel:
    N: int
    gamma: float
    delta: float
    ramp: object
    schedule: Schedule
    Sx: np.ndarray
    Sy: np.ndarray
    Sz: np.ndarray

    def ground_state(self, t):
        return lmg_ground_state(self.N, self.ramp.value(t), self.delta, self.gamma)


def lmg_model(N, gamma, delta, ramp):
    if int(N) != N or N < 2:
        raise InvalidInputError(f"N must be an integer >= 2, got {N}")
    N = int(N)
    Sx, Sy, Sz = collective_spin(N)
    inter = -(2 * delta / N) * (Sx @ Sx + gamma * Sy @ Sy)

    def H(t):
        return inter - 2 * ramp.value(t) * Sz

    def dH(t):
        return -2 * ramp.rate(t) * Sz

    # Sx^2, Sy^2 and Sz only connect m to m and m +- 2
    idx = np.arange(N + 1)
    sectors = [idx[idx % 2 == 0], idx[idx % 2 == 1]]
    sched = Schedule(H, ramp.t0, ramp.t1, derivative=dH, sectors=sectors, name=f"lmg-N{N}")
    return LMGModel(N, gamma, delta, ramp, sched, Sx, Sy, Sz)


def lmg_ground_state(N, g, delta, gamma=0.0):
    """Ground state from the two tridiagonal parity blocks.

    Returns ``(energy, vector)`` with the vector in the full ``N + 1`` basis.
    """
    S = N / 2
    m = S - np.arange(N + 1)
    # <m|Sx^2|m> and <m+2|Sx^2|m> via S+^2, S-^2
    diag_sxsx = 0.5 * (S * (S + 1) - m**2)
    a = np.sqrt((S * (S + 1) - (m[1:] + 1) * m[1:]))  # <m+1|S+|m>, m = m[1:]
    s2 = a[:-1] * a[1:]  # <m+2|S+^2|m>
    c = -2 * delta / N
    # Sx^2 = (S+^2 + S-^2 + S+S- + S-S+)/4, Sy^2 = -(S+^2 + S-^2 - S+S- - S-S+)/4
    diag = c * (1 + gamma) * diag_sxsx - 2 * g * m
    off = c * (1 - gamma) * s2 / 4
    best = None
    for parity in (0, 1):
        sl = slice(parity, None, 2)
        d = diag[sl]
        e = off[parity::2][: len(d) - 1]
        if len(d) == 1:
            w, v = d[:1], np.ones((1, 1))
        else:
            w, v = eigh_tridiagonal(d, e, select="i", select_range=(0, 0))
        if best is None or w[0] < best[0] - 1e-12 * max(1.0, abs(w[0])):
            vec = np.zeros(N + 1, dtype=complex)
            vec[sl] = v[:, 0]
            best = (float(w[0]), vec)
    return best


def lmg_exigency(model, state, t):
    """Instantaneous exigency ``2 sqrt(2) |g_dot| sqrt(Var Sz)`` for pure states.

    The closed form assumes a pure state; mixed states fall back to the
    commutator norm ``||[dH/dt, rho]||``.
    """
    gd = float(model.ramp.rate(t))
    if state.is_pure:
        _, var = expectation_and_variance(state, model.Sz)
        return 2 * np.sqrt(2) * abs(gd) * np.sqrt(var)
    warnings.warn("mixed state: using the commutator-norm exigency", stacklevel=2)
    return frobenius_norm(commutator(model.schedule.dH(t), state.rho()))


def lmg_exigency_generic(model, state, t):
    return frobenius_norm(commutator(model.schedule.dH(t), state.rho()))


def lmg_hp_exigency(g_tilde, g_dot, N):
    """Large-N (Holstein-Primakoff + Bogoliubov) ground-state exigency, gamma = 0.

    Paramagnetic side ``g > delta``: ``2 |g_dot| sinh(a)``, ``tanh(a) = 1 / (2 g - 1)``.
    Broken side ``0 < g < delta``:
    ``2 |g_dot| sqrt(g sinh(a)^2 + N (1 - g^2) e^a / 2)``, ``tanh(a) = g^2 / (2 - g^2)``.
    Here ``g`` stands for ``g / delta``.
    """
    g = np.asarray(g_tilde, dtype=float)
    if np.any(g <= 0):
        raise InvalidInputError("g/delta must be positive")
    if np.any(np.abs(g - 1) < CRITICAL_GUARD):
        warnings.warn("g/delta within the critical guard band; the bosonic mapping breaks down",
                      stacklevel=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        a_para = np.arctanh(1 / (2 * g - 1))
        a_broken = np.arctanh(g**2 / (2 - g**2))
        para = 2 * np.abs(g_dot) * np.sinh(a_para)
        broken = 2 * np.abs(g_dot) * np.sqrt(
            g * np.sinh(a_broken) ** 2 + N * (1 - g**2) * np.exp(a_broken) / 2
        )
    out = np.where(g > 1, para, broken)
    return float(out) if out.ndim == 0 else out
