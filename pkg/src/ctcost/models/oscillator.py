"""Harmonic oscillator with a ramped frequency, in a truncated Fock basis."""
from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from ..operators import HBAR
from ..propagation import Schedule


def ladder(n_max):
    """Annihilation operator on Fock states ``0..n_max``."""
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), 1).astype(complex)


def position_momentum(m, omega_ref, n_max, hbar=HBAR):
    """``x`` and ``p`` in the Fock basis of an oscillator of frequency ``omega_ref``."""
    a = ladder(n_max)
    ad = a.conj().T
    x = np.sqrt(hbar / (2 * m * omega_ref)) * (a + ad)
    p = 1j * np.sqrt(m * omega_ref * hbar / 2) * (ad - a)
    return x, p


def ho_model(m, ramp, n_max=60, hbar=HBAR):
    """``H = p^2 / 2m + m omega(t)^2 x^2 / 2`` with ``x, p`` fixed at ``omega(t0)``.

    ``x^2`` and ``p^2`` are formed one level above the cutoff and then
    truncated, so ``H(t0)`` is exactly diagonal; for ``omega != omega(t0)``
    only the lower part of the spectrum is faithful. ``n_max >= 20`` is
    required.
    """
    if n_max < 20:
        raise InvalidInputError(f"n_max must be >= 20, got {n_max}")
    if m <= 0:
        raise InvalidInputError("mass must be positive")
    omega0 = float(ramp.value(ramp.t0))
    if omega0 <= 0:
        raise InvalidInputError("frequency must stay positive")
    x, p = position_momentum(m, omega0, n_max + 1, hbar)
    keep = slice(0, n_max + 1)
    x2 = (x @ x)[keep, keep]
    kin = (p @ p)[keep, keep] / (2 * m)

    def H(t):
        return kin + 0.5 * m * ramp.value(t) ** 2 * x2

    def dH(t):
        return m * ramp.value(t) * ramp.rate(t) * x2

    return Schedule(H, ramp.t0, ramp.t1, derivative=dH, name="oscillator")


def ho_cd_analytic(m, ramp, t, n_max=60, hbar=HBAR):
    """Known transitionless field ``-(omega_dot / 4 omega) (x p + p x)``."""
    x, p = position_momentum(m, float(ramp.value(ramp.t0)), n_max, hbar)
    w = ramp.value(t)
    return -ramp.rate(t) / (4 * w) * (x @ p + p @ x)


def ho_exigency_analytic(ramp, t=None, hbar=HBAR):
    """Ground-state exigency: rate ``hbar |omega_dot(t)|`` or, with ``t=None``,
    the integral over a monotone ramp, ``hbar |omega1 - omega0|``."""
    if t is None:
        return hbar * abs(ramp.end - ramp.start)
    return hbar * np.abs(ramp.rate(t))
