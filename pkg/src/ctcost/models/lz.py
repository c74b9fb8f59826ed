"""Landau-Zener two-level sweep ``H = g(t) sz + delta sx``."""
from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from ..operators import HBAR
from ..propagation import Schedule

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def lz_model(delta, ramp):
    if not delta > 0:
        raise InvalidInputError(f"delta must be > 0, got {delta}")

    def H(t):
        return ramp.value(t) * SZ + delta * SX

    def dH(t):
        return ramp.rate(t) * SZ

    return Schedule(H, ramp.t0, ramp.t1, derivative=dH, name="landau-zener")


def lz_cd_analytic(delta, ramp, t, hbar=HBAR):
    """Closed-form transitionless field ``-hbar gdot delta / (2 (delta^2 + g^2)) sy``."""
    g = ramp.value(t)
    return -hbar * ramp.rate(t) * delta / (2 * (delta**2 + g**2)) * SY


def lz_energies(delta, g):
    """Instantaneous eigenvalues ``(-sqrt(g^2 + delta^2), +sqrt(g^2 + delta^2))``."""
    e = np.sqrt(g**2 + delta**2)
    return -e, e
