"""Periodic transverse-field Ising chain ``H = -J sum sx_i sx_{i+1} + g(t) sum sz_i``.

Two representations are provided:

* :func:`ising_dense` builds the ``2^L`` spin-basis matrix (oracle path, L <= 10).
* :func:`ising_momentum` uses the Jordan-Wigner free-fermion form. The even
  (odd) fermion-parity sector uses anti-periodic (periodic) momenta, and
  every pair ``(k, -k)`` with ``0 < k < pi`` is an independent two-level
  problem on ``{|00>, |11>}``. States with exactly one of ``k, -k`` occupied
  never evolve.

Fermion convention: spin up is the empty mode, ``sz_i = 1 - 2 n_i``. With
this choice the Hamiltonian of one pair reads, in the basis
``(|00>, c_k^+ c_-k^+ |00>)``::

    [[ 2g,            2i J sin k        ],
     [-2i J sin k,   -2g - 4 J cos k    ]]

a singly occupied pair has energy ``-2 J cos k``, and the unpaired modes
``k = 0, pi`` of the odd sector contribute ``g - 2 (g + J cos k) n_k``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..counterdiabatic import CostReport, _report
from ..errors import InvalidInputError
from ..operators import HBAR
from ..propagation import IntegratorConfig, Schedule

MAX_DENSE_L = 10
MAX_ENUM_L = 12


def _check_L(L, max_L=None):
    if int(L) != L or L < 2 or L % 2:
        raise InvalidInputError(f"L must be an even integer >= 2, got {L}")
    if max_L is not None and L > max_L:
        raise InvalidInputError(f"L={L} exceeds the limit {max_L} for this representation")


def _bonds(L):
    # a ring of two sites has a single distinct bond
    return sorted({tuple(sorted((i, (i + 1) % L))) for i in range(L)})


def spin_parity_sectors(L):
    """Basis indices grouped by the parity of the number of down spins."""
    n_down = np.array([bin(i).count("1") for i in range(2**L)])
    return [np.flatnonzero(n_down % 2 == 0), np.flatnonzero(n_down % 2 == 1)]


def _ising_terms(L):
    dim = 2**L
    idx = np.arange(dim)
    bits = (idx[:, None] >> (L - 1 - np.arange(L))[None, :]) & 1  # site 0 is the leftmost factor
    Z = np.diag((1 - 2 * bits).sum(axis=1)).astype(complex)
    XX = np.zeros((dim, dim), dtype=complex)
    for i, j in _bonds(L):
        flip = (1 << (L - 1 - i)) | (1 << (L - 1 - j))
        XX[idx ^ flip, idx] += 1.0
    return XX, Z


def ising_dense(L, J, ramp):
    """Dense spin-basis schedule; basis index bit 1 means spin down.

    The schedule carries the two spin-flip-parity sectors.
    """
    _check_L(L, MAX_DENSE_L)
    XX, Z = _ising_terms(L)

    def H(t):
        return -J * XX + ramp.value(t) * Z

    def dH(t):
        return ramp.rate(t) * Z

    return Schedule(H, ramp.t0, ramp.t1, derivative=dH,
                    sectors=spin_parity_sectors(L), name=f"ising-L{L}")


def two_spin_cd_analytic(J, ramp, t, hbar=HBAR):
    """Transitionless field for two spins; only the ``{|uu>, |dd>}`` block is driven."""
    g = ramp.value(t)
    c = -1j * hbar * J * ramp.rate(t) / (J**2 + 4 * g**2)
    out = np.zeros((4, 4), dtype=complex)
    out[0, 3] = c
    out[3, 0] = -c
    return out


# ---------------------------------------------------------------------------
# momentum sectors


def even_momenta(L):
    j = np.arange(1, L // 2 + 1)
    k = (2 * j - 1) * np.pi / L
    return np.concatenate((k, -k))


def odd_momenta(L):
    j = np.arange(1, L // 2)
    k = 2 * j * np.pi / L
    return np.concatenate(([0.0], k, -k, [np.pi]))


@dataclass(frozen=True)
class SubBlock:
    """Occupation-basis states connected by pair creation/annihilation.

    ``active`` holds the pair momenta (in ``(0, pi)``) whose pair is empty or
    doubly occupied; those are the only pairs that evolve inside the block.
    ``fixed_energy`` terms do not depend on the active pairs.
    """

    kind: str
    sector: str
    active: tuple
    singles: tuple          # pair momenta with exactly one of (k, -k) occupied
    unpaired: tuple         # occupations of (k=0, k=pi), odd sector only
    states: tuple = field(repr=False)

    @property
    def size(self):
        return len(self.states)


@dataclass(frozen=True)
class SubBlockClassification:
    sector: str
    blocks: tuple

    def counts(self):
        """Total number of states per block type."""
        out = {"A": 0, "B": 0, "C": 0}
        for b in self.blocks:
            out[b.kind] += b.size
        return out

    def n_blocks(self, kind):
        return sum(1 for b in self.blocks if b.kind == kind)


@dataclass(frozen=True)
class MomentumSectorModel:
    """Free-fermion form of the periodic chain, one 2x2 problem per momentum pair."""

    L: int
    J: float
    ramp: object

    @property
    def bond_scale(self):
        # ring of two sites: one bond, while the Fourier form assumes L bonds
        return 0.5 if self.L == 2 else 1.0

    @property
    def J_eff(self):
        return self.J * self.bond_scale

    @property
    def even_momenta(self):
        return even_momenta(self.L)

    @property
    def odd_momenta(self):
        return odd_momenta(self.L)

    def pairs(self, sector):
        k = self.even_momenta if sector == "even" else self.odd_momenta
        return np.sort(k[(k > 0) & (k < np.pi - 1e-12)])

    def pair_hamiltonian(self, k, g):
        """2x2 block on ``(|00>, |11>)`` for one pair."""
        J = self.J_eff
        s, c = np.sin(k), np.cos(k)
        return np.array([[2 * g, 2j * J * s], [-2j * J * s, -2 * g - 4 * J * c]])

    def pair_energies(self, k, g):
        """Lower and upper eigenvalue of the pair block."""
        J = self.J_eff
        eps = 2 * np.sqrt(g**2 + J**2 + 2 * g * J * np.cos(k))
        mid = -2 * J * np.cos(k)
        return mid - eps, mid + eps

    def single_energy(self, k):
        return -2 * self.J_eff * np.cos(k)

    def unpaired_energy(self, n0, npi, g):
        J = self.J_eff
        return (g - 2 * (g + J) * n0) + (g - 2 * (g - J) * npi)

    def cd_amplitude(self, k, t, hbar=HBAR):
        """Magnitude of the pair-flip matrix element of the transitionless field."""
        g = self.ramp.value(t)
        gd = self.ramp.rate(t)
        J = self.J_eff
        return np.abs(hbar * gd * J * np.sin(k) / (2 * (g**2 + J**2 + 2 * g * J * np.cos(k))))

    @cached_property
    def classifications(self):
        return {s: classify_subblocks(self, s) for s in ("even", "odd")}

    def block_fixed_energy(self, block, g):
        E = sum(self.single_energy(k) for k in block.singles)
        if block.sector == "odd":
            E += self.unpaired_energy(*block.unpaired, g)
        return E

    def block_hamiltonian(self, block, g):
        """Dense block Hamiltonian as a Kronecker sum over active pairs."""
        H = np.array([[self.block_fixed_energy(block, g)]], dtype=complex)
        for k in block.active:
            h = self.pair_hamiltonian(k, g)
            H = np.kron(H, np.eye(2)) + np.kron(np.eye(H.shape[0]), h)
        return H

    def spectrum(self, t):
        """All ``2^L`` eigenvalues, sorted, assembled from the pair problems."""
        g = self.ramp.value(t)
        out = []
        for cls in self.classifications.values():
            for b in cls.blocks:
                E = np.array([self.block_fixed_energy(b, g)])
                for k in b.active:
                    lo, hi = self.pair_energies(k, g)
                    E = np.concatenate((E + lo, E + hi))
                out.append(E)
        return np.sort(np.concatenate(out))


def ising_momentum(L, J, ramp):
    _check_L(L)
    return MomentumSectorModel(int(L), float(J), ramp)


def classify_subblocks(model, sector):
    """Group the occupation basis of one parity sector into dynamical sub-blocks.

    Type A: every pair is active; type B: no pair is active (frozen state);
    type C: anything in between. Block size is ``2^(number of active pairs)``.
    """
    if sector not in ("even", "odd"):
        raise InvalidInputError(f"sector must be 'even' or 'odd', got {sector!r}")
    _check_L(model.L, MAX_ENUM_L)
    pairs = model.pairs(sector)
    unpaired = [(0, 0)] if sector == "even" else [(0, 0), (1, 0), (0, 1), (1, 1)]
    want = 0 if sector == "even" else 1
    groups = {}
    # each pair is in one of 00, 11 (active) or 10, 01 (single)
    for occ in itertools.product(((0, 0), (1, 1), (1, 0), (0, 1)), repeat=len(pairs)):
        for u in unpaired:
            n = sum(a + b for a, b in occ) + sum(u)
            if n % 2 != want:
                continue
            active = tuple(float(k) for k, o in zip(pairs, occ) if o[0] == o[1])
            singles = tuple((float(k), o) for k, o in zip(pairs, occ) if o[0] != o[1])
            key = (active, singles, u)
            groups.setdefault(key, []).append(tuple(occ) + (u,))
    blocks = []
    for (active, singles, u), states in groups.items():
        if not active:
            kind = "B"
        elif len(active) == len(pairs):
            kind = "A"
        else:
            kind = "C"
        blocks.append(SubBlock(kind, sector, active, tuple(k for k, _ in singles),
                               u if sector == "odd" else (), tuple(states)))
    return SubBlockClassification(sector, tuple(blocks))


def ising_cd_momentum(model, t, hbar=HBAR):
    """Pair amplitudes of the transitionless field and its full-space norm.

    Returns ``(amplitudes, norm)`` where ``amplitudes`` maps
    ``(sector, k) -> |f(k, t)|``. The Frobenius norm counts every
    occupation-basis state on which a pair flip acts, i.e. the field as an
    operator on the whole ``2^L`` space.
    """
    amps = {(s, float(k)): float(model.cd_amplitude(k, t, hbar))
            for s in ("even", "odd") for k in model.pairs(s)}
    norm_sq = 0.0
    for s, cls in model.classifications.items():
        for b in cls.blocks:
            norm_sq += b.size * sum(amps[(s, k)] ** 2 for k in b.active)
    return amps, float(np.sqrt(norm_sq))


def ising_cd_block(model, block, t, hbar=HBAR):
    """Transitionless field restricted to one sub-block, as a dense matrix.

    The phase convention matches :meth:`MomentumSectorModel.block_hamiltonian`.
    """
    g = model.ramp.value(t)
    gd = model.ramp.rate(t)
    J = model.J_eff
    X = np.zeros((1, 1), dtype=complex)
    for k in block.active:
        # H_pair = -2Jc I + a sz + b sy with a = 2(g + Jc), b = -2Js
        a, b = 2 * (g + J * np.cos(k)), -2 * J * np.sin(k)
        adot = 2 * gd
        x = hbar * (b * adot) / (2 * (a**2 + b**2))
        f = x * np.array([[0, 1], [1, 0]], dtype=complex)
        X = np.kron(X, np.eye(2)) + np.kron(np.eye(X.shape[0]), f)
    return X


def _block_groups(model):
    """Blocks keyed by ``(sector, active pairs)`` with their total size."""
    out = {}
    for s, cls in model.classifications.items():
        for b in cls.blocks:
            out.setdefault((s, b.active), []).append(b)
    return out


def block_probabilities(model, beta):
    """Thermal occupation of every sub-block at ``t0``, keyed like :func:`_block_groups`."""
    g0 = model.ramp.value(model.ramp.t0)
    logs, keys = [], []
    for key, blocks in _block_groups(model).items():
        for b in blocks:
            keys.append(key)
            logs.append(_block_log_weight(model, b, beta, g0))
    logs = np.array(logs)
    if np.isinf(beta):
        E = -logs  # _block_log_weight returns -ground energy when beta is inf
        ground = E <= E.min() + 1e-9 * max(1.0, abs(E.min()))
        w = ground.astype(float)
    else:
        w = np.exp(logs - logs.max())
    w /= w.sum()
    out = {}
    for key, p in zip(keys, w):
        out[key] = out.get(key, 0.0) + p
    return out


def _block_log_weight(model, b, beta, g):
    E0 = model.block_fixed_energy(b, g)
    if np.isinf(beta):
        return -(E0 + sum(model.pair_energies(k, g)[0] for k in b.active))
    lw = -beta * E0
    for k in b.active:
        lo, hi = model.pair_energies(k, g)
        lw += np.logaddexp(-beta * lo, -beta * hi)
    return lw


def _check_beta(beta):
    beta = float(beta)
    if np.isnan(beta) or beta < 0:
        raise InvalidInputError(f"inverse temperature must be >= 0, got {beta}")
    return beta


def transitionless_cost_ising(model, n=1, nu=1.0, grid=IntegratorConfig(), hbar=HBAR):
    times = np.linspace(model.ramp.t0, model.ramp.t1, grid.steps + 1)
    vals = [nu * ising_cd_momentum(model, t, hbar)[1] ** n for t in times]
    return _report(times, vals, n, nu, "transitionless")


def selected_cost_ising(model, beta, n=1, nu=1.0, grid=IntegratorConfig(), hbar=HBAR):
    """Selected-driving cost for a thermal initial state.

    After the first energy measurement lands in sub-block ``b``, only the
    pairs active in ``b`` are driven: the field is the transitionless field
    restricted to those momenta, acting on the whole parity sector. Frozen
    (type B) blocks need no field.
    """
    beta = _check_beta(beta)
    probs = block_probabilities(model, beta)
    sizes = {(s, b.active): 0 for s, cls in model.classifications.items() for b in cls.blocks}
    for s, cls in model.classifications.items():
        for b in cls.blocks:
            sizes[(s, b.active)] += b.size
    times = np.linspace(model.ramp.t0, model.ramp.t1, grid.steps + 1)
    vals = []
    for t in times:
        amps, _ = ising_cd_momentum(model, t, hbar)
        v = 0.0
        for (s, active), p in probs.items():
            if p == 0.0 or not active:
                continue
            sel = set(active)
            norm_sq = sum(size * sum(amps[(s2, k)] ** 2 for k in a2 if k in sel)
                          for (s2, a2), size in sizes.items() if s2 == s)
            v += p * norm_sq ** (n / 2)
        vals.append(nu * v)
    return _report(times, vals, n, nu, "selected")


def exigency_ising(model, beta, grid=IntegratorConfig()):
    """Exigency of the adiabatically continued thermal state, in momentum form.

    Inside a sub-block the thermal state factorizes over active pairs,
    ``rho_b = w_b * prod_k rho_k(t)``, and ``dH/dt = gdot (L - 2 N)``. Cross
    terms between pairs vanish because ``Tr(rho [A, rho]) = 0``.
    """
    beta = _check_beta(beta)
    probs = {}
    g0 = model.ramp.value(model.ramp.t0)
    for s, cls in model.classifications.items():
        for b in cls.blocks:
            probs[id(b)] = (b, _block_log_weight(model, b, beta, g0))
    logs = np.array([lw for _, lw in probs.values()])
    if np.isinf(beta):
        E = -logs
        w = (E <= E.min() + 1e-9 * max(1.0, abs(E.min()))).astype(float)
    else:
        w = np.exp(logs - logs.max())
    w /= w.sum()
    weights = {key: wi for key, wi in zip(probs, w)}

    # per-pair populations of the lower/upper level, fixed at t0
    def pair_pops(k):
        lo, hi = model.pair_energies(k, g0)
        if np.isinf(beta):
            return np.array([1.0, 0.0])
        x = np.array([-beta * lo, -beta * hi])
        x = np.exp(x - x.max())
        return x / x.sum()

    N2 = np.diag([0.0, 2.0])  # fermion number of (|00>, |11>)
    times = np.linspace(model.ramp.t0, model.ramp.t1, grid.steps + 1)
    vals = []
    for t in times:
        g = model.ramp.value(t)
        gd = model.ramp.rate(t)
        cache = {}
        for b, _ in probs.values():
            for k in b.active:
                if k in cache:
                    continue
                _, V = np.linalg.eigh(model.pair_hamiltonian(k, g))
                rho = (V * pair_pops(k)) @ V.conj().T
                comm = N2 @ rho - rho @ N2
                cache[k] = (np.sum(np.abs(comm) ** 2), np.sum(np.abs(rho) ** 2).real)
        total = 0.0
        for key, (b, _) in probs.items():
            wb = weights[key]
            if wb == 0.0 or not b.active:
                continue
            c = [cache[k] for k in b.active]
            purity = np.prod([pk for _, pk in c])
            s = sum(ck / pk for ck, pk in c) * purity
            # block state is w_b / size-normalized product; each basis state counts once
            total += wb**2 * s
        vals.append(2 * abs(gd) * np.sqrt(total))
    return _report(times, vals, 1, 1.0, "exigency")
