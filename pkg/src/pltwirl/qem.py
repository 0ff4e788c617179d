"""Noise scaling and Pauli-word sampling for PL-model error mitigation.

A power ``(E^P)^beta`` of a PL channel has parameters ``beta * lambda`` and
factorizes into commuting terms ``w_a id + (1 - w_a) P_a . P_a`` with
``w_a = (1 + exp(-2 lambda'_a)) / 2``. Terms with ``w_a <= 1`` are ordinary
probabilistic flips. Terms with ``w_a > 1`` are rewritten as

    (2w - 1) [ w/(2w - 1) id - (w - 1)/(2w - 1) P . P ]

so they become flips with probability ``(w-1)/(2w-1)`` that carry a sign of
-1, at a sampling overhead ``2w - 1``. Both kinds may occur in one plan.

Pauli-word products drop their phases: conjugation ``P rho P`` does not see
a global phase.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import Channel
from .pauli import PauliWord, pauli_basis, symplectic_matrix
from .plmodel import PLParams, pl_channel

MAX_EXACT_SUPPORT = 16


@dataclass(frozen=True)
class PlanEntry:
    word: PauliWord
    lambda_prime: float
    w: float
    gamma_factor: float
    flip_probability: float
    sign_on_flip: int


@dataclass(frozen=True)
class SamplingPlan:
    n: int
    beta: float
    entries: tuple[PlanEntry, ...]

    @property
    def total_gamma(self) -> float:
        return math.prod(e.gamma_factor for e in self.entries)

    @property
    def flip_probabilities(self) -> np.ndarray:
        return np.array([e.flip_probability for e in self.entries])

    @property
    def flip_signs(self) -> np.ndarray:
        return np.array([e.sign_on_flip for e in self.entries], dtype=int)


def _require_real(pl: PLParams) -> np.ndarray:
    if not pl.is_real():
        raise ValueError("noise scaling needs real PL parameters")
    return np.asarray(pl.lam, dtype=float)


def power_lambda(pl: PLParams, beta: float) -> PLParams:
    """Parameters of ``(E^P)^beta``."""
    lam = _require_real(pl)
    return PLParams(pl.n, pl.support, beta * lam)


def build_plan(pl: PLParams, beta: float = 1.0) -> SamplingPlan:
    lam = _require_real(pl) * beta
    entries = []
    for word, lp in zip(pl.support, lam):
        w = (1 + math.exp(-2 * lp)) / 2
        if w <= 1:
            entries.append(PlanEntry(word, float(lp), w, 1.0, 1 - w, 1))
        else:
            g = 2 * w - 1
            entries.append(PlanEntry(word, float(lp), w, g, (w - 1) / g, -1))
    return SamplingPlan(pl.n, float(beta), tuple(entries))


def _word_bits(plan: SamplingPlan) -> tuple[np.ndarray, np.ndarray]:
    xs = np.array([e.word.x for e in plan.entries], dtype=np.uint8).reshape(-1, plan.n)
    zs = np.array([e.word.z for e in plan.entries], dtype=np.uint8).reshape(-1, plan.n)
    return xs, zs


def _combine(flips: np.ndarray, xs: np.ndarray, zs: np.ndarray) -> np.ndarray:
    """Canonical indices of the phase-free products of flipped words, one per row."""
    f = flips.astype(np.uint8)
    x = (f @ xs) % 2
    z = (f @ zs) % 2
    digit = np.where(x == 1, np.where(z == 1, 2, 1), np.where(z == 1, 3, 0))
    weights = 4 ** np.arange(digit.shape[1] - 1, -1, -1)
    return digit @ weights


def sample_word(plan: SamplingPlan, rng: np.random.Generator) -> tuple[PauliWord, int]:
    """One draw: the injected Pauli word and its sign."""
    flips = rng.random(len(plan.entries)) < plan.flip_probabilities
    xs, zs = _word_bits(plan)
    if plan.entries:
        idx = int(_combine(flips[None, :], xs, zs)[0])
    else:
        idx = 0
    sign = int(np.prod(np.where(flips, plan.flip_signs, 1)))
    return PauliWord.from_index(idx, plan.n), sign


def sample_words(plan: SamplingPlan, shots: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized draws: canonical word indices and signs, each of length ``shots``."""
    k = len(plan.entries)
    if k == 0:
        return np.zeros(shots, dtype=int), np.ones(shots, dtype=int)
    flips = rng.random((shots, k)) < plan.flip_probabilities
    xs, zs = _word_bits(plan)
    idx = _combine(flips, xs, zs)
    negative = (flips & (plan.flip_signs < 0)).sum(axis=1)
    return idx, 1 - 2 * (negative % 2)


def expected_map(plan: SamplingPlan) -> Channel:
    """Exact average of ``total_gamma * sign * (P . P)`` over all flip patterns."""
    k = len(plan.entries)
    if k > MAX_EXACT_SUPPORT:
        raise ValueError(f"support of {k} words is too large for exact enumeration (max {MAX_EXACT_SUPPORT})")
    m = symplectic_matrix(plan.n)
    xs, zs = _word_bits(plan)
    q = plan.flip_probabilities
    signs = plan.flip_signs
    patterns = ((np.arange(2**k)[:, None] >> np.arange(k)) & 1).astype(bool)
    prob = np.prod(np.where(patterns, q, 1 - q), axis=1)
    sgn = np.prod(np.where(patterns, signs, 1), axis=1)
    idx = _combine(patterns, xs, zs) if k else np.zeros(1, dtype=int)
    coeff = plan.total_gamma * prob * sgn
    # conjugation by word c has transfer diag (-1)^<a,c>
    diag = (1 - 2 * m[:, idx].astype(float)) @ coeff
    return Channel(np.diag(diag))


class MitigationEstimate(NamedTuple):
    estimate: float
    stderr: float
    total_gamma: float
    shots: int


def mitigation_estimate(
    channel: Channel | None,
    pl: PLParams,
    beta: float,
    observable: np.ndarray,
    state: np.ndarray,
    shots: int,
    rng: int | np.random.SeedSequence | None = 0,
    workers: int = 1,
) -> MitigationEstimate:
    """Monte-Carlo estimate of ``tr[O (E_beta o channel)(rho)]`` with ``E_beta``
    realized by sampling Pauli words from ``build_plan(pl, beta)``.

    ``channel=None`` stands for the PL channel of ``pl`` itself.
    Shots are split into ``workers`` chunks, each with its own stream spawned
    from ``rng``; the result depends on the seed and the worker count only.
    """
    if shots < 1:
        raise ValueError("shots must be positive")
    plan = build_plan(pl, beta)
    if channel is None:
        channel = pl_channel(pl).to_channel()
    obs = np.asarray(observable, dtype=complex)
    sigma = channel.apply(np.asarray(state, dtype=complex))
    basis = pauli_basis(plan.n)
    # value of tr[O P_c sigma P_c] for every word c
    values = np.real(np.einsum("ij,cjk,kl,cli->c", obs, basis, sigma, basis))
    seed = rng if isinstance(rng, np.random.SeedSequence) else np.random.SeedSequence(rng)
    children = seed.spawn(max(1, workers))
    sizes = [shots // len(children) + (i < shots % len(children)) for i in range(len(children))]
    gamma = plan.total_gamma

    def run(args):
        child, size = args
        if size == 0:
            return 0.0, 0.0
        idx, sgn = sample_words(plan, size, np.random.default_rng(child))
        x = gamma * sgn * values[idx]
        return math.fsum(x), math.fsum(x * x)

    if len(children) > 1:
        with ThreadPoolExecutor(max_workers=len(children)) as pool:
            parts = list(pool.map(run, zip(children, sizes)))
    else:
        parts = [run((children[0], shots))]
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s1 / shots
    var = max(s2 / shots - mean * mean, 0.0) * shots / max(shots - 1, 1)
    return MitigationEstimate(mean, math.sqrt(var / shots), gamma, shots)


_KETS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "r": np.array([1, 1j], dtype=complex) / np.sqrt(2),
    "l": np.array([1, -1j], dtype=complex) / np.sqrt(2),
}
_STATE_NAMES = {"zero": "0", "one": "1", "plus": "+", "minus": "-", "plus_i": "r", "minus_i": "l"}


def product_state(name: str, n: int) -> np.ndarray:
    """Density matrix of a product state.

    ``name`` is either a name applied to every qubit (``zero``, ``one``,
    ``plus``, ``minus``, ``plus_i``, ``minus_i``) or one character per qubit
    from ``01+-rl``.
    """
    chars = _STATE_NAMES[name] * n if name in _STATE_NAMES else name
    if len(chars) != n or any(c not in _KETS for c in chars):
        raise ValueError(f"cannot build a {n}-qubit product state from {name!r}")
    psi = np.ones(1, dtype=complex)
    for c in chars:
        psi = np.kron(psi, _KETS[c])
    return np.outer(psi, psi.conj())
