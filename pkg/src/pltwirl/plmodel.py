"""Pauli-Lindblad parameterization of Pauli channels.

A PL map is ``exp(L)`` with ``L(rho) = sum_a lambda_a (P_a rho P_a - rho)``.
Its Pauli eigenvalues are ``f_a = exp(-2 sum_k lambda_k <a,k>)`` and, using the
principal logarithm, the parameters are recovered from any Pauli channel with
nonzero eigenvalues. A Pauli channel is channel-semigroup Markovian exactly
when all of its parameters are real and nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from scipy.optimize import nnls

from .channel import PauliChannel
from .pauli import PauliWord, as_word, symplectic_matrix, walsh_hadamard_p_to_f

CSM_TOL = 1e-10
ZERO_F_TOL = 1e-14


class IllDefinedError(ValueError):
    """Raised when a Pauli eigenvalue vanishes, so PL parameters do not exist."""


class RankDeficientError(ValueError):
    pass


@dataclass(frozen=True)
class PLParams:
    """PL parameters on a support set of non-identity Pauli words.

    ``lam`` is real unless some parameter picked up an imaginary part from the
    principal logarithm of a negative eigenvalue.
    """

    n: int
    support: tuple[PauliWord, ...]
    lam: np.ndarray

    def __post_init__(self):
        support = tuple(as_word(w) for w in self.support)
        lam = np.array(self.lam)
        if not np.iscomplexobj(lam):
            lam = lam.astype(float)
        elif np.all(lam.imag == 0):
            lam = lam.real.copy()
        if lam.shape != (len(support),):
            raise ValueError(f"{len(support)} support words but {lam.shape} parameters")
        seen = set()
        for w in support:
            if w.n != self.n:
                raise ValueError(f"support word {w} does not act on {self.n} qubits")
            if w.is_identity():
                raise ValueError("the identity word cannot carry a PL parameter")
            if w in seen:
                raise ValueError(f"duplicate support word {w}")
            seen.add(w)
        lam.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "lam", lam)

    @classmethod
    def from_dict(cls, terms: Mapping[str | PauliWord, complex], n: int | None = None) -> "PLParams":
        words = [as_word(w) for w in terms]
        if n is None:
            if not words:
                raise ValueError("qubit count needed for an empty support")
            n = words[0].n
        return cls(n, tuple(words), np.array(list(terms.values())))

    @classmethod
    def zero(cls, n: int) -> "PLParams":
        return cls(n, (), np.zeros(0))

    @classmethod
    def from_dense(cls, values: Sequence[complex], n: int) -> "PLParams":
        """Full support from a length ``4**n - 1`` vector in canonical non-identity order."""
        values = np.asarray(values)
        if values.shape != (4**n - 1,):
            raise ValueError(f"expected {4**n - 1} values, got {values.shape}")
        words = tuple(PauliWord.from_index(i, n) for i in range(1, 4**n))
        return cls(n, words, values)

    @property
    def indices(self) -> np.ndarray:
        return np.array([w.index for w in self.support], dtype=int)

    def dense(self) -> np.ndarray:
        """Length ``4**n`` vector with zeros off the support (index 0 is unused)."""
        out = np.zeros(4**self.n, dtype=self.lam.dtype)
        out[self.indices] = self.lam
        return out

    def is_real(self, tol: float = 0.0) -> bool:
        return not np.iscomplexobj(self.lam) or bool(np.all(np.abs(self.lam.imag) <= tol))

    def as_dict(self) -> dict[str, complex]:
        return {w.label: v for w, v in zip(self.support, self.lam.tolist())}

    def scaled(self, beta: float) -> "PLParams":
        return PLParams(self.n, self.support, beta * self.lam)


@dataclass(frozen=True)
class CsmVerdict:
    is_csm: bool
    min_value: float
    tol: float
    witness: dict = field(default_factory=dict)
    method: str = "pauli"

    def to_json(self) -> dict:
        return {
            "is_csm": self.is_csm,
            "method": self.method,
            "witness": self.witness,
            "min_value": self.min_value,
            "tol": self.tol,
        }


def f_from_lambda(pl: PLParams) -> np.ndarray:
    m = symplectic_matrix(pl.n)
    if not pl.support:
        return np.ones(4**pl.n)
    exponent = -2.0 * (m[:, pl.indices] @ pl.lam)
    return np.exp(exponent)


def lambda_from_f(f: Sequence[complex] | np.ndarray) -> PLParams:
    """Invert ``f_from_lambda`` on the principal branch; full support."""
    f = np.asarray(f)
    bad = np.flatnonzero(np.abs(f) <= ZERO_F_TOL)
    if bad.size:
        word = PauliWord.from_index(int(bad[0]), _qubits(f))
        raise IllDefinedError(
            f"PL parameters ill-defined: Pauli eigenvalue f_{word.label} = 0 "
            "(such channels are only limit points of PL channels)"
        )
    n = _qubits(f)
    if np.iscomplexobj(f) or np.any(f < 0):
        logs = np.log(f.astype(complex))
    else:
        logs = np.log(f)
    logs = logs.copy()
    logs[0] = 0.0
    lam = walsh_hadamard_p_to_f(logs) / 4**n
    return PLParams.from_dense(lam[1:], n)


def _qubits(f: np.ndarray) -> int:
    n = 0
    while 4**n < f.size:
        n += 1
    if 4**n != f.size or n == 0:
        raise ValueError(f"Pauli vector length {f.size} is not 4^n")
    return n


def pl_channel(pl: PLParams) -> PauliChannel:
    """The PL map ``exp(L)`` as a Pauli channel (not necessarily CPTP)."""
    return PauliChannel(f_from_lambda(pl))


def classify_pauli(f_or_pl, tol: float = CSM_TOL) -> CsmVerdict:
    """CSM verdict for a Pauli channel: real, nonnegative PL parameters."""
    if isinstance(f_or_pl, PLParams):
        pl = f_or_pl
    else:
        if isinstance(f_or_pl, PauliChannel):
            f_or_pl = f_or_pl.f
        pl = lambda_from_f(f_or_pl)
    lam = pl.lam
    real = pl.is_real(tol)
    if lam.size == 0:
        min_value = 0.0
    elif real:
        min_value = float(np.min(lam.real))
    else:
        min_value = float("-inf")
    witness = {"lambda": {w: [float(np.real(v)), float(np.imag(v))] for w, v in pl.as_dict().items()}}
    return CsmVerdict(real and min_value >= -tol, min_value, tol, witness, "pauli")


def qubit_criterion(f: Sequence[float], tol: float = 0.0) -> bool:
    """Single-qubit test ``f_j >= f_k f_l`` over permutations of (x, y, z)."""
    f = np.asarray(f, dtype=float)
    if f.size != 4:
        raise ValueError("the product criterion applies to single-qubit channels only")
    if np.any(f[1:] <= 0):
        raise ValueError("the product criterion needs positive Pauli eigenvalues")
    fx, fy, fz = f[1:]
    return bool(fx >= fy * fz - tol and fy >= fx * fz - tol and fz >= fx * fy - tol)


def min_third_parameter(ell: float) -> float:
    """Smallest third single-qubit PL parameter compatible with complete
    positivity when the other two both equal ``ell``."""
    if ell < 0:
        raise ValueError(f"ell must be nonnegative, got {ell}")
    return -0.5 * np.log(np.cosh(2 * ell))


class FitResult(NamedTuple):
    params: PLParams
    residual: float


def fit_sparse_lambda(
    measured: Mapping[str | PauliWord, float],
    support: Sequence[str | PauliWord],
    allow_negative: bool = True,
    weights: Mapping[str | PauliWord, float] | None = None,
) -> FitResult:
    """Weighted least-squares fit of PL parameters on ``support``.

    Minimizes ``sum_a w_a (ln f_a + 2 sum_k lambda_k <a,k>)^2``. With
    ``allow_negative=False`` the parameters are constrained to be
    nonnegative (NNLS).
    """
    words = [as_word(w) for w in measured]
    supp = tuple(as_word(w) for w in support)
    if not words or not supp:
        raise ValueError("need at least one measurement and one support word")
    n = words[0].n
    values = np.array([measured[w] for w in measured], dtype=float)
    if np.any(values <= 0):
        bad = [w.label for w, v in zip(words, values) if v <= 0]
        raise ValueError(f"measured Pauli eigenvalues must be positive: {bad}")
    w = np.ones(len(words))
    if weights is not None:
        lookup = {as_word(k): v for k, v in weights.items()}
        w = np.array([lookup.get(word, 1.0) for word in words], dtype=float)
    m = symplectic_matrix(n)
    rows = np.array([word.index for word in words])
    cols = np.array([word.index for word in supp])
    a = 2.0 * m[np.ix_(rows, cols)].astype(float)
    y = -np.log(values)
    rank = np.linalg.matrix_rank(a)
    if rank < len(supp):
        raise RankDeficientError(
            f"measurements determine only {rank} of {len(supp)} parameters on the support"
        )
    sw = np.sqrt(w)
    if allow_negative:
        lam, *_ = np.linalg.lstsq(sw[:, None] * a, sw * y, rcond=None)
    else:
        lam, _ = nnls(sw[:, None] * a, sw * y)
    residual = float(np.sum(w * (a @ lam - y) ** 2))
    return FitResult(PLParams(n, supp, lam), residual)
