"""Quantum channel representations, conversions and Pauli twirling.

Superoperators act on row-major vectorized operators, so that
``vec(A @ rho @ B) = kron(A, B.T) @ vec(rho)``. The Choi matrix is
``J = sum_ij |i><j| (x) E(|i><j|)`` (trace ``2**n``, not normalized).
The Pauli-basis matrix ``p_ab`` is defined by ``E(rho) = sum_ab p_ab P_a rho P_b``
and the transfer matrix by ``T_ab = 2^-n tr[P_a E(P_b)]``.

The transfer matrix is the canonical stored form; the others are derived on
first access and cached.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .pauli import (
    PauliWord,
    as_word,
    check_dense,
    pauli_basis,
    pauli_matrix,
    symplectic_matrix,
    walsh_hadamard_f_to_p,
    walsh_hadamard_p_to_f,
)

CP_TOL = 1e-9
TP_TOL = 1e-10
IMAG_TOL = 1e-12


class ChannelError(ValueError):
    pass


def _qubits_for_dim(d: int) -> int:
    n = int(round(np.log2(d)))
    if 2**n != d or n < 1:
        raise ChannelError(f"dimension {d} is not a power of two")
    return n


def _basis_change(n: int) -> np.ndarray:
    # columns are vec(P_b) / sqrt(d); unitary
    d = 2**n
    return pauli_basis(n).reshape(4**n, d * d).T / np.sqrt(d)


def _realify(m: np.ndarray, what: str) -> np.ndarray:
    m = np.asarray(m)
    if np.iscomplexobj(m):
        resid = np.max(np.abs(m.imag)) if m.size else 0.0
        if resid > IMAG_TOL * max(1.0, np.max(np.abs(m))):
            raise ChannelError(
                f"{what} has imaginary residue {resid:.3g}: map is not Hermiticity preserving"
            )
        m = m.real
    return np.array(m, dtype=float)


def superop_to_choi(s: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(s.shape[0])))
    return s.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d)


def choi_to_superop(j: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(j.shape[0])))
    return j.reshape(d, d, d, d).transpose(1, 3, 0, 2).reshape(d * d, d * d)


def superop_from_pauli_basis(p: np.ndarray) -> np.ndarray:
    n = _qubits_for_dim(int(round(np.sqrt(p.shape[0]))))
    basis = pauli_basis(n)
    d = 2**n
    s = np.einsum("ab,aij,bkl->ikjl", p, basis, basis.conj())
    return s.reshape(d * d, d * d)


class Channel:
    """A linear map on n-qubit operators, stored by its real transfer matrix.

    Construction does not enforce complete positivity, so PL maps that are
    not channels are representable; use :func:`is_cptp` to check.
    """

    def __init__(self, transfer: np.ndarray):
        t = _realify(transfer, "transfer matrix")
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ChannelError(f"transfer matrix must be square, got shape {t.shape}")
        n = 0
        while 4**n < t.shape[0]:
            n += 1
        if 4**n != t.shape[0] or n == 0:
            raise ChannelError(f"transfer matrix size {t.shape[0]} is not 4^n")
        check_dense(n, transfer=True)
        t.setflags(write=False)
        self._transfer = t
        self.n = n

    def __repr__(self) -> str:
        return f"Channel(n={self.n})"

    @property
    def dim(self) -> int:
        return 2**self.n

    @property
    def transfer(self) -> np.ndarray:
        return self._transfer

    # constructors

    @classmethod
    def from_superop(cls, s: np.ndarray) -> "Channel":
        s = np.asarray(s, dtype=complex)
        n = _qubits_for_dim(int(round(np.sqrt(s.shape[0]))))
        v = _basis_change(n)
        ch = cls(v.conj().T @ s @ v)
        ch.__dict__["superop"] = s
        return ch

    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray]) -> "Channel":
        ks = [np.asarray(k, dtype=complex) for k in kraus]
        if not ks:
            raise ChannelError("empty Kraus set")
        d = ks[0].shape[0]
        for k in ks:
            if k.shape != (d, d):
                raise ChannelError(f"Kraus operators must all be {d}x{d}, got {k.shape}")
        s = sum(np.kron(k, k.conj()) for k in ks)
        ch = cls.from_superop(s)
        ch.__dict__["kraus"] = ks
        return ch

    @classmethod
    def from_choi(cls, j: np.ndarray) -> "Channel":
        j = np.asarray(j, dtype=complex)
        ch = cls.from_superop(choi_to_superop(j))
        ch.__dict__["choi"] = j
        return ch

    @classmethod
    def from_pauli_basis(cls, p: np.ndarray) -> "Channel":
        p = np.asarray(p, dtype=complex)
        ch = cls.from_superop(superop_from_pauli_basis(p))
        ch.__dict__["pauli_basis"] = p
        return ch

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> "Channel":
        return cls.from_kraus([u])

    @classmethod
    def identity(cls, n: int) -> "Channel":
        return cls(np.eye(4**n))

    @classmethod
    def pauli_conjugation(cls, word: PauliWord | str) -> "Channel":
        """The map ``rho -> P rho P``; its transfer matrix is diagonal with entries +-1."""
        w = as_word(word)
        signs = 1 - 2 * symplectic_matrix(w.n)[w.index].astype(float)
        return cls(np.diag(signs))

    # derived representations

    @cached_property
    def superop(self) -> np.ndarray:
        v = _basis_change(self.n)
        return v @ self._transfer @ v.conj().T

    @cached_property
    def choi(self) -> np.ndarray:
        return superop_to_choi(self.superop)

    @cached_property
    def pauli_basis(self) -> np.ndarray:
        n, d = self.n, self.dim
        vecs = pauli_basis(n).transpose(0, 2, 1).reshape(4**n, d * d)
        return vecs.conj() @ self.choi @ vecs.T / d**2

    @cached_property
    def kraus(self) -> list[np.ndarray]:
        """Kraus operators from the Choi eigendecomposition; requires CP."""
        evals, evecs = np.linalg.eigh((self.choi + self.choi.conj().T) / 2)
        if evals.min() < -CP_TOL * self.dim:
            raise ChannelError(f"map is not completely positive (Choi eigenvalue {evals.min():.3g})")
        d = self.dim
        return [
            np.sqrt(lam) * evecs[:, i].reshape(d, d).T
            for i, lam in enumerate(evals)
            if lam > CP_TOL * d
        ]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = self.dim
        return (self.superop @ np.asarray(rho, dtype=complex).reshape(d * d)).reshape(d, d)

    def __matmul__(self, other: "Channel") -> "Channel":
        return compose(self, other)


@dataclass(frozen=True)
class PauliChannel:
    """Diagonal-transfer map characterized by its Pauli eigenvalues ``f``.

    ``f`` may be complex only transiently (PL maps with complex parameters);
    most callers see real eigenvalues.
    """

    f: np.ndarray

    def __post_init__(self):
        f = np.array(self.f)
        if np.iscomplexobj(f) and np.max(np.abs(f.imag), initial=0.0) <= IMAG_TOL:
            f = f.real
        f.setflags(write=False)
        object.__setattr__(self, "f", f)
        _ = self.n

    @property
    def n(self) -> int:
        n = 0
        while 4**n < self.f.size:
            n += 1
        if 4**n != self.f.size or n == 0:
            raise ChannelError(f"Pauli eigenvalue vector of length {self.f.size} is not 4^n")
        return n

    @classmethod
    def from_probabilities(cls, p) -> "PauliChannel":
        return cls(walsh_hadamard_p_to_f(np.asarray(p, dtype=float)))

    @property
    def p(self) -> np.ndarray:
        return walsh_hadamard_f_to_p(self.f)

    @property
    def transfer(self) -> np.ndarray:
        return np.diag(self.f)

    def to_channel(self) -> Channel:
        return Channel(np.diag(self.f))

    def is_cptp(self, tol: float = CP_TOL, tp_tol: float = TP_TOL) -> "CptpCheck":
        if np.iscomplexobj(self.f):
            return CptpCheck(False, float("-inf"), float(abs(self.f[0] - 1)), "complex Pauli eigenvalues")
        return is_cptp(self.to_channel(), tol=tol, tp_tol=tp_tol)


@dataclass(frozen=True)
class CptpCheck:
    ok: bool
    min_choi_eigenvalue: float
    max_trace_violation: float
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def transfer_matrix(ch: Channel) -> np.ndarray:
    return ch.transfer


def pauli_eigenvalues(ch: Channel) -> np.ndarray:
    return np.diag(ch.transfer).copy()


def pauli_basis_from_kraus(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """``p_ab = sum_i kappa_ia conj(kappa_ib)`` with ``kappa_ia = 2^-n tr(P_a K_i)``."""
    ks = np.asarray([np.asarray(k, dtype=complex) for k in kraus])
    if ks.ndim != 3 or ks.shape[1] != ks.shape[2]:
        raise ChannelError(f"Kraus operators must be square matrices of equal size, got shape {ks.shape}")
    n = _qubits_for_dim(ks.shape[1])
    basis = pauli_basis(n)
    kappa = np.einsum("aij,kij->ka", basis.conj(), ks) / 2**n
    return kappa.T @ kappa.conj()


def choi_from_transfer(ch: Channel | np.ndarray) -> np.ndarray:
    if not isinstance(ch, Channel):
        ch = Channel(ch)
    return ch.choi


def compose(a: Channel, b: Channel) -> Channel:
    """``a o b``: apply ``b`` first, then ``a``."""
    if a.n != b.n:
        raise ChannelError(f"cannot compose channels on {a.n} and {b.n} qubits")
    return Channel(a.transfer @ b.transfer)


def twirl(ch: Channel, *, check: bool = True, tol: float = CP_TOL) -> PauliChannel:
    """Pauli twirl: keep only the diagonal of the transfer matrix."""
    if check:
        verdict = is_cptp(ch, tol=tol)
        if not verdict:
            raise ChannelError(f"twirl requires a CPTP input: {verdict.reason}")
    return PauliChannel(np.diag(ch.transfer).copy())


def is_cptp(ch: Channel, tol: float = CP_TOL, tp_tol: float = TP_TOL) -> CptpCheck:
    """Check complete positivity (normalized Choi PSD) and trace preservation."""
    j = ch.choi / ch.dim
    min_eig = float(np.linalg.eigvalsh((j + j.conj().T) / 2).min())
    row0 = ch.transfer[0].copy()
    row0[0] -= 1.0
    tp_violation = float(np.max(np.abs(row0)))
    reasons = []
    if min_eig < -tol:
        reasons.append(f"Choi eigenvalue {min_eig:.3g} < -{tol:g}")
    if tp_violation > tp_tol:
        reasons.append(f"trace-preservation row deviates by {tp_violation:.3g}")
    return CptpCheck(not reasons, min_eig, tp_violation, "; ".join(reasons))


def random_kraus(n: int, rank: int = 2, rng: np.random.Generator | None = None) -> list[np.ndarray]:
    """Random CPTP Kraus set from a truncated Haar-ish Stinespring isometry."""
    rng = np.random.default_rng(rng)
    d = 2**n
    g = rng.normal(size=(d * rank, d)) + 1j * rng.normal(size=(d * rank, d))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return [q[i * d:(i + 1) * d] for i in range(rank)]


def random_unitary(d: int, rng: np.random.Generator | None = None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density_matrix(d: int, rng: np.random.Generator | None = None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def unitary_channel(u: np.ndarray) -> Channel:
    return Channel.from_unitary(u)


__all__ = [
    "Channel",
    "ChannelError",
    "CptpCheck",
    "PauliChannel",
    "choi_from_transfer",
    "compose",
    "is_cptp",
    "pauli_basis_from_kraus",
    "pauli_eigenvalues",
    "pauli_matrix",
    "random_density_matrix",
    "random_kraus",
    "random_unitary",
    "transfer_matrix",
    "twirl",
    "unitary_channel",
]
