"""n-qubit Pauli words in symplectic form and the Walsh-Hadamard transform.

Indexing convention
-------------------
Vectors over Pauli words (Pauli eigenvalues ``f``, probabilities ``p``) have
length ``4**n``. A word is indexed as a base-4 number whose digits are the
per-qubit letters ``I=0, X=1, Y=2, Z=3``, with the leftmost label character
being the most significant digit. For one qubit the order is ``(I, X, Y, Z)``;
for two it is ``II, IX, IY, IZ, XI, ...``. Index 0 is always the identity.

Phases follow ``Y = iXZ``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

MAX_DENSE_QUBITS = 6
MAX_TRANSFER_QUBITS = 5

_LETTERS = "IXYZ"
# letter digit -> (x bit, z bit)
_DIGIT_BITS = ((0, 0), (1, 0), (1, 1), (0, 1))
_BITS_DIGIT = {bits: d for d, bits in enumerate(_DIGIT_BITS)}

_SINGLE = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# (-1)^<a,k> for single-qubit letters in I, X, Y, Z order
_SIGN_1Q = np.array(
    [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]], dtype=float
)


class PauliParseError(ValueError):
    pass


class NonTracePreservingWarning(UserWarning):
    """Issued when a Pauli-eigenvalue vector has ``f_0 != 1``."""


def check_dense(n: int, *, transfer: bool = False) -> None:
    cap = MAX_TRANSFER_QUBITS if transfer else MAX_DENSE_QUBITS
    if n < 1:
        raise ValueError(f"qubit count must be positive, got {n}")
    if n > cap:
        what = "4^n x 4^n transfer matrices" if transfer else "dense 2^n matrices"
        raise ValueError(f"n={n} exceeds the cap of {cap} qubits for {what}")


@dataclass(frozen=True)
class PauliWord:
    """A Pauli word with phase dropped, stored as x and z bit tuples."""

    x: tuple[int, ...]
    z: tuple[int, ...]

    def __post_init__(self):
        if len(self.x) != len(self.z):
            raise ValueError("x and z bit vectors must have equal length")
        if len(self.x) == 0:
            raise ValueError("a Pauli word needs at least one qubit")

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def label(self) -> str:
        return "".join(_LETTERS[_BITS_DIGIT[(xi, zi)]] for xi, zi in zip(self.x, self.z))

    @property
    def index(self) -> int:
        idx = 0
        for xi, zi in zip(self.x, self.z):
            idx = 4 * idx + _BITS_DIGIT[(xi, zi)]
        return idx

    @property
    def weight(self) -> int:
        return sum(1 for xi, zi in zip(self.x, self.z) if xi or zi)

    def is_identity(self) -> bool:
        return not any(self.x) and not any(self.z)

    @classmethod
    def from_index(cls, index: int, n: int) -> "PauliWord":
        if not 0 <= index < 4**n:
            raise ValueError(f"index {index} out of range for n={n}")
        digits = []
        for _ in range(n):
            digits.append(index % 4)
            index //= 4
        digits.reverse()
        return cls(tuple(_DIGIT_BITS[d][0] for d in digits), tuple(_DIGIT_BITS[d][1] for d in digits))

    @classmethod
    def identity(cls, n: int) -> "PauliWord":
        return cls((0,) * n, (0,) * n)

    def __str__(self) -> str:
        return self.label


def pauli_from_label(label: str) -> PauliWord:
    """Parse a label such as ``"IXYZ"`` into a :class:`PauliWord`."""
    if not label:
        raise PauliParseError("empty Pauli label")
    x, z = [], []
    for pos, ch in enumerate(label):
        if ch not in _LETTERS:
            raise PauliParseError(f"invalid character {ch!r} at position {pos} in Pauli label {label!r}")
        xi, zi = _DIGIT_BITS[_LETTERS.index(ch)]
        x.append(xi)
        z.append(zi)
    return PauliWord(tuple(x), tuple(z))


def as_word(w: PauliWord | str) -> PauliWord:
    return pauli_from_label(w) if isinstance(w, str) else w


def all_words(n: int) -> Iterator[PauliWord]:
    for idx in range(4**n):
        yield PauliWord.from_index(idx, n)


def _same_size(a: PauliWord, b: PauliWord) -> None:
    if a.n != b.n:
        raise ValueError(f"Pauli words act on different qubit counts ({a.n} vs {b.n})")


def symplectic_product(a: PauliWord, b: PauliWord) -> int:
    """Return 0 if ``a`` and ``b`` commute, 1 if they anticommute."""
    _same_size(a, b)
    return (sum(ax * bz for ax, bz in zip(a.x, b.z)) + sum(az * bx for az, bx in zip(a.z, b.x))) % 2


def multiply(a: PauliWord, b: PauliWord) -> tuple[complex, PauliWord]:
    """Product ``P_a P_b = phase * P_c``.

    Each qubit letter is ``i^(x z) X^x Z^z``; moving ``Z^za`` past ``X^xb``
    costs ``(-1)^(za xb)``.
    """
    _same_size(a, b)
    x = tuple(i ^ j for i, j in zip(a.x, b.x))
    z = tuple(i ^ j for i, j in zip(a.z, b.z))
    k = 0
    for ax, az, bx, bz, cx, cz in zip(a.x, a.z, b.x, b.z, x, z):
        k += ax * az + bx * bz + 2 * az * bx - cx * cz
    phase = (1, 1j, -1, -1j)[k % 4]
    return phase, PauliWord(x, z)


def pauli_matrix(a: PauliWord | str) -> np.ndarray:
    a = as_word(a)
    check_dense(a.n)
    out = np.ones((1, 1), dtype=complex)
    for xi, zi in zip(a.x, a.z):
        out = np.kron(out, _SINGLE[_BITS_DIGIT[(xi, zi)]])
    return out


@lru_cache(maxsize=None)
def pauli_basis(n: int) -> np.ndarray:
    """All ``4**n`` Pauli matrices stacked in canonical order, shape ``(4**n, 2**n, 2**n)``."""
    check_dense(n, transfer=True)
    basis = np.ones((1, 1, 1), dtype=complex)
    for _ in range(n):
        basis = np.einsum("aij,bkl->abikjl", basis, np.stack(_SINGLE))
        s = basis.shape
        basis = basis.reshape(s[0] * s[1], s[2] * s[3], s[4] * s[5])
    basis.setflags(write=False)
    return basis


@lru_cache(maxsize=None)
def symplectic_matrix(n: int) -> np.ndarray:
    """Matrix of ``<a,k>`` over all pairs of words, as int8 bits."""
    check_dense(n, transfer=True)
    sign = np.ones((1, 1))
    for _ in range(n):
        sign = np.kron(sign, _SIGN_1Q)
    bits = ((1 - sign) // 2).astype(np.int8)
    bits.setflags(write=False)
    return bits


def _check_length(v: np.ndarray) -> int:
    size = v.shape[-1]
    n = 0
    while 4**n < size:
        n += 1
    if 4**n != size or n == 0:
        raise ValueError(f"Pauli vector length {size} is not 4^n for n >= 1")
    return n


def _fast_wht(v: np.ndarray) -> np.ndarray:
    n = _check_length(v)
    t = np.asarray(v).reshape((4,) * n)
    for q in range(n):
        t = np.moveaxis(np.tensordot(_SIGN_1Q, t, axes=([1], [q])), 0, q)
    return t.reshape(4**n)


def walsh_hadamard_naive(v: Sequence[float] | np.ndarray) -> np.ndarray:
    """Unnormalized transform ``sum_k (-1)^<a,k> v_k`` by the direct double loop."""
    v = np.asarray(v)
    n = _check_length(v)
    words = list(all_words(n))
    out = np.zeros(4**n, dtype=np.result_type(v.dtype, float))
    for a in words:
        out[a.index] = sum((-1) ** symplectic_product(a, k) * v[k.index] for k in words)
    return out


def walsh_hadamard_p_to_f(p: Sequence[float] | np.ndarray) -> np.ndarray:
    """Pauli eigenvalues ``f_a = sum_k (-1)^<a,k> p_k`` of a Pauli channel."""
    return _fast_wht(np.asarray(p))


def walsh_hadamard_f_to_p(f: Sequence[float] | np.ndarray, *, tol: float = 1e-10) -> np.ndarray:
    """Error probabilities ``p_a = 4^-n sum_k (-1)^<a,k> f_k``.

    Inputs with ``f_0 != 1`` are transformed anyway (the result then sums to
    ``f_0``) and a :class:`NonTracePreservingWarning` is issued.
    """
    f = np.asarray(f)
    if abs(f[0] - 1) > tol:
        warnings.warn(f"f_0 = {f[0]!r} != 1: map is not trace preserving", NonTracePreservingWarning, stacklevel=2)
    return _fast_wht(f) / f.size
