"""GKSL generators in the Pauli transfer picture.

The Kossakowski matrix is indexed over the non-identity Pauli words
``F_a = P_a`` (canonical order, identity dropped), so for one qubit its rows
are ``X, Y, Z``. The generator is

    L(rho) = -i[H, rho] + sum_ab Gamma_ab (F_a rho F_b^dag - 1/2 {F_b^dag F_a, rho}).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .channel import Channel, ChannelError, _basis_change, _realify, compose, superop_from_pauli_basis
from .pauli import check_dense, pauli_basis
from .plmodel import CsmVerdict, classify_pauli

HERM_TOL = 1e-12
SPLIT_TOL = 1e-10
GENERAL_CSM_TOL = 1e-10

Evaluator = Callable[[float], "tuple[np.ndarray, np.ndarray]"]


class InconclusiveError(RuntimeError):
    """The principal matrix logarithm is unavailable, so no CSM verdict is given."""


def _check_hermitian(m: np.ndarray, name: str, tol: float = HERM_TOL) -> None:
    dev = np.max(np.abs(m - m.conj().T), initial=0.0)
    if dev > tol * max(1.0, np.max(np.abs(m), initial=0.0)):
        raise ValueError(f"{name} is not Hermitian (deviation {dev:.3g})")


@dataclass(frozen=True)
class LindbladGenerator:
    """Hamiltonian plus Kossakowski matrix, optionally time dependent.

    ``evaluator``, when given, maps ``t`` to ``(H(t), Gamma(t))`` and must be
    reentrant; ``hamiltonian`` and ``kossakowski`` then hold the ``t = 0`` values.
    """

    n: int
    hamiltonian: np.ndarray
    kossakowski: np.ndarray
    evaluator: Evaluator | None = None

    def __post_init__(self):
        check_dense(self.n, transfer=True)
        d, m = 2**self.n, 4**self.n - 1
        h = np.asarray(self.hamiltonian, dtype=complex)
        g = np.asarray(self.kossakowski, dtype=complex)
        if h.shape != (d, d):
            raise ValueError(f"Hamiltonian must be {d}x{d}, got {h.shape}")
        if g.shape != (m, m):
            raise ValueError(f"Kossakowski matrix must be {m}x{m}, got {g.shape}")
        _check_hermitian(h, "Hamiltonian")
        _check_hermitian(g, "Kossakowski matrix")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "kossakowski", g)

    @property
    def time_dependent(self) -> bool:
        return self.evaluator is not None

    def at(self, t: float) -> "LindbladGenerator":
        if self.evaluator is None:
            return self
        h, g = self.evaluator(t)
        return LindbladGenerator(self.n, h, g)

    def kossakowski_spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.kossakowski)

    def is_lindblad_form(self, tol: float = GENERAL_CSM_TOL) -> bool:
        return bool(_psd(self.kossakowski, tol)[0])


@dataclass(frozen=True)
class GateContext:
    n: int
    unitary: Callable[[float], np.ndarray]
    t_gate: float

    def __post_init__(self):
        if self.t_gate <= 0:
            raise ValueError("gate time must be positive")


def lindblad_transfer(h: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Real transfer matrix of the GKSL generator with Hamiltonian ``h`` and
    Kossakowski matrix ``gamma``."""
    h = np.asarray(h, dtype=complex)
    gamma = np.asarray(gamma, dtype=complex)
    d = h.shape[0]
    n = int(round(np.log2(d)))
    basis = pauli_basis(n)
    c = np.zeros((4**n, 4**n), dtype=complex)
    c[1:, 1:] = gamma
    eye = np.eye(d)
    # sum_ab Gamma_ab F_b^dag F_a
    k = np.einsum("ab,bij,ajk->ik", gamma, basis[1:], basis[1:])
    s = (
        -1j * (np.kron(h, eye) - np.kron(eye, h.T))
        + superop_from_pauli_basis(c)
        - 0.5 * (np.kron(k, eye) + np.kron(eye, k.T))
    )
    v = _basis_change(n)
    return _realify(v.conj().T @ s @ v, "generator transfer matrix")


def generator_transfer(g: LindbladGenerator, t: float | None = None) -> np.ndarray:
    if t is not None and g.time_dependent:
        g = g.at(t)
    return lindblad_transfer(g.hamiltonian, g.kossakowski)


def kossakowski_from_jumps(jumps: Sequence[tuple[float, np.ndarray]], n: int) -> tuple[np.ndarray, np.ndarray]:
    """Kossakowski matrix for ``sum_k rate_k D[L_k]``.

    Identity components of the jump operators cannot be represented over the
    traceless basis; they are moved into a Hamiltonian correction, returned
    as the second element.
    """
    basis = pauli_basis(n)
    d = 2**n
    gamma = np.zeros((4**n - 1, 4**n - 1), dtype=complex)
    h_extra = np.zeros((d, d), dtype=complex)
    for rate, op in jumps:
        op = np.asarray(op, dtype=complex)
        u = np.einsum("aij,ij->a", basis.conj(), op) / d
        gamma += rate * np.outer(u[1:], u[1:].conj())
        traceless = op - u[0] * np.eye(d)
        h_extra += rate * 0.5j * (np.conj(u[0]) * traceless - u[0] * traceless.conj().T)
    return gamma, h_extra


def lindblad_from_jumps(hamiltonian: np.ndarray, jumps: Sequence[tuple[float, np.ndarray]]) -> LindbladGenerator:
    h = np.asarray(hamiltonian, dtype=complex)
    n = int(round(np.log2(h.shape[0])))
    gamma, h_extra = kossakowski_from_jumps(jumps, n)
    return LindbladGenerator(n, h + h_extra, gamma)


def propagate_constant(g: LindbladGenerator, t: float) -> Channel:
    """``exp(t L)`` for a time-independent generator."""
    if g.time_dependent:
        raise ValueError("propagate_constant needs a time-independent generator")
    if t < 0:
        raise ValueError("propagation time must be nonnegative")
    return Channel(scipy.linalg.expm(t * generator_transfer(g)))


def propagate_timedep(g: LindbladGenerator, t: float, steps: int) -> Channel:
    """Time-ordered propagator as a product of midpoint exponentials.

    Second order in the step size; each factor is CPTP whenever the
    Kossakowski matrix at the midpoint is PSD.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if t < 0:
        raise ValueError("propagation time must be nonnegative")
    dt = t / steps
    total = np.eye(4**g.n)
    for k in range(steps):
        step = scipy.linalg.expm(dt * generator_transfer(g, (k + 0.5) * dt))
        total = step @ total
    return Channel(total)


def gate_frame_kossakowski(gamma: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Kossakowski matrix in the frame ``rho~ = u^dag rho u`` of the gate.

    Jump operators become ``u^dag F_c u = sum_a R_ac F_a`` where ``R`` is the
    non-identity block of the transfer matrix of ``rho -> u^dag rho u``, i.e.
    the transpose of that of ``rho -> u rho u^dag``. Returns ``R gamma R^T``;
    the spectrum is unchanged.
    """
    gamma = np.asarray(gamma, dtype=complex)
    r = Channel.from_unitary(u).transfer[1:, 1:].T
    if gamma.shape != r.shape:
        raise ValueError(f"Kossakowski matrix shape {gamma.shape} does not match unitary ({r.shape})")
    return r @ gamma @ r.T


def error_channel(phi: Channel, ctx: GateContext) -> Channel:
    """Noise channel ``E`` in ``Phi = U o E``."""
    u = np.asarray(ctx.unitary(ctx.t_gate))
    undo = Channel.from_unitary(u.conj().T)
    if undo.n != phi.n:
        raise ChannelError(f"gate acts on {undo.n} qubits, channel on {phi.n}")
    return compose(undo, phi)


def hamiltonian_dissipative_split(transfer: np.ndarray, tol: float = SPLIT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Unique ``(H, Gamma)`` with traceless ``H`` reproducing a generator.

    Reads both pieces off the Pauli-basis matrix ``c_ab`` of the generator:
    ``Gamma`` is its non-identity block and ``H`` follows from the
    anti-Hermitian part of ``sum_a c_a0 P_a``.
    """
    transfer = np.asarray(transfer)
    if np.max(np.abs(transfer[0]), initial=0.0) > tol * max(1.0, np.max(np.abs(transfer))):
        raise ValueError("generator does not annihilate the trace (row 0 is nonzero)")
    c = Channel(transfer).pauli_basis
    n = int(round(np.log(c.shape[0]) / np.log(4)))
    basis = pauli_basis(n)
    d = 2**n
    gamma = c[1:, 1:]
    gamma = (gamma + gamma.conj().T) / 2
    g_op = np.einsum("a,aij->ij", c[1:, 0], basis[1:])
    h = 0.5j * (g_op - g_op.conj().T)
    h = (h + h.conj().T) / 2
    h -= np.trace(h) / d * np.eye(d)
    rebuilt = lindblad_transfer(h, gamma)
    resid = np.max(np.abs(rebuilt - transfer))
    if resid > tol * max(1.0, np.max(np.abs(transfer))):
        raise ValueError(f"generator is not of GKSL shape: reconstruction residual {resid:.3g}")
    return h, gamma


def _psd(gamma: np.ndarray, tol: float) -> tuple[bool, np.ndarray]:
    evals = np.linalg.eigvalsh((gamma + gamma.conj().T) / 2)
    scale = 1.0 + np.linalg.norm(gamma, 2)
    return bool(evals.min(initial=0.0) >= -tol * scale), evals


def principal_log(transfer: np.ndarray) -> np.ndarray:
    """Principal logarithm of a transfer matrix, or :class:`InconclusiveError`."""
    t = np.asarray(transfer, dtype=float)
    evals = np.linalg.eigvals(t)
    scale = max(1.0, np.max(np.abs(evals)))
    if np.any(np.abs(evals) <= 1e-12 * scale):
        raise InconclusiveError("inconclusive: principal branch unavailable (zero eigenvalue)")
    on_cut = (np.abs(evals.imag) <= 1e-10 * scale) & (evals.real < 0)
    if np.any(on_cut):
        raise InconclusiveError(
            "inconclusive: principal branch unavailable (eigenvalue on the negative real axis: "
            f"{evals[on_cut][0].real:.6g})"
        )
    return scipy.linalg.logm(t)


def csm_test_general(ch: Channel, tol: float = GENERAL_CSM_TOL) -> CsmVerdict:
    """CSM test for an arbitrary channel via its principal logarithm.

    The channel is CSM if ``log T`` is real (Hermiticity preserving),
    annihilates the trace, and has a PSD Kossakowski matrix. Other branches
    of the logarithm are not searched.
    """
    log_t = principal_log(ch.transfer)
    imag = float(np.max(np.abs(np.imag(log_t)), initial=0.0))
    log_r = np.real(log_t)
    herm_ok = imag <= tol * max(1.0, np.max(np.abs(log_r)))
    row0 = float(np.max(np.abs(log_r[0])))
    if row0 > 1e-8 * max(1.0, np.max(np.abs(log_r))):
        raise ValueError(f"channel is not trace preserving (log row 0 deviates by {row0:.3g})")
    log_r = log_r.copy()
    log_r[0] = 0.0
    h, gamma = hamiltonian_dissipative_split(log_r, tol=max(SPLIT_TOL, 1e3 * tol))
    psd_ok, evals = _psd(gamma, tol)
    witness = {
        "kossakowski_eigenvalues": evals.tolist(),
        "log_imag_residue": imag,
        "hamiltonian_norm": float(np.linalg.norm(h, 2)),
    }
    return CsmVerdict(bool(psd_ok and herm_ok), float(evals.min()), tol, witness, "general")


def classify_channel(ch: Channel, tol: float = GENERAL_CSM_TOL, diag_tol: float = 1e-12) -> CsmVerdict:
    """PL-sign test for Pauli channels (diagonal transfer), log test otherwise."""
    t = ch.transfer
    off = t - np.diag(np.diag(t))
    if np.max(np.abs(off), initial=0.0) <= diag_tol:
        return classify_pauli(np.diag(t), tol=tol)
    return csm_test_general(ch, tol=tol)
