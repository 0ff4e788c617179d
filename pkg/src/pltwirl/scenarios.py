"""Worked single-qubit examples and the transition-diagram sweep.

All rates enter as dimensionless products with the evolution time
(``gamma t``, ``gamma_phi t``). Numerical routes set the time to 1.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .channel import Channel, twirl
from .lindblad import (
    GateContext,
    InconclusiveError,
    LindbladGenerator,
    csm_test_general,
    error_channel,
    gate_frame_kossakowski,
    lindblad_from_jumps,
    lindblad_transfer,
    propagate_constant,
)
from .pauli import pauli_matrix
from .plmodel import CSM_TOL, CsmVerdict, classify_pauli, lambda_from_f

X = pauli_matrix("X")
Y = pauli_matrix("Y")
Z = pauli_matrix("Z")
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|

CSMB = "CSMB"
CSMC = "CSMC"
CSMI = "CSMI"
NCSMC = "nCSMC"
INCONCLUSIVE = "INCONCLUSIVE"
ERROR = "ERROR"
REGIONS = (CSMB, CSMC, CSMI, NCSMC)

SWEEP_COLUMNS = (
    "gamma_tg",
    "gammaphi_tg",
    "region",
    "lambda_x",
    "lambda_y",
    "lambda_z",
    "pretwirl_csm",
    "min_kossakowski_eig",
)


@dataclass(frozen=True)
class NoiseRates:
    gamma: float
    gamma_phi: float

    def __post_init__(self):
        if self.gamma < 0 or self.gamma_phi < 0:
            raise ValueError(f"rates must be nonnegative, got gamma={self.gamma}, gamma_phi={self.gamma_phi}")

    @classmethod
    def from_coherence_times(cls, t1: float, t2star: float) -> "NoiseRates":
        """``gamma = 1/T1`` and ``gamma_phi = 1/T2* - 1/(2 T1)``."""
        gamma_phi = 1.0 / t2star - 0.5 / t1
        if gamma_phi < 0:
            raise ValueError(f"T2* = {t2star} exceeds 2 T1 = {2 * t1}: negative pure dephasing rate")
        return cls(1.0 / t1, gamma_phi)


def _check_nonneg(**kw):
    for name, v in kw.items():
        if v < 0:
            raise ValueError(f"{name} must be nonnegative, got {v}")


# Hadamard dephasing (and relaxation)


def ry(theta: float) -> np.ndarray:
    return scipy.linalg.expm(-0.5j * theta * Y)


def hadamard_dephasing_lambda(gphit: float) -> np.ndarray:
    _check_nonneg(gphit=gphit)
    return np.array([gphit / 2, -0.5 * np.log(np.cosh(gphit)), gphit / 2])


def hadamard_dephasing_relaxation_lambda(gphit: float, gt: float) -> np.ndarray:
    _check_nonneg(gphit=gphit, gt=gt)
    lxz = gphit / 2 + gt / 8
    ly = gt / 4 - 0.5 * np.log(np.cosh(gphit - gt / 4))
    return np.array([lxz, ly, lxz])


def hadamard_generator(gamma_phi: float, gamma: float = 0.0) -> LindbladGenerator:
    """Purely dissipative generator with jumps ``R_y(pi/4) Z R_y(-pi/4) = (X+Z)/sqrt2``
    and ``R_y(pi/4) sigma_- R_y(-pi/4)``."""
    _check_nonneg(gamma_phi=gamma_phi, gamma=gamma)
    r = ry(np.pi / 4)
    jumps = [(gamma_phi, (X + Z) / np.sqrt(2))]
    if gamma:
        jumps.append((gamma, r @ SIGMA_MINUS @ r.conj().T))
    return lindblad_from_jumps(np.zeros((2, 2)), jumps)


def hadamard_channel(gphit: float, gt: float = 0.0) -> Channel:
    return propagate_constant(hadamard_generator(gphit, gt), 1.0)


def hadamard_lambda_numeric(gphit: float, gt: float = 0.0) -> np.ndarray:
    return np.real(lambda_from_f(twirl(hadamard_channel(gphit, gt)).f).lam)


# Driven R_x gate


def rx_kossakowski(rates: NoiseRates) -> np.ndarray:
    g, gp = rates.gamma, rates.gamma_phi
    return np.array([[g, 1j * g, 0], [-1j * g, g, 0], [0, 0, 4 * gp]], dtype=complex) / 4


def is_clifford_angle(theta: float, atol: float = 1e-12) -> bool:
    m = theta / (np.pi / 2)
    return abs(m - round(m)) <= atol


@dataclass(frozen=True)
class RxGateSetup:
    lab: LindbladGenerator
    context: GateContext
    gate_frame: LindbladGenerator
    theta: float

    @property
    def clifford(self) -> bool:
        """Only rotations by multiples of pi/2 can be twirled experimentally."""
        return is_clifford_angle(self.theta)


class _RxFrame:
    # picklable, stateless evaluator t -> (H~, Gamma~(t))
    def __init__(self, amplitude: float, gamma: np.ndarray):
        self.amplitude = amplitude
        self.gamma = gamma

    def unitary(self, t: float) -> np.ndarray:
        return scipy.linalg.expm(-0.5j * self.amplitude * t * X)

    def __call__(self, t: float):
        return np.zeros((2, 2), dtype=complex), gate_frame_kossakowski(self.gamma, self.unitary(t))


def rx_gate_setup(rates: NoiseRates, amplitude: float, t_gate: float | None = None) -> RxGateSetup:
    """Resonant drive ``H = A X / 2`` with relaxation and dephasing.

    The default gate time ``pi / (2A)`` gives the sqrt(X) gate.
    """
    if amplitude <= 0:
        raise ValueError("drive amplitude must be positive")
    if t_gate is None:
        t_gate = np.pi / (2 * amplitude)
    gamma = rx_kossakowski(rates)
    lab = LindbladGenerator(1, amplitude * X / 2, gamma)
    frame = _RxFrame(amplitude, gamma)
    ctx = GateContext(1, frame.unitary, t_gate)
    gate_frame = LindbladGenerator(1, np.zeros((2, 2)), gamma, frame)
    return RxGateSetup(lab, ctx, gate_frame, amplitude * t_gate)


def rx_error_channel(gt: float, gphit: float, theta: float = np.pi / 2) -> Channel:
    """Error channel of the noisy ``R_x(theta)`` gate, with ``t_g = 1``."""
    _check_nonneg(gt=gt, gphit=gphit)
    setup = rx_gate_setup(NoiseRates(gt, gphit), theta, 1.0)
    phi = propagate_constant(setup.lab, setup.context.t_gate)
    return error_channel(phi, setup.context)


def sqrtx_lambda_numeric(gt: float, gphit: float, theta: float = np.pi / 2) -> np.ndarray:
    ch = rx_error_channel(gt, gphit, theta)
    return np.real(lambda_from_f(twirl(ch, check=False).f).lam)


def sqrtx_lambda_second_order(gt: float, gphit: float, theta: float = np.pi / 2) -> np.ndarray:
    if theta <= 0:
        raise ValueError("rotation angle must be positive")
    s = np.sin(2 * theta) / (2 * theta)
    lx = gt / 4 - np.sin(theta) ** 4 / (4 * theta**2) * (gphit - gt / 4) ** 2
    ly = gt / 8 * (1 + s) + gphit / 2 * (1 - s)
    lz = gt / 8 * (1 - s) + gphit / 2 * (1 + s)
    return np.array([lx, ly, lz])


def cumulant_C1_C2(t_h: np.ndarray, t_d: np.ndarray, t_gate: float, nodes: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """First two cumulant terms of ``exp(-t_g T_H) exp(t_g (T_H + T_D))`` by
    Gauss-Legendre quadrature of the interaction-picture dissipator."""
    if nodes < 4:
        raise ValueError("need at least 4 quadrature nodes")
    x, w = np.polynomial.legendre.leggauss(nodes)

    def td(s):
        return scipy.linalg.expm(-s * t_h) @ t_d @ scipy.linalg.expm(s * t_h)

    s1 = 0.5 * t_gate * (x + 1)
    w1 = 0.5 * t_gate * w
    outer = [td(s) for s in s1]
    c1 = sum(wi * m for wi, m in zip(w1, outer))
    c2 = np.zeros_like(c1)
    for si, wi, a in zip(s1, w1, outer):
        s2 = 0.5 * si * (x + 1)
        w2 = 0.5 * si * w
        inner = sum(wj * td(sj) for sj, wj in zip(s2, w2))
        c2 += wi * (a @ inner - inner @ a)
    return c1, 0.5 * c2


def cumulant_lambda(gt: float, gphit: float, theta: float = np.pi / 2, nodes: int = 16) -> np.ndarray:
    """PL parameters from the second-order cumulant expansion (``t_g = 1``)."""
    gamma = rx_kossakowski(NoiseRates(gt, gphit))
    t_h = lindblad_transfer(theta * X / 2, np.zeros((3, 3)))
    t_d = lindblad_transfer(np.zeros((2, 2)), gamma)
    c1, c2 = cumulant_C1_C2(t_h, t_d, 1.0, nodes)
    f1 = np.diag(c1)
    f2 = np.diag(c1 @ c1 / 2 + c2)
    log_f = f1 + f2 - f1**2 / 2
    # lambda_a = 1/4 sum_{k != 0} (-1)^<a,k> ln f_k for one qubit
    signs = np.array([[1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    return signs @ log_f[1:] / 4


def csmb_criterion(gt: float, gphit: float, which: str = "sqrtx") -> bool:
    """Second-order condition for a negative PL parameter after twirling.

    ``gamma t < (gamma_phi t)^2`` for Hadamard dephasing with relaxation and
    ``gamma t_g < (2/pi)^2 (gamma_phi t_g)^2`` for the sqrt(X) gate. Only
    meaningful for small rates (both below about 0.3).
    """
    if which == "hadamard":
        factor = 1.0
    elif which == "sqrtx":
        factor = (2 / np.pi) ** 2
    else:
        raise ValueError(f"unknown scenario {which!r}")
    return bool(gt < factor * gphit**2)


def lambda_x_root(gphit: float, hi: float | None = None) -> float:
    """Relaxation ``gamma t_g`` at which the numeric sqrt(X) ``lambda_x`` crosses zero."""
    if hi is None:
        hi = max(4 * gphit, 1e-3)
    fn = lambda g: sqrtx_lambda_numeric(g, gphit)[0]
    return brentq(fn, 0.0, hi, xtol=1e-14, rtol=1e-12)


def lambda_x_root_second_order(gphit: float) -> float:
    """Smaller root in ``g`` of ``g = (2/pi)^2 (gphit - g/4)^2``."""
    c = (2 / np.pi) ** 2
    # c/16 g^2 - (1 + c gphit / 2) g + c gphit^2 = 0
    a, b, cc = c / 16, -(1 + c * gphit / 2), c * gphit**2
    return (-b - math.sqrt(b * b - 4 * a * cc)) / (2 * a)


# Transition diagram


@dataclass
class PointResult:
    gamma_tg: float
    gammaphi_tg: float
    region: str
    lam: np.ndarray
    pretwirl: CsmVerdict | None
    message: str = ""

    @property
    def min_kossakowski_eig(self) -> float:
        return self.pretwirl.min_value if self.pretwirl is not None else float("nan")

    def row(self) -> dict:
        pre = "" if self.pretwirl is None else str(self.pretwirl.is_csm).lower()
        if self.region == INCONCLUSIVE:
            pre = "inconclusive"
        return {
            "gamma_tg": self.gamma_tg,
            "gammaphi_tg": self.gammaphi_tg,
            "region": self.region,
            "lambda_x": self.lam[0],
            "lambda_y": self.lam[1],
            "lambda_z": self.lam[2],
            "pretwirl_csm": pre,
            "min_kossakowski_eig": self.min_kossakowski_eig,
        }


def region_label(pre_csm: bool, post_csm: bool) -> str:
    if pre_csm:
        return CSMC if post_csm else CSMB
    return CSMI if post_csm else NCSMC


def classify_point(gt: float, gphit: float, theta: float = np.pi / 2, tol: float = CSM_TOL) -> PointResult:
    """Pre-twirl general test x post-twirl PL-sign test for one rate pair."""
    nan3 = np.full(3, np.nan)
    try:
        ch = rx_error_channel(gt, gphit, theta)
        post = classify_pauli(twirl(ch, check=False).f, tol=tol)
        lam = np.array([post.witness["lambda"][w][0] for w in ("X", "Y", "Z")])
    except Exception as exc:  # noqa: BLE001 - reported per point
        return PointResult(gt, gphit, ERROR, nan3, None, str(exc))
    try:
        pre = csm_test_general(ch, tol=tol)
    except InconclusiveError as exc:
        return PointResult(gt, gphit, INCONCLUSIVE, lam, None, str(exc))
    except Exception as exc:  # noqa: BLE001
        return PointResult(gt, gphit, ERROR, lam, None, str(exc))
    return PointResult(gt, gphit, region_label(pre.is_csm, post.is_csm), lam, pre)


def _classify_pair(args):
    return classify_point(*args)


@dataclass
class SweepResult:
    gamma_values: np.ndarray
    gammaphi_values: np.ndarray
    points: list[PointResult]
    boundary: list[tuple[float, float]] = field(default_factory=list)

    def boundary_csv(self) -> str:
        lines = ["gamma_tg,gammaphi_tg"] + [f"{g:.17g},{gp:.17g}" for g, gp in self.boundary]
        return "\n".join(lines) + "\n"

    def labels(self) -> np.ndarray:
        """Region labels shaped ``(len(gamma_values), len(gammaphi_values))``."""
        return np.array([p.region for p in self.points], dtype=object).reshape(
            len(self.gamma_values), len(self.gammaphi_values)
        )

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for p in self.points:
            out[p.region] = out.get(p.region, 0) + 1
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for p in self.points:
            row = p.row()
            writer.writerow([_fmt(row[c]) for c in SWEEP_COLUMNS])
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def default_workers() -> int:
    env = os.environ.get("PLTWIRL_WORKERS")
    return max(1, int(env)) if env else 1


def sweep_phase_diagram(
    grid: tuple[int, int] = (60, 60),
    gmax: float = 3.0,
    gpmax: float = 3.0,
    *,
    workers: int | None = None,
    refine: bool = False,
    theta: float = np.pi / 2,
) -> SweepResult:
    """Classify every point of a ``gamma t_g x gamma_phi t_g`` grid on
    ``[0, gmax] x [0, gpmax]`` (endpoints included).

    Points are independent; with ``workers > 1`` they are farmed out to a
    process pool but returned in grid order. ``refine`` bisects along each
    ``gamma_phi`` grid line to locate the post-twirl sign boundary.
    """
    ng, ngp = grid
    gs = np.linspace(0.0, gmax, ng)
    gps = np.linspace(0.0, gpmax, ngp)
    pairs = [(float(g), float(gp), theta) for g in gs for gp in gps]
    workers = default_workers() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_classify_pair, pairs, chunksize=max(1, len(pairs) // (4 * workers))))
    else:
        points = [_classify_pair(p) for p in pairs]
    result = SweepResult(gs, gps, points)
    if refine:
        result.boundary = _refine_boundary(result, theta)
    return result


def _refine_boundary(result: SweepResult, theta: float) -> list[tuple[float, float]]:
    # post-twirl verdict flips where lambda_x changes sign between neighbouring gamma values
    lam_x = np.array([p.lam[0] for p in result.points]).reshape(len(result.gamma_values), -1)
    out = []
    for j, gp in enumerate(result.gammaphi_values):
        col = lam_x[:, j]
        for i in range(len(col) - 1):
            if np.isfinite(col[i]) and np.isfinite(col[i + 1]) and (col[i] < 0) != (col[i + 1] < 0):
                lo, hi = result.gamma_values[i], result.gamma_values[i + 1]
                root = brentq(lambda g: sqrtx_lambda_numeric(g, gp, theta)[0], lo, hi, xtol=1e-12)
                out.append((float(root), float(gp)))
    return out


def pretwirl_threshold(gt: float, lo: float = 0.0, hi: float = 3.0, iters: int = 50) -> float:
    """Smallest ``gamma_phi t_g`` (by bisection) where the sqrt(X) error channel
    stops being CSM at fixed ``gamma t_g``; ``nan`` if no change in ``[lo, hi]``."""

    def csm(gp):
        try:
            return csm_test_general(rx_error_channel(gt, gp)).is_csm
        except InconclusiveError:
            return False

    if not csm(lo) or csm(hi):
        return float("nan")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if csm(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def hadamard_report(gphit: float, gt: float = 0.0) -> dict:
    """Closed form, numerics and post-twirl verdict for Hadamard dephasing
    (with relaxation when ``gt > 0``)."""
    closed = hadamard_dephasing_relaxation_lambda(gphit, gt)
    numeric = hadamard_lambda_numeric(gphit, gt)
    verdict = classify_pauli(twirl(hadamard_channel(gphit, gt)).f)
    return {
        "scenario": "hadamard",
        "gammaphi_t": gphit,
        "gamma_t": gt,
        "lambda_closed_form": dict(zip("xyz", closed.tolist())),
        "lambda_numeric": dict(zip("xyz", numeric.tolist())),
        "verdict": verdict.to_json(),
    }


def sqrtx_report(gt: float, gphit: float, theta: float = np.pi / 2) -> dict:
    point = classify_point(gt, gphit, theta)
    return {
        "scenario": "sqrtx" if abs(theta - np.pi / 2) < 1e-12 else "rx",
        "gamma_tg": gt,
        "gammaphi_tg": gphit,
        "theta": theta,
        "clifford": is_clifford_angle(theta),
        "lambda_numeric": dict(zip("xyz", point.lam.tolist())),
        "lambda_second_order": dict(zip("xyz", sqrtx_lambda_second_order(gt, gphit, theta).tolist())),
        "csmb_criterion": csmb_criterion(gt, gphit) if is_clifford_angle(theta) else None,
        "region": point.region,
        "pretwirl": None if point.pretwirl is None else point.pretwirl.to_json(),
        "message": point.message,
    }
