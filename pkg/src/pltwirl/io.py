"""JSON wire formats.

Complex numbers are ``[re, im]`` pairs. Channels::

    {"n": 1, "repr": "transfer" | "kraus" | "choi" | "pauli_basis", "data": ...}

Transfer data may be a nested real matrix or a flat row-major list. PL
parameters::

    {"n": 2, "terms": [{"word": "XZ", "lambda": [re, im]}, ...]}
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .channel import Channel, PauliChannel
from .lindblad import LindbladGenerator
from .pauli import PauliParseError, pauli_from_label
from .plmodel import PLParams

REPRS = ("transfer", "kraus", "choi", "pauli_basis")


class FormatError(ValueError):
    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def encode_matrix(m: np.ndarray) -> list:
    m = np.asarray(m)
    if np.iscomplexobj(m):
        return [[encode_complex(v) for v in row] for row in m]
    return m.tolist()


def decode_number(v, field: str) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise FormatError(f"expected a number or [re, im] pair, got {v!r}", field)


def decode_matrix(data, field: str) -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise FormatError("expected a nested list (matrix)", field)
    rows = [[decode_number(v, field) for v in row] for row in data]
    if len({len(r) for r in rows}) != 1:
        raise FormatError("ragged matrix rows", field)
    return np.array(rows, dtype=complex)


def _require(obj: dict, key: str, kind) -> Any:
    if not isinstance(obj, dict):
        raise FormatError("expected a JSON object", None)
    if key not in obj:
        raise FormatError(f"missing field {key!r}", key)
    if not isinstance(obj[key], kind) or isinstance(obj[key], bool) and kind is not bool:
        raise FormatError(f"field {key!r} has the wrong type", key)
    return obj[key]


def channel_to_json(ch: Channel, repr: str = "transfer") -> dict:
    if repr == "transfer":
        data = ch.transfer.tolist()
    elif repr == "kraus":
        data = [encode_matrix(k.astype(complex)) for k in ch.kraus]
    elif repr == "choi":
        data = encode_matrix(ch.choi.astype(complex))
    elif repr == "pauli_basis":
        data = encode_matrix(ch.pauli_basis.astype(complex))
    else:
        raise FormatError(f"unknown representation {repr!r}", "repr")
    return {"n": ch.n, "repr": repr, "data": data}


def channel_from_json(obj: dict) -> Channel:
    n = _require(obj, "n", int)
    rep = _require(obj, "repr", str)
    data = _require(obj, "data", list)
    try:
        if rep == "transfer":
            if data and not isinstance(data[0], list):
                flat = np.array([decode_number(v, "data").real for v in data])
                if flat.size != 16**n:
                    raise FormatError(f"flat transfer data needs {16**n} entries, got {flat.size}", "data")
                t = flat.reshape(4**n, 4**n)
            else:
                t = decode_matrix(data, "data")
            ch = Channel(t)
        elif rep == "kraus":
            ch = Channel.from_kraus([decode_matrix(k, "data") for k in data])
        elif rep == "choi":
            ch = Channel.from_choi(decode_matrix(data, "data"))
        elif rep == "pauli_basis":
            ch = Channel.from_pauli_basis(decode_matrix(data, "data"))
        else:
            raise FormatError(f"unknown representation {rep!r}; expected one of {REPRS}", "repr")
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(str(exc), "data") from exc
    if ch.n != n:
        raise FormatError(f"declared n={n} but data describes {ch.n} qubits", "n")
    return ch


def pauli_vector_to_json(values, n: int | None = None) -> dict:
    values = np.asarray(values)
    if n is None:
        n = int(round(np.log(values.size) / np.log(4)))
    vals = [encode_complex(v) for v in values] if np.iscomplexobj(values) else values.tolist()
    return {"n": n, "values": vals}


def pauli_vector_from_json(obj: dict) -> np.ndarray:
    n = _require(obj, "n", int)
    vals = _require(obj, "values", list)
    if len(vals) != 4**n:
        raise FormatError(f"expected {4**n} values for n={n}, got {len(vals)}", "values")
    arr = np.array([decode_number(v, "values") for v in vals])
    return arr.real if np.all(arr.imag == 0) else arr


def pauli_channel_to_json(pc: PauliChannel) -> dict:
    out = channel_to_json(pc.to_channel())
    out["f"] = pauli_vector_to_json(pc.f, pc.n)["values"]
    out["p"] = pauli_vector_to_json(pc.p, pc.n)["values"]
    return out


def pl_to_json(pl: PLParams) -> dict:
    return {
        "n": pl.n,
        "terms": [{"word": w.label, "lambda": encode_complex(v)} for w, v in zip(pl.support, pl.lam.tolist())],
    }


def pl_from_json(obj: dict) -> PLParams:
    n = _require(obj, "n", int)
    terms = _require(obj, "terms", list)
    words, lams = [], []
    for i, t in enumerate(terms):
        field = f"terms[{i}]"
        word = _require(t, "word", str)
        try:
            w = pauli_from_label(word)
        except PauliParseError as exc:
            raise FormatError(str(exc), f"{field}.word") from exc
        if "lambda" not in t:
            raise FormatError("missing field 'lambda'", f"{field}.lambda")
        words.append(w)
        lams.append(decode_number(t["lambda"], f"{field}.lambda"))
    lam = np.array(lams, dtype=complex)
    try:
        return PLParams(n, tuple(words), lam)
    except ValueError as exc:
        raise FormatError(str(exc), "terms") from exc


def fit_input_from_json(obj: dict) -> tuple[dict, dict, list, bool]:
    """Parse ``{"f": [...], "support": [...], "allow_negative": bool}``.

    Returns measured values, weights and support keyed by label. A ``sigma``
    on a measurement becomes the weight ``(value / sigma)^2``, the inverse
    variance of ``ln f`` to first order.
    """
    entries = _require(obj, "f", list)
    support = _require(obj, "support", list)
    allow = obj.get("allow_negative", True)
    if not isinstance(allow, bool):
        raise FormatError("field 'allow_negative' must be a boolean", "allow_negative")
    measured, weights = {}, {}
    for i, e in enumerate(entries):
        word = _require(e, "word", str)
        value = _require(e, "value", (int, float))
        try:
            pauli_from_label(word)
        except PauliParseError as exc:
            raise FormatError(str(exc), f"f[{i}].word") from exc
        measured[word] = float(value)
        sigma = e.get("sigma")
        if sigma is not None:
            if not isinstance(sigma, (int, float)) or sigma <= 0:
                raise FormatError("sigma must be a positive number", f"f[{i}].sigma")
            weights[word] = (value / sigma) ** 2
    for i, s in enumerate(support):
        if not isinstance(s, str):
            raise FormatError("support entries must be Pauli labels", f"support[{i}]")
        try:
            pauli_from_label(s)
        except PauliParseError as exc:
            raise FormatError(str(exc), f"support[{i}]") from exc
    return measured, weights, list(support), allow


def generator_to_json(g: LindbladGenerator) -> dict:
    return {"n": g.n, "H": encode_matrix(g.hamiltonian), "Gamma": encode_matrix(g.kossakowski)}


def generator_from_json(obj: dict) -> LindbladGenerator:
    n = _require(obj, "n", int)
    h = decode_matrix(_require(obj, "H", list), "H")
    gamma = decode_matrix(_require(obj, "Gamma", list), "Gamma")
    try:
        return LindbladGenerator(n, h, gamma)
    except ValueError as exc:
        raise FormatError(str(exc), "Gamma" if "Kossakowski" in str(exc) else "H") from exc


def load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})", None) from exc
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}", None) from exc


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"
