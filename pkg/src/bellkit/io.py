"""JSON documents exchanged by the command line.

Every float is written with 17 significant digits and object keys are sorted,
so identical inputs give byte-identical output. Matrices use
``{"rows": r, "cols": c, "data": [[re, im], ...]}`` in row-major order.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .config import FORMAT_VERSION
from .correlations import BellFunctional, CorrelationTensor, JointDistribution, LvmModel
from .errors import InvalidInputError
from .qcore import BinaryPovm, MeasurementAssembly, QuantumState, SloMap
from .wwzb import DistillabilityCertificate, WwzbInequality


def _number(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise InvalidInputError("cannot serialize a non-finite number")
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, 17-significant-digit floats."""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _number(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _document(kind: str, **fields) -> dict:
    return {"format": FORMAT_VERSION, "type": kind, **fields}


def _check(doc, kind: str) -> dict:
    if not isinstance(doc, dict):
        raise InvalidInputError(f"expected a JSON object for {kind}")
    if "format" in doc and doc["format"] != FORMAT_VERSION:
        raise InvalidInputError(f"unsupported format tag {doc['format']!r}")
    if "type" in doc and kind is not None and doc["type"] != kind:
        raise InvalidInputError(f"expected a {kind!r} document, got {doc['type']!r}")
    return doc


def _field(doc, key):
    try:
        return doc[key]
    except KeyError:
        raise InvalidInputError(f"missing field {key!r}") from None


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"rows": m.shape[0], "cols": m.shape[1],
            "data": [[float(z.real), float(z.imag)] for z in m.reshape(-1)]}


def matrix_from_json(doc) -> np.ndarray:
    try:
        rows, cols = int(doc["rows"]), int(doc["cols"])
        data = np.array(doc["data"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed matrix: {exc}") from None
    if data.shape != (rows * cols, 2):
        raise InvalidInputError("matrix data length does not match rows x cols")
    return (data[:, 0] + 1j * data[:, 1]).reshape(rows, cols)


def state_to_json(state: QuantumState) -> dict:
    return _document("state", dims=list(state.dims), rho=matrix_to_json(state.rho))


def state_from_json(doc) -> QuantumState:
    doc = _check(doc, "state")
    return QuantumState(tuple(_field(doc, "dims")), matrix_from_json(_field(doc, "rho")))


def assembly_to_json(assembly: MeasurementAssembly) -> dict:
    parties = [[{"effect_1": matrix_to_json(p.effect_1), "effect_2": matrix_to_json(p.effect_2)} for p in pair]
               for pair in assembly.povms]
    return _document("assembly", parties=parties)


def assembly_from_json(doc) -> MeasurementAssembly:
    doc = _check(doc, "assembly")
    pairs = []
    for pair in _field(doc, "parties"):
        if len(pair) != 2:
            raise InvalidInputError("each party needs exactly two settings")
        pairs.append(tuple(BinaryPovm(matrix_from_json(_field(p, "effect_1")),
                                      matrix_from_json(_field(p, "effect_2"))) for p in pair))
    return MeasurementAssembly(tuple(pairs))


def kraus_to_json(slo: SloMap) -> list:
    return [[matrix_to_json(f) for f in factors] for factors in slo.kraus]


def kraus_from_json(data) -> SloMap:
    if not isinstance(data, list) or not data:
        raise InvalidInputError("Kraus list must be a non-empty list")
    return SloMap(tuple(tuple(matrix_from_json(f) for f in factors) for factors in data))


def slo_to_json(slo: SloMap) -> dict:
    return _document("slo", kraus=kraus_to_json(slo))


def slo_from_json(doc) -> SloMap:
    doc = _check(doc, "slo")
    return kraus_from_json(_field(doc, "kraus"))


def inequality_to_json(ineq) -> dict:
    if isinstance(ineq, WwzbInequality):
        return {"type": "wwzb", "parties": ineq.parties, "epsilon": ineq.bitstring}
    return {"type": "table", "parties": ineq.parties, "coeffs": ineq.coeffs.reshape(-1).tolist()}


def inequality_from_json(doc):
    doc = _check(doc, None)
    kind = doc.get("type")
    n = int(_field(doc, "parties"))
    if kind == "wwzb":
        return WwzbInequality.from_bitstring(n, str(_field(doc, "epsilon")))
    if kind == "table":
        return BellFunctional(n, np.array(_field(doc, "coeffs"), dtype=float))
    raise InvalidInputError(f"unknown inequality type {kind!r}")


def distribution_to_json(dist: JointDistribution) -> dict:
    return _document("distribution", parties=dist.parties, probs=dist.flat.tolist())


def distribution_from_json(doc) -> JointDistribution:
    doc = _check(doc, "distribution")
    return JointDistribution(int(_field(doc, "parties")), np.array(_field(doc, "probs"), dtype=float))


def correlators_to_json(c: CorrelationTensor) -> dict:
    return _document("correlators", parties=c.parties, values=c.values.tolist())


def correlators_from_json(doc) -> CorrelationTensor:
    doc = _check(doc, "correlators")
    return CorrelationTensor(int(_field(doc, "parties")), np.array(_field(doc, "values"), dtype=float))


def model_to_json(model: LvmModel) -> dict:
    return _document("lvm-model", parties=model.parties, weights=model.weights.tolist())


def certificate_to_json(cert: DistillabilityCertificate, state: QuantumState | None = None) -> dict:
    doc = _document(
        "certificate",
        parties=cert.parties,
        copies=cert.copies,
        score=cert.score,
        group_size=cert.group_size,
        inequality=inequality_to_json(cert.inequality),
        filter_kraus=kraus_to_json(cert.filter),
        assembly=assembly_to_json(cert.assembly),
        toolkit_version=__version__,
        seed=cert.seed,
    )
    if state is not None:
        doc["state"] = state_to_json(state)
    return doc


def certificate_from_json(doc) -> tuple[DistillabilityCertificate, QuantumState | None]:
    doc = _check(doc, "certificate")
    ineq = inequality_from_json(_field(doc, "inequality"))
    if not isinstance(ineq, WwzbInequality):
        raise InvalidInputError("certificates carry WWZB inequalities")
    cert = DistillabilityCertificate(
        int(_field(doc, "parties")), int(_field(doc, "copies")), float(_field(doc, "score")),
        int(_field(doc, "group_size")), ineq, kraus_from_json(_field(doc, "filter_kraus")),
        assembly_from_json(_field(doc, "assembly")), doc.get("seed"),
    )
    state = state_from_json(doc["state"]) if doc.get("state") is not None else None
    return cert, state


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InvalidInputError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid JSON ({exc})") from None
