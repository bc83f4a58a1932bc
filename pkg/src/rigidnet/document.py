"""Input documents.

A single JSON document describes an experiment: the economy (``n``, ``A``
row-major, ``gamma``, ``theta``, optional ``beta`` and ``label``) plus
optional ``shock``, ``signal`` and ``engine`` sections.  Sector indices in
documents are 1-based, matching the printed tables; the Python API is
0-based.  Partition cells encode ``null`` as minus infinity in ``lo`` and
as zero in ``hi``.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .economy import Economy, validate_economy
from .errors import ShockModelError, UsageError
from .shocks import ExpectationEngine, ShockModel, SignalModel, check_partition


@dataclass(frozen=True)
class ParsedDocument:
    econ: Economy
    model: ShockModel | None
    signal: SignalModel
    engine: ExpectationEngine | None
    raw: dict


def load_document(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise UsageError(f"input document not found: {path}")
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if text.splitlines() else ""
        raise ShockModelError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}\n  {line}"
        ) from None
    if not isinstance(doc, dict):
        raise ShockModelError(f"{path}: top-level JSON value must be an object")
    return doc


def _parse_shock(spec: dict, n: int) -> ShockModel:
    kind = spec.get("kind")
    if kind == "single_node_exponential":
        o = int(spec["o"])
        if not 1 <= o <= n:
            raise ShockModelError(f"shocked sector {o} outside 1..{n}")
        return ShockModel.single_node_exponential(o - 1, float(spec["lambda"]))
    if kind == "independent_exponential":
        return ShockModel.independent_exponential(spec["lambda"])
    if kind == "discrete":
        points = [entry["eta"] for entry in spec["support"]]
        probs = [entry["p"] for entry in spec["support"]]
        return ShockModel.discrete(points, probs)
    if kind == "degenerate":
        return ShockModel.degenerate(spec["eta"])
    raise ShockModelError(f"unknown shock kind {kind!r}")


def _parse_signal(spec: dict | None, n: int) -> SignalModel:
    if spec is None:
        return SignalModel.none()
    kind = spec.get("kind", "none")
    if kind == "none":
        return SignalModel.none()
    if kind == "full":
        return SignalModel.full()
    if kind == "partition":
        cells = []
        for cell in spec["cells"]:
            lo = [-np.inf if v is None else float(v) for v in cell["lo"]]
            hi = [0.0 if v is None else float(v) for v in cell["hi"]]
            if len(lo) != n or len(hi) != n:
                raise ShockModelError("cell bounds must have one entry per sector")
            cells.append((np.array(lo), np.array(hi)))
        return SignalModel.partition(cells)
    raise ShockModelError(f"unknown signal kind {kind!r}")


def _default_backend(model: ShockModel | None) -> str:
    if model is None or model.kind in ("single_node_exponential", "degenerate"):
        return "analytic_exponential"
    if model.kind == "discrete":
        return "exact_discrete"
    return "monte_carlo"


def _parse_engine(spec: dict | None, model: ShockModel | None) -> ExpectationEngine:
    spec = spec or {}
    return ExpectationEngine(
        backend=spec.get("backend", _default_backend(model)),
        num_draws=int(spec.get("num_draws", 1_000_000)),
        seed=int(spec.get("seed", 0)),
    )


def parse_document(doc: dict) -> ParsedDocument:
    econ = validate_economy(doc)
    model = _parse_shock(doc["shock"], econ.n) if "shock" in doc else None
    signal = _parse_signal(doc.get("signal"), econ.n)
    if model is not None:
        check_partition(model, signal, econ.n)
    engine = _parse_engine(doc.get("engine"), model)
    return ParsedDocument(econ=econ, model=model, signal=signal, engine=engine, raw=doc)


def canonical_document(parsed: ParsedDocument) -> dict:
    """Normalized document: validating its output reproduces it verbatim."""
    econ = parsed.econ
    out = {
        "n": econ.n,
        "A": np.asarray(econ.A).tolist(),
        "beta": np.asarray(econ.beta).tolist(),
        "gamma": np.asarray(econ.gamma).tolist(),
        "theta": np.asarray(econ.theta).tolist(),
    }
    if econ.label is not None:
        out["label"] = econ.label
    model = parsed.model
    if model is not None:
        if model.kind == "single_node_exponential":
            out["shock"] = {
                "kind": model.kind,
                "o": model.o + 1,
                "lambda": model.rate,
            }
        elif model.kind == "independent_exponential":
            out["shock"] = {"kind": model.kind, "lambda": model.rates.tolist()}
        elif model.kind == "discrete":
            out["shock"] = {
                "kind": model.kind,
                "support": [
                    {"eta": pt.tolist(), "p": float(p)}
                    for pt, p in zip(model.points, model.probs)
                ],
            }
        else:
            out["shock"] = {"kind": model.kind, "eta": model.eta.tolist()}
    if parsed.signal.kind == "partition":
        out["signal"] = {
            "kind": "partition",
            "cells": [
                {
                    "lo": [None if np.isinf(v) else float(v) for v in box.lo],
                    "hi": [float(v) for v in box.hi],
                }
                for box in parsed.signal.cells
            ],
        }
    else:
        out["signal"] = {"kind": parsed.signal.kind}
    if parsed.engine is not None:
        out["engine"] = {
            "backend": parsed.engine.backend,
            "num_draws": parsed.engine.num_draws,
            "seed": parsed.engine.seed,
        }
    return out
