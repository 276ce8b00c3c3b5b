"""Versioned JSON checkpoints for trained models.

Weights are serialized as nested lists of Python floats, whose repr round-trips
exactly, so a reloaded model reproduces identical predictions.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FormatError
from .gcn import GcnParams
from .svm import SvmModel

FORMAT_VERSION = 1


def _gcn_payload(params: GcnParams) -> dict:
    return {name: getattr(params, name).tolist() for name in
            ("w1", "b1", "w2", "b2", "w3", "b3")}


def _svm_payload(model: SvmModel) -> dict:
    return {
        "support_vectors": model.support_vectors.tolist(),
        "support_indices": model.support_indices.tolist(),
        "dual_coefs": model.dual_coefs.tolist(),
        "bias": model.bias,
        "kernel": model.kernel,
        "gamma": model.gamma,
        "C": model.C,
    }


def save_checkpoint(
    path,
    *,
    gcn_params: GcnParams | None = None,
    svm_model: SvmModel | None = None,
    config: dict | None = None,
    seed: int | None = None,
    provenance: dict | None = None,
) -> None:
    if gcn_params is None and svm_model is None:
        raise FormatError("checkpoint needs at least one model")
    if gcn_params is not None and svm_model is not None:
        kind = "gcn-svm"
    elif gcn_params is not None:
        kind = "gcn"
    else:
        kind = "svm"
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "config": config or {},
        "seed": seed,
        "provenance": provenance or {},
    }
    if gcn_params is not None:
        payload["gcn"] = _gcn_payload(gcn_params)
    if svm_model is not None:
        payload["svm"] = _svm_payload(svm_model)
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_checkpoint(path) -> dict:
    """Returns {'kind', 'config', 'seed', 'gcn': GcnParams?, 'svm': SvmModel?}."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported checkpoint version {version!r}")
    out = {
        "kind": payload["kind"],
        "config": payload.get("config", {}),
        "seed": payload.get("seed"),
        "provenance": payload.get("provenance", {}),
    }
    if "gcn" in payload:
        g = payload["gcn"]
        out["gcn"] = GcnParams(**{k: np.array(v, dtype=float) for k, v in g.items()})
    if "svm" in payload:
        s = payload["svm"]
        out["svm"] = SvmModel(
            support_vectors=np.array(s["support_vectors"], dtype=float).reshape(
                len(s["support_indices"]), -1
            ),
            support_indices=np.array(s["support_indices"], dtype=np.int64),
            dual_coefs=np.array(s["dual_coefs"], dtype=float),
            bias=s["bias"],
            kernel=s["kernel"],
            gamma=s["gamma"],
            C=s["C"],
        )
    return out
