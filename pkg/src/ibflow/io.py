"""Field persistence: little-endian float64 physical arrays + JSON sidecar."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import fields as F

_KIND_TO_CLASS = {
    "scalar": F.ScalarField,
    "vector": F.VectorField,
    "tensor": F.SymTensorField,
}


def save_field(field, path, time: float | None = None, metadata: dict | None = None) -> Path:
    """Write physical-space values as '<path>.f64' with a '<path>.json' sidecar."""
    path = Path(path)
    base = path.with_suffix("") if path.suffix == ".f64" else path
    n = field.grid_size
    if field.kind == "scalar":
        values = field.physical()
    else:
        values = np.stack(
            [F.ScalarField(field.coeffs[c]).physical() for c in range(field.ncomp)]
        )
    data = np.ascontiguousarray(values, dtype="<f8")
    data_path = base.with_suffix(".f64")
    data_path.write_bytes(data.tobytes(order="C"))
    sidecar = {
        "grid_size": n,
        "kind": field.kind,
        "time": time,
        "metadata": metadata or {},
        "shape": list(data.shape),
        "dtype": "<f8",
        "order": "C",
    }
    base.with_suffix(".json").write_text(json.dumps(sidecar, indent=2))
    return data_path


def load_field(path):
    """Read a field written by :func:`save_field`; returns (field, sidecar)."""
    base = Path(path)
    if base.suffix in (".f64", ".json"):
        base = base.with_suffix("")
    sidecar = json.loads(base.with_suffix(".json").read_text())
    raw = np.frombuffer(base.with_suffix(".f64").read_bytes(), dtype="<f8")
    values = raw.reshape(sidecar["shape"])
    kind = sidecar["kind"]
    n = sidecar["grid_size"]
    cls = _KIND_TO_CLASS[kind]
    if kind == "scalar":
        field = cls.from_physical(values)
    else:
        import scipy.fft as sfft

        coeffs = sfft.fftn(values, axes=(-3, -2, -1)) / n**3
        field = cls(coeffs)
    return field, sidecar
