"""JSON serialization for states, observables, and reports.

The on-disk matrix format is {"dim": d, "re": [[row-major reals]],
"im": [[row-major reals]]}.  A d x 1 array round-trips as a pure-state
vector, a d x d array as a density matrix or observable; "im" may be
omitted for real data.
"""

from __future__ import annotations

import json

import numpy as np

from .states import DensityMatrix, PureState, ValidationError


def matrix_to_json(arr) -> dict:
    """Encode a vector or matrix as the portable JSON payload."""
    if isinstance(arr, PureState):
        arr = arr.amplitudes
    elif isinstance(arr, DensityMatrix):
        arr = arr.matrix
    mat = np.asarray(arr, dtype=complex)
    if mat.ndim == 1:
        mat = mat[:, None]
    if mat.ndim != 2:
        raise ValidationError("only vectors and matrices can be serialized")
    return {
        "dim": int(mat.shape[0]),
        "re": mat.real.tolist(),
        "im": mat.imag.tolist(),
    }


def dump_matrix(path: str, arr) -> None:
    with open(path, "w") as fh:
        json.dump(matrix_to_json(arr), fh, sort_keys=True)
        fh.write("\n")


def _load_payload(path: str) -> dict:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"state file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"{path} is not valid JSON: {exc.msg} at line {exc.lineno} "
            f"column {exc.colno}"
        )
    if not isinstance(payload, dict):
        raise ValidationError(f"{path}: top level must be a JSON object")
    return payload


def json_to_matrix(payload: dict, label: str = "payload") -> np.ndarray:
    """Decode the {"dim", "re", "im"} payload into a complex array."""
    for key in ("dim", "re"):
        if key not in payload:
            raise ValidationError(f"{label} is missing the {key!r} field")
    dim = payload["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise ValidationError(f"{label}: dim must be a positive integer")
    try:
        re = np.asarray(payload["re"], dtype=float)
        im = np.asarray(payload.get("im", np.zeros_like(re)), dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"{label}: re/im must be rectangular numeric arrays")
    if re.shape != im.shape:
        raise ValidationError(f"{label}: re and im shapes differ")
    if re.ndim == 1:
        re, im = re[:, None], im[:, None]
    if re.ndim != 2 or re.shape[0] != dim or re.shape[1] not in (1, dim):
        raise ValidationError(
            f"{label}: expected dim x 1 or dim x dim entries for dim={dim}, "
            f"got shape {re.shape}"
        )
    return re + 1j * im


def load_matrix(path: str) -> np.ndarray:
    return json_to_matrix(_load_payload(path), label=path)


def load_state(path: str):
    """Read a state file: a column becomes PureState, a square DensityMatrix."""
    mat = load_matrix(path)
    if mat.shape[1] == 1:
        return PureState(mat[:, 0])
    return DensityMatrix(mat)


def load_observable(path: str) -> np.ndarray:
    """Read an observable: square Hermitian matrix, or a column as a diagonal."""
    mat = load_matrix(path)
    if mat.shape[1] == 1:
        diag = mat[:, 0]
        if np.abs(diag.imag).max(initial=0.0) > 1e-10:
            raise ValidationError(f"{path}: diagonal observable must be real")
        return diag.real
    return mat
