"""JSON serialization of problems, reports, states and partial tables.

Complex numbers are written as ``[re, im]`` pairs.  Floats go through
``json``'s ``repr``-based encoder, which emits the shortest string that
parses back to the same double, so every file round-trips exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bipartition import Block, BipartitionTable, Decomposition, verify_membership
from .coarse import PartialBipartitionTable
from .errors import InputError
from .linalg import DEFAULT_TOLERANCES, ToleranceConfig


class SchemaError(InputError):
    pass


def encode_complex(a) -> list:
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [encode_complex(x) for x in a]


def decode_complex(data, ndim: int | None = None) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"malformed complex array: {exc}") from exc
    if arr.ndim == 0 or arr.shape[-1] != 2:
        raise SchemaError("complex entries must be [re, im] pairs")
    out = arr[..., 0] + 1j * arr[..., 1]
    if ndim is not None and out.ndim != ndim:
        raise SchemaError(f"expected a {ndim}-d complex array, got {out.ndim}-d")
    return out


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: top-level value must be an object")
    return data


def dumps(data) -> str:
    return json.dumps(data, indent=1, allow_nan=False) + "\n"


def write_json(path, data) -> None:
    Path(path).write_text(dumps(data), encoding="utf-8")


def _require(data: dict, key: str, where: str):
    if key not in data:
        raise SchemaError(f"{where}: missing field {key!r}")
    return data[key]


# -- problems ------------------------------------------------------------


@dataclass
class ProblemFile:
    dim: int
    generators: list  # [(name, matrix)]
    operators: dict = field(default_factory=dict)
    include_identity: bool = False
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES

    @property
    def generator_matrices(self) -> list[np.ndarray]:
        return [m for _, m in self.generators]

    def lookup(self, name: str) -> np.ndarray:
        for n, m in self.generators:
            if n == name:
                return m
        if name in self.operators:
            return self.operators[name]
        raise SchemaError(f"no generator or operator named {name!r}")

    def to_dict(self) -> dict:
        tol = self.tolerances
        return {
            "dim": self.dim,
            "generators": [{"name": n, "matrix": encode_complex(m)} for n, m in self.generators],
            "operators": {n: encode_complex(m) for n, m in self.operators.items()},
            "options": {
                "include_identity": self.include_identity,
                "tolerances": {"tol_hermitian": tol.tol_hermitian, "tol_idempotent": tol.tol_idempotent,
                               "tol_eig_cluster": tol.tol_eig_cluster, "tol_zero": tol.tol_zero},
            },
        }


def _matrix(data, dim: int, where: str) -> np.ndarray:
    m = decode_complex(data, ndim=2)
    if m.shape != (dim, dim):
        raise SchemaError(f"{where}: expected a {dim}x{dim} matrix, got {m.shape}")
    return m


def problem_from_dict(data: dict) -> ProblemFile:
    dim = _require(data, "dim", "problem")
    if not isinstance(dim, int) or dim < 1:
        raise SchemaError("problem: dim must be a positive integer")
    gens = []
    for i, g in enumerate(_require(data, "generators", "problem")):
        if not isinstance(g, dict):
            raise SchemaError(f"generator {i}: must be an object with name and matrix")
        name = str(g.get("name", f"g{i}"))
        gens.append((name, _matrix(_require(g, "matrix", f"generator {name}"), dim, f"generator {name}")))
    ops = {str(n): _matrix(m, dim, f"operator {n}") for n, m in data.get("operators", {}).items()}
    opts = data.get("options", {})
    tol_data = opts.get("tolerances", {}) or {}
    unknown = set(tol_data) - {"tol_hermitian", "tol_idempotent", "tol_eig_cluster", "tol_zero"}
    if unknown:
        raise SchemaError(f"unknown tolerance fields {sorted(unknown)}")
    tol = DEFAULT_TOLERANCES.replace(**{k: float(v) for k, v in tol_data.items()})
    return ProblemFile(dim, gens, ops, bool(opts.get("include_identity", False)), tol)


def load_problem(path) -> ProblemFile:
    return problem_from_dict(read_json(path))


def write_problem(path, problem: ProblemFile) -> None:
    write_json(path, problem.to_dict())


# -- decomposition reports -----------------------------------------------


def bpt_to_dict(bpt: BipartitionTable) -> dict:
    return {
        "dim": bpt.dim,
        "complement_dim": bpt.complement_dim,
        "blocks": [{"q": q, "rows": b.rows, "cols": b.cols, "basis": encode_complex(b.vectors)}
                   for q, b in enumerate(bpt.blocks)],
    }


def bpt_from_dict(data: dict) -> BipartitionTable:
    dim = _require(data, "dim", "report")
    blocks = []
    for b in _require(data, "blocks", "report"):
        vec = decode_complex(_require(b, "basis", "block"), ndim=3)
        if vec.shape != (b["rows"], b["cols"], dim):
            raise SchemaError(f"block {b.get('q')}: basis shape {vec.shape} does not match rows/cols/dim")
        blocks.append(Block(vec))
    return BipartitionTable(tuple(blocks), dim)


def decomposition_report(dec: Decomposition, generators, extra: dict | None = None) -> dict:
    residuals = [verify_membership(dec.bpt, g).residual for g in generators]
    diag = dict(dec.diagnostics)
    diag["max_residual"] = max(residuals) if residuals else 0.0
    if extra:
        diag.update(extra)
    out = bpt_to_dict(dec.bpt)
    out["diagnostics"] = diag
    return out


def load_report(path) -> tuple[BipartitionTable, dict]:
    data = read_json(path)
    return bpt_from_dict(data), data.get("diagnostics", {})


# -- states and partial tables -------------------------------------------


def state_from_dict(data: dict) -> np.ndarray:
    """``{"dim": d, "rho": matrix}`` or ``{"dim": d, "psi": vector}``."""
    dim = _require(data, "dim", "state")
    if "rho" in data:
        return _matrix(data["rho"], dim, "state")
    if "psi" in data:
        psi = decode_complex(data["psi"], ndim=1)
        if psi.size != dim:
            raise SchemaError(f"state: psi has {psi.size} entries, expected {dim}")
        psi = psi / np.linalg.norm(psi)
        return np.outer(psi, psi.conj())
    raise SchemaError("state: need 'rho' or 'psi'")


def pbpt_to_dict(pbpt: PartialBipartitionTable, observables: dict | None = None) -> dict:
    out = {
        "dim": pbpt.dim,
        "rows": list(pbpt.rows),
        "cols": list(pbpt.cols),
        "cells": [{"row": i, "col": k, "vector": encode_complex(v)} for (i, k), v in pbpt.cells.items()],
    }
    if observables:
        out["observables"] = {n: encode_complex(m) for n, m in observables.items()}
    return out


def pbpt_from_dict(data: dict) -> tuple[PartialBipartitionTable, dict]:
    dim = _require(data, "dim", "table")
    rows = [str(r) for r in _require(data, "rows", "table")]
    cols = [str(c) for c in _require(data, "cols", "table")]
    cells = {}
    for c in _require(data, "cells", "table"):
        i, k = int(_require(c, "row", "cell")), int(_require(c, "col", "cell"))
        v = decode_complex(_require(c, "vector", "cell"), ndim=1)
        if v.size != dim:
            raise SchemaError(f"cell {(i, k)}: vector has {v.size} entries, expected {dim}")
        if (i, k) in cells:
            raise SchemaError(f"cell {(i, k)} given twice")
        cells[(i, k)] = v
    obs = {str(n): _matrix(m, dim, f"observable {n}") for n, m in data.get("observables", {}).items()}
    return PartialBipartitionTable(rows, cols, cells), obs
