"""
File schemas and JSON output
States, POVMs and count records are exchanged as JSON; floats are written with 17 significant digits
"""
import json
import math
from pathlib import Path
from typing import Any, List, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from config import CLI_CONFIG
from models.estimation import CountRecord, FeasibilityVerdict
from models.povm import Povm, builtin_povm
from models.states import DensityMatrix

ComplexEntry = Tuple[float, float]
MatrixPayload = List[List[ComplexEntry]]


class StateFile(BaseModel):
    """{"d": int, "matrix": [[[re, im], ...], ...]}"""

    d: int = Field(ge=1)
    matrix: MatrixPayload

    @model_validator(mode="after")
    def check_shape(self) -> "StateFile":
        _check_square(self.matrix, self.d, "matrix")
        return self

    def to_array(self) -> np.ndarray:
        return _to_complex(self.matrix)


class PovmFile(BaseModel):
    """{"d": int, "effects": [matrix, ...]} with one matrix per outcome"""

    d: int = Field(ge=1)
    effects: List[MatrixPayload] = Field(min_length=1)

    @model_validator(mode="after")
    def check_shapes(self) -> "PovmFile":
        for index, effect in enumerate(self.effects):
            _check_square(effect, self.d, f"effect {index}")
        return self

    def to_povm(self) -> Povm:
        return Povm.from_effects([_to_complex(effect) for effect in self.effects])


class CountsFile(BaseModel):
    """{"n": int, "counts": [int, ...]}"""

    n: int = Field(ge=1)
    counts: List[int] = Field(min_length=1)

    @model_validator(mode="after")
    def check_total(self) -> "CountsFile":
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be non-negative")
        if sum(self.counts) != self.n:
            raise ValueError(f"counts sum to {sum(self.counts)}, expected n = {self.n}")
        return self

    def to_record(self) -> CountRecord:
        return CountRecord(n=self.n, counts=tuple(self.counts))


def _check_square(matrix: MatrixPayload, d: int, label: str) -> None:
    if len(matrix) != d or any(len(row) != d for row in matrix):
        raise ValueError(f"{label} must be {d}x{d}")


def _to_complex(matrix: MatrixPayload) -> np.ndarray:
    entries = np.array(matrix, dtype=float)
    return entries[..., 0] + 1j * entries[..., 1]


def matrix_payload(m: np.ndarray) -> MatrixPayload:
    a = np.asarray(m, dtype=complex)
    return [[(float(z.real), float(z.imag)) for z in row] for row in a]


def state_payload(rho: Union[DensityMatrix, np.ndarray]) -> dict:
    matrix = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return {"d": int(matrix.shape[0]), "matrix": matrix_payload(matrix)}


def povm_payload(povm: Povm) -> dict:
    return {"d": povm.dim, "effects": [matrix_payload(e) for e in povm.effects]}


def counts_payload(rec: CountRecord) -> dict:
    return {"n": rec.n, "counts": list(rec.counts)}


def verdict_payload(verdict: FeasibilityVerdict) -> dict:
    payload = verdict.to_dict()
    payload["estimate"] = None if verdict.estimate is None else state_payload(verdict.estimate)
    return payload


def load_state(path: Union[str, Path], tol: float) -> DensityMatrix:
    """Read and validate a state file"""
    state = StateFile.model_validate_json(Path(path).read_text())
    return DensityMatrix.from_array(state.to_array(), tol)


def load_povm(source: Union[str, Path]) -> Povm:
    """Read a POVM file, or resolve a builtin name when no such file exists"""
    path = Path(source)
    if path.is_file():
        return PovmFile.model_validate_json(path.read_text()).to_povm()
    return builtin_povm(str(source))


def load_counts(path: Union[str, Path]) -> CountRecord:
    return CountsFile.model_validate_json(Path(path).read_text()).to_record()


def dumps(obj: Any, float_format: str = CLI_CONFIG["float_format"]) -> str:
    """JSON text with every float written through float_format"""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            return json.dumps(value)
        return float_format % value
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(key))}: {dumps(value, float_format)}" for key, value in obj.items())
        return "{" + items + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(value, float_format) for value in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")
