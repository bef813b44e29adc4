"""Scenario files: JSON descriptions of a state plus four measurements.

Schema (all matrices/vectors use the shared wire format, entries either a
plain real or a [re, im] pair)::

    {
      "dims": [d1, d2],
      "state": {"product_mixture": {"components": [
                    {"weight": w, "left": [...], "right": [...]}, ...]}}
             | {"density_matrix": [[...], ...]},
      "observables": {
        "a":       {"kind": "spin1", "angle": 0.0}
                 | {"kind": "observable", "matrix": [[...], ...]}
                 | {"kind": "povm",
                    "outcomes": [{"value": v, "matrix": [[...], ...]}, ...],
                    "null_value": 0.0},
        "a_prime": ..., "b": ..., "b_prime": ...
      }
    }

Shape problems raise :class:`ScenarioParseError` (CLI exit 1), violated
invariants raise :class:`ScenarioValidationError` (CLI exit 2); both carry
the offending field path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import linalg
from .correlations import ChshSettings
from .exceptions import (
    DimensionMismatchError,
    NotHermitianError,
    OutcomeOutOfRangeError,
    ScenarioParseError,
    ScenarioValidationError,
)
from .model import (
    DensityMatrix,
    MixtureComponent,
    Povm,
    PovmOutcome,
    ProductMixture,
    PureState,
    density_from_mixture,
    povm_from_observable,
    spin1_observable,
    validate_povm,
)

SETTING_NAMES = ("a", "a_prime", "b", "b_prime")
OBSERVABLE_KINDS = ("spin1", "observable", "povm")


@dataclass(frozen=True)
class ObservableSpec:
    """One measurement setting as written in the file, plus its built POVM."""

    kind: str
    povm: Povm
    angle: float | None = None
    matrix: np.ndarray | None = None


@dataclass(frozen=True)
class Scenario:
    dims: tuple[int, int]
    density: DensityMatrix
    observables: dict[str, ObservableSpec]
    mixture: ProductMixture | None = None

    def settings(self) -> ChshSettings:
        return ChshSettings(
            a=self.observables["a"].povm,
            a_prime=self.observables["a_prime"].povm,
            b=self.observables["b"].povm,
            b_prime=self.observables["b_prime"].povm,
        )


def _require_dict(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        raise ScenarioParseError(f"{path}: expected an object, got {type(obj).__name__}")
    return obj


def _require_key(d: dict, key: str, path: str):
    if key not in d:
        raise ScenarioParseError(f"{path}: missing required field '{key}'")
    return d[key]


def _require_real(obj, path: str) -> float:
    if not isinstance(obj, (int, float)) or isinstance(obj, bool):
        raise ScenarioParseError(f"{path}: expected a number, got {obj!r}")
    x = float(obj)
    if not math.isfinite(x):
        raise ScenarioParseError(f"{path}: expected a finite number, got {obj!r}")
    return x


def _require_list(obj, path: str) -> list:
    if not isinstance(obj, list) or not obj:
        raise ScenarioParseError(f"{path}: expected a non-empty list")
    return obj


def _parse_matrix(obj, path: str) -> np.ndarray:
    try:
        return linalg.matrix_from_wire(obj)
    except ValueError as err:
        raise ScenarioParseError(f"{path}: {err}") from None


def _parse_vector(obj, path: str) -> np.ndarray:
    try:
        return linalg.vector_from_wire(obj)
    except ValueError as err:
        raise ScenarioParseError(f"{path}: {err}") from None


def _parse_dims(data: dict) -> tuple[int, int]:
    raw = _require_key(data, "dims", "scenario")
    if not isinstance(raw, list) or len(raw) != 2:
        raise ScenarioParseError("dims: expected a 2-element list [d1, d2]")
    dims = []
    for i, x in enumerate(raw):
        if not isinstance(x, int) or isinstance(x, bool) or x < 1:
            raise ScenarioParseError(f"dims[{i}]: expected a positive integer, got {x!r}")
        dims.append(x)
    return dims[0], dims[1]


def _parse_state(data: dict, dims: tuple[int, int]) -> tuple[DensityMatrix, ProductMixture | None]:
    state = _require_dict(_require_key(data, "state", "scenario"), "state")
    keys = set(state) & {"product_mixture", "density_matrix"}
    if len(keys) != 1:
        raise ScenarioParseError(
            "state: expected exactly one of 'product_mixture' or 'density_matrix'"
        )
    d1, d2 = dims

    if "density_matrix" in keys:
        path = "state.density_matrix"
        matrix = _parse_matrix(state["density_matrix"], path)
        if matrix.shape[0] != d1 * d2:
            raise ScenarioValidationError(
                f"{path}: dimension {matrix.shape[0]} does not equal d1*d2 = {d1 * d2}"
            )
        density = DensityMatrix(matrix=matrix)
        problems = density.validate()
        if problems:
            raise ScenarioValidationError(f"{path}: " + "; ".join(problems))
        return density, None

    path = "state.product_mixture"
    mixture_obj = _require_dict(state["product_mixture"], path)
    comps_raw = _require_list(_require_key(mixture_obj, "components", path), f"{path}.components")
    components = []
    for k, comp_raw in enumerate(comps_raw):
        cpath = f"{path}.components[{k}]"
        comp = _require_dict(comp_raw, cpath)
        weight = _require_real(_require_key(comp, "weight", cpath), f"{cpath}.weight")
        left = _parse_vector(_require_key(comp, "left", cpath), f"{cpath}.left")
        right = _parse_vector(_require_key(comp, "right", cpath), f"{cpath}.right")
        if left.size != d1:
            raise ScenarioValidationError(f"{cpath}.left: dimension {left.size}, expected {d1}")
        if right.size != d2:
            raise ScenarioValidationError(f"{cpath}.right: dimension {right.size}, expected {d2}")
        components.append(
            MixtureComponent(weight=weight, left=PureState(left), right=PureState(right))
        )
    mixture = ProductMixture(components=tuple(components))
    problems = mixture.validate()
    if problems:
        raise ScenarioValidationError(f"{path}: " + "; ".join(problems))
    return density_from_mixture(mixture), mixture


def _parse_observable(obj, path: str, side_dim: int) -> ObservableSpec:
    spec = _require_dict(obj, path)
    kind = _require_key(spec, "kind", path)
    if kind not in OBSERVABLE_KINDS:
        raise ScenarioParseError(f"{path}.kind: expected one of {OBSERVABLE_KINDS}, got {kind!r}")

    if kind == "spin1":
        angle = _require_real(_require_key(spec, "angle", path), f"{path}.angle")
        if side_dim != 3:
            raise ScenarioValidationError(
                f"{path}: spin1 observables need side dimension 3, scenario declares {side_dim}"
            )
        return ObservableSpec(kind=kind, angle=angle, povm=povm_from_observable(spin1_observable(angle)))

    if kind == "observable":
        matrix = _parse_matrix(_require_key(spec, "matrix", path), f"{path}.matrix")
        if matrix.shape[0] != side_dim:
            raise ScenarioValidationError(
                f"{path}.matrix: dimension {matrix.shape[0]}, scenario declares {side_dim}"
            )
        try:
            povm = povm_from_observable(matrix)
        except (NotHermitianError, OutcomeOutOfRangeError) as err:
            raise ScenarioValidationError(f"{path}.matrix: {err}") from None
        return ObservableSpec(kind=kind, matrix=matrix, povm=povm)

    outcomes_raw = _require_list(_require_key(spec, "outcomes", path), f"{path}.outcomes")
    outcomes = []
    for i, out_raw in enumerate(outcomes_raw):
        opath = f"{path}.outcomes[{i}]"
        out = _require_dict(out_raw, opath)
        value = _require_real(_require_key(out, "value", opath), f"{opath}.value")
        matrix = _parse_matrix(_require_key(out, "matrix", opath), f"{opath}.matrix")
        outcomes.append(PovmOutcome(value=value, operator=matrix))
    null_value = 0.0
    if "null_value" in spec:
        null_value = _require_real(spec["null_value"], f"{path}.null_value")
    try:
        povm = Povm(outcomes=tuple(outcomes), null_value=null_value)
    except DimensionMismatchError as err:
        raise ScenarioValidationError(f"{path}.outcomes: {err}") from None
    if povm.dim != side_dim:
        raise ScenarioValidationError(
            f"{path}.outcomes: dimension {povm.dim}, scenario declares {side_dim}"
        )
    problems = validate_povm(povm)
    if problems:
        raise ScenarioValidationError(f"{path}: " + "; ".join(problems))
    return ObservableSpec(kind=kind, povm=povm)


def parse_scenario(data) -> Scenario:
    data = _require_dict(data, "scenario")
    dims = _parse_dims(data)
    density, mixture = _parse_state(data, dims)
    observables_raw = _require_dict(_require_key(data, "observables", "scenario"), "observables")
    observables = {}
    for name in SETTING_NAMES:
        side_dim = dims[0] if name.startswith("a") else dims[1]
        observables[name] = _parse_observable(
            _require_key(observables_raw, name, "observables"), f"observables.{name}", side_dim
        )
    return Scenario(dims=dims, density=density, observables=observables, mixture=mixture)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ScenarioParseError(f"cannot read {path}: {err}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioParseError(f"{path}: invalid JSON: {err}") from None
    return parse_scenario(data)


def _observable_to_dict(spec: ObservableSpec) -> dict:
    if spec.kind == "spin1":
        return {"kind": "spin1", "angle": spec.angle}
    if spec.kind == "observable":
        return {"kind": "observable", "matrix": linalg.matrix_to_wire(spec.matrix)}
    return {
        "kind": "povm",
        "outcomes": [
            {"value": out.value, "matrix": linalg.matrix_to_wire(out.operator)}
            for out in spec.povm.outcomes
        ],
        "null_value": spec.povm.null_value,
    }


def scenario_to_dict(sc: Scenario) -> dict:
    if sc.mixture is not None:
        state = {
            "product_mixture": {
                "components": [
                    {
                        "weight": comp.weight,
                        "left": linalg.vector_to_wire(comp.left.amplitudes),
                        "right": linalg.vector_to_wire(comp.right.amplitudes),
                    }
                    for comp in sc.mixture.components
                ]
            }
        }
    else:
        state = {"density_matrix": linalg.matrix_to_wire(sc.density.matrix)}
    return {
        "dims": list(sc.dims),
        "state": state,
        "observables": {name: _observable_to_dict(spec) for name, spec in sc.observables.items()},
    }


def save_scenario(sc: Scenario, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(scenario_to_dict(sc), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
