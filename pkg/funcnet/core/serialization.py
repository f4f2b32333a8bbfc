"""
Saving and loading trained models
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

from pydantic import ValidationError

from funcnet.core.config import get_settings
from funcnet.core.errors import DataFormatError, DatasetIOError, InvalidArgumentError
from funcnet.core.grid import restore_grid
from funcnet.core.simulate import ResponseKind
from funcnet.models.base import FunctionalModel
from funcnet.models.registry import model_class
from funcnet.schemas.artifact import ArrayPayload, InputScaling, ModelArtifact

logger = logging.getLogger(__name__)


@dataclass
class LoadedModel:
    model: FunctionalModel
    response_kind: ResponseKind
    domain: Tuple[float, float]
    label: Optional[str]


def to_artifact(
    model: FunctionalModel,
    response_kind: ResponseKind,
    domain: Tuple[float, float] = (0.0, 1.0),
    label: Optional[str] = None,
) -> ModelArtifact:
    scaling = None
    if model.input_shift is not None:
        scaling = InputScaling(
            shift=ArrayPayload.from_array(model.input_shift), scale=ArrayPayload.from_array(model.input_scale)
        )
    return ModelArtifact(
        version=get_settings().model_format_version,
        kind=model.kind,
        label=label,
        response_kind=ResponseKind(response_kind).value,
        grid=ArrayPayload.from_array(model.input_grid.points),
        grid_weights=ArrayPayload.from_array(model.input_grid.weights),
        domain=domain,
        architecture=model.architecture(),
        parameters={name: ArrayPayload.from_array(p) for name, p in model.parameters().items()},
        input_scaling=scaling,
    )


def from_artifact(artifact: ModelArtifact) -> LoadedModel:
    supported = get_settings().model_format_version
    if artifact.version > supported:
        raise InvalidArgumentError(f"model format version {artifact.version} is newer than supported ({supported})")
    weights = artifact.grid_weights.to_array() if artifact.grid_weights is not None else None
    grid = restore_grid(artifact.grid.to_array(), weights)
    model = model_class(artifact.kind).from_architecture(artifact.architecture, grid)
    params = model.parameters()
    if set(params) != set(artifact.parameters):
        raise InvalidArgumentError(
            f"stored parameters {sorted(artifact.parameters)} do not match the architecture {sorted(params)}"
        )
    for name, payload in artifact.parameters.items():
        value = payload.to_array()
        if value.shape != params[name].shape:
            raise InvalidArgumentError(f"parameter {name} has shape {value.shape}, expected {params[name].shape}")
        params[name][...] = value
    if artifact.input_scaling is not None:
        model.set_input_scaling(artifact.input_scaling.shift.to_array(), artifact.input_scaling.scale.to_array())
    return LoadedModel(model, ResponseKind(artifact.response_kind), tuple(artifact.domain), artifact.label)


def save_model(path, model: FunctionalModel, response_kind: ResponseKind, domain=(0.0, 1.0), label=None) -> Path:
    path = Path(path)
    text = to_artifact(model, response_kind, domain, label).model_dump_json(indent=2)
    try:
        path.write_text(text)
    except OSError as exc:
        raise DatasetIOError(path, exc.strerror or str(exc))
    logger.info(f"Saved {model.kind} model to {path}")
    return path


def load_model(path) -> LoadedModel:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DatasetIOError(path, exc.strerror or str(exc))
    try:
        artifact = ModelArtifact.model_validate_json(text)
    except (ValidationError, ValueError) as exc:
        raise DataFormatError(f"{path} is not a valid model file: {exc}")
    try:
        return from_artifact(artifact)
    except InvalidArgumentError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise DataFormatError(f"{path} holds a corrupt model: {exc}")
