"""
Model construction from configuration, and kind lookup for deserialization
"""

import logging
from typing import Dict, Type

import numpy as np

from funcnet.core.bspline import uniform_bspline_basis
from funcnet.core.errors import InvalidArgumentError
from funcnet.core.grid import Grid
from funcnet.core.simulate import ResponseKind
from funcnet.models.base import FunctionalModel
from funcnet.models.fbnn import FbnnModel, fbnn_init
from funcnet.models.fdnn import FdnnModel, fdnn_init
from funcnet.models.flm import FlmModel, link_for
from funcnet.models.fnn import FnnModel, fnn_init
from funcnet.models.mlp import MlpModel, mlp_init
from funcnet.schemas.config import ModelConfig, ModelKind

logger = logging.getLogger(__name__)

MODEL_CLASSES: Dict[str, Type[FunctionalModel]] = {
    FlmModel.kind: FlmModel,
    FdnnModel.kind: FdnnModel,
    FbnnModel.kind: FbnnModel,
    FnnModel.kind: FnnModel,
    MlpModel.kind: MlpModel,
}

INITIALIZERS = {
    ModelKind.FDNN: fdnn_init,
    ModelKind.FBNN: fbnn_init,
    ModelKind.FNN: fnn_init,
    ModelKind.MLP: mlp_init,
}


def model_class(kind: str) -> Type[FunctionalModel]:
    try:
        return MODEL_CLASSES[kind]
    except KeyError:
        raise InvalidArgumentError(f"unknown model kind {kind!r}; valid kinds: {', '.join(MODEL_CLASSES)}")


def build_model(
    cfg: ModelConfig, grid: Grid, input_count: int, response_kind: ResponseKind, seed
) -> FunctionalModel:
    """Freshly initialized model of the configured kind"""
    response_kind = ResponseKind(response_kind)
    if cfg.kind is ModelKind.FLM:
        basis = uniform_bspline_basis(cfg.n_basis, cfg.spline_order)
        return FlmModel(grid, basis, 0.0, np.zeros((input_count, basis.n_basis)), cfg.ridge, link_for(response_kind))
    arch = cfg.architecture(input_count, response_kind)
    model = INITIALIZERS[cfg.kind](arch, grid, seed)
    logger.debug(f"Built {cfg.name} with {model.parameter_count()} parameters")
    return model
