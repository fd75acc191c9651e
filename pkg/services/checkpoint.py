"""
Guardado y carga de checkpoints (pesos + manifiesto)
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import torch
from transformers import AutoTokenizer, PreTrainedTokenizerBase

from core.config import TrainConfig
from core.errores import ConfigError
from core.modelo import GenconeModel, reconstruir_modelo
from core.tokenizacion import token_separador

logger = logging.getLogger(__name__)

ARCHIVO_PESOS = "weights.pt"
ARCHIVO_MANIFIESTO = "manifest.json"
DIRECTORIO_TOKENIZADOR = "tokenizer"


def construir_manifiesto(
    modelo: GenconeModel,
    tokenizador: PreTrainedTokenizerBase,
    config: TrainConfig,
    semilla: int,
    extra: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    separador = token_separador(tokenizador)
    manifiesto = {
        "d": modelo.d,
        "base_model": config.backbone_name,
        "classifier_model": config.classifier_name,
        "lambda1": config.lambda1,
        "lambda2": config.lambda2,
        "mode": config.mode,
        "flags": {
            "loss_literal_positive_only": config.loss_literal_positive_only,
            "fusion_use_logits": config.fusion_use_logits,
            "classifier_fresh_init": config.classifier_fresh_init,
        },
        "tokenizer": tokenizador.name_or_path or "word-level",
        "separator": {"token": separador, "id": tokenizador.convert_tokens_to_ids(separador)},
        "seed": semilla,
        "schedule": {"warmup_fraction": config.warmup_fraction, "after_warmup": "constant"},
        "config": config.to_dict(),
        "model_configs": modelo.configuraciones(),
    }
    manifiesto.update(extra or {})
    return manifiesto


def guardar_checkpoint(
    directorio: Union[str, Path],
    modelo: GenconeModel,
    tokenizador: PreTrainedTokenizerBase,
    config: TrainConfig,
    semilla: int,
    estado: Optional[Dict[str, torch.Tensor]] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Escribe weights.pt, manifest.json y el tokenizador.

    Args:
        directorio: Destino
        modelo: Modelo (define arquitectura)
        tokenizador: Tokenizador usado
        config: Configuración de entrenamiento
        semilla: Semilla de la corrida
        estado: state_dict a guardar (por defecto el actual del modelo)
        extra: Campos adicionales del manifiesto

    Returns:
        Ruta del directorio
    """
    ruta = Path(directorio)
    ruta.mkdir(parents=True, exist_ok=True)
    torch.save(estado if estado is not None else modelo.state_dict(), ruta / ARCHIVO_PESOS)
    tokenizador.save_pretrained(ruta / DIRECTORIO_TOKENIZADOR)
    manifiesto = construir_manifiesto(modelo, tokenizador, config, semilla, extra)
    (ruta / ARCHIVO_MANIFIESTO).write_text(json.dumps(manifiesto, indent=2), encoding="utf-8")
    logger.info("checkpoint guardado en %s", ruta)
    return ruta


def cargar_checkpoint(
    directorio: Union[str, Path],
) -> Tuple[GenconeModel, PreTrainedTokenizerBase, Dict[str, Any]]:
    """
    Reconstruye modelo y tokenizador sin descargar pesos.

    Returns:
        (modelo en modo evaluación, tokenizador, manifiesto)
    """
    ruta = Path(directorio)
    if not (ruta / ARCHIVO_MANIFIESTO).exists():
        raise ConfigError(f"{ruta} no contiene {ARCHIVO_MANIFIESTO}")
    manifiesto = json.loads((ruta / ARCHIVO_MANIFIESTO).read_text(encoding="utf-8"))
    config = TrainConfig.from_dict(manifiesto["config"])
    modelo = reconstruir_modelo(config, manifiesto["model_configs"])
    modelo.load_state_dict(torch.load(ruta / ARCHIVO_PESOS, map_location="cpu"))
    modelo.eval()
    tokenizador = AutoTokenizer.from_pretrained(str(ruta / DIRECTORIO_TOKENIZADOR))
    return modelo, tokenizador, manifiesto
