"""
Configuración de entrenamiento y del modelo (JSON plano)
"""
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from core.errores import ConfigError

logger = logging.getLogger(__name__)

GRILLA_LR = (1e-5, 2e-5, 5e-5, 1e-4)
MODOS = ("full", "cf_only", "qv_only", "seq2seq")
FAMILIAS = ("t5", "bart")
TAMANOS = ("base", "large")

# batch y épocas por tamaño de modelo
_POR_TAMANO = {
    "base": {"batch_size": 64, "max_epochs": 15},
    "large": {"batch_size": 32, "max_epochs": 10},
}

_BACKBONES = {
    ("t5", "base"): "t5-base",
    ("t5", "large"): "t5-large",
    ("bart", "base"): "facebook/bart-base",
    ("bart", "large"): "facebook/bart-large",
}


def directorio_cache() -> Optional[str]:
    """
    Directorio de caché de pesos preentrenados (variable ECQG_CACHE_DIR).
    """
    return os.environ.get("ECQG_CACHE_DIR") or None


@dataclass
class TrainConfig:
    """
    Todos los hiperparámetros del entrenamiento y sus valores por defecto.

    Los campos con valor 0 o "" se derivan de `base_model_size` y `backbone_family`.
    """
    base_model_size: str = "base"
    backbone_family: str = "t5"
    backbone_name: str = ""
    classifier_name: str = ""
    pretrained: bool = True
    classifier_fresh_init: bool = False
    # -1 = todas las capas del clasificador preentrenado
    classifier_layers: int = -1

    # Dimensiones del modelo de juguete (pretrained = False)
    hidden_size: int = 16
    toy_layers: int = 1
    toy_heads: int = 2
    vocab_size: int = 0
    dropout: float = 0.1

    optimizer: str = "adamw"
    learning_rate: float = 5e-5
    weight_decay: float = 0.01
    batch_size: int = 0
    max_epochs: int = 0
    max_steps: int = 0
    early_stop_patience: int = 3
    warmup_fraction: float = 0.05
    grad_clip: float = 1.0

    lambda1: float = 0.15
    lambda2: float = 0.15
    allow_lambda_override: bool = False

    max_source_len: int = 128
    max_target_len: int = 32
    seeds: List[int] = field(default_factory=lambda: [42])
    mode: str = "full"

    loss_literal_positive_only: bool = False
    fusion_use_logits: bool = False

    num_beams: int = 4
    dtype: str = "float32"
    device: str = "auto"
    threads: int = 0

    def __post_init__(self):
        if self.base_model_size not in TAMANOS:
            raise ConfigError(f"base_model_size debe ser uno de {TAMANOS}")
        if self.backbone_family not in FAMILIAS:
            raise ConfigError(f"backbone_family debe ser uno de {FAMILIAS}")
        if self.mode not in MODOS:
            raise ConfigError(f"mode debe ser uno de {MODOS}")
        if self.dtype not in ("float32", "float64"):
            raise ConfigError("dtype debe ser float32 o float64")

        por_tamano = _POR_TAMANO[self.base_model_size]
        if self.batch_size == 0:
            self.batch_size = por_tamano["batch_size"]
        if self.max_epochs == 0:
            self.max_epochs = por_tamano["max_epochs"]
        if not self.backbone_name:
            self.backbone_name = _BACKBONES[(self.backbone_family, self.base_model_size)]
        if not self.classifier_name:
            self.classifier_name = f"bert-{self.base_model_size}-uncased"

        validar_lambdas(self.lambda1, self.lambda2)
        if not self.allow_lambda_override and not math.isclose(
            self.lambda1 + self.lambda2, 0.3, abs_tol=1e-9
        ):
            raise ConfigError(
                "lambda1 + lambda2 debe ser 0.3 (usar allow_lambda_override para otro reparto)"
            )
        if self.early_stop_patience < 1:
            raise ConfigError("early_stop_patience debe ser >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate debe ser positivo")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ConfigError("batch_size y max_epochs deben ser >= 1")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ConfigError("warmup_fraction debe estar en [0, 1)")
        if not self.seeds:
            raise ConfigError("seeds no puede estar vacío")
        if not 0 < self.max_source_len <= 128:
            raise ConfigError("max_source_len debe estar en (0, 128]")
        if not 0 < self.max_target_len <= 32:
            raise ConfigError("max_target_len debe estar en (0, 32]")
        if not self.pretrained and self.hidden_size % self.toy_heads:
            raise ConfigError("hidden_size debe ser múltiplo de toy_heads")
        if self.learning_rate not in GRILLA_LR:
            logger.warning(
                "learning_rate %g fuera de la grilla %s", self.learning_rate, GRILLA_LR
            )

    @property
    def modulos_activos(self) -> Dict[str, bool]:
        return {
            "cf": self.mode in ("full", "cf_only"),
            "qv": self.mode in ("full", "qv_only"),
        }

    def con(self, **cambios: Any) -> "TrainConfig":
        """
        Copia con campos modificados (se vuelve a validar).
        """
        return replace(self, **cambios)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, datos: Dict[str, Any]) -> "TrainConfig":
        conocidos = {f.name for f in fields(cls)}
        desconocidos = sorted(set(datos) - conocidos)
        if desconocidos:
            raise ConfigError(f"claves de configuración desconocidas: {desconocidos}")
        return cls(**datos)

    @classmethod
    def from_json(cls, ruta: Union[str, Path]) -> "TrainConfig":
        try:
            datos = json.loads(Path(ruta).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as error:
            raise ConfigError(f"no se pudo leer la configuración {ruta}: {error}") from error
        if not isinstance(datos, dict):
            raise ConfigError("la configuración debe ser un objeto JSON plano")
        return cls.from_dict(datos)

    def to_json(self, ruta: Union[str, Path]) -> None:
        Path(ruta).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")

    @classmethod
    def toy(cls, **cambios: Any) -> "TrainConfig":
        """
        Configuración pequeña, sin pesos preentrenados, para pruebas y gradcheck.
        """
        base = {
            "pretrained": False,
            "backbone_name": "toy-t5",
            "classifier_name": "toy-bert",
            "hidden_size": 8,
            "toy_layers": 1,
            "toy_heads": 2,
            "dropout": 0.0,
            "learning_rate": 1e-3,
            "batch_size": 4,
            "max_epochs": 2,
            "warmup_fraction": 0.0,
            "num_beams": 1,
        }
        base.update(cambios)
        return cls(**base)


def validar_lambdas(lambda1: float, lambda2: float) -> None:
    """
    Restricción 0 < λ1, λ2 < 1 del objetivo combinado.
    """
    for nombre, valor in (("lambda1", lambda1), ("lambda2", lambda2)):
        if not 0.0 < float(valor) < 1.0:
            raise ConfigError(f"{nombre}={valor} fuera del rango (0, 1)")
