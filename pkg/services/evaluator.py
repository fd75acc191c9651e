"""
Evaluación a nivel de corpus y agregación de reportes
"""
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import pandas as pd

from core.errores import InputError, MissingIdsError
from core.metricas import (
    TOKENIZACION,
    bleu_oracion,
    compute_bleu,
    compute_meteor,
    compute_rouge_l,
    rouge_l_oracion,
)
from services.dataset_builder import leer_jsonl

logger = logging.getLogger(__name__)

COLUMNAS = ("bleu1", "bleu2", "bleu3", "bleu4", "meteor", "rouge_l")
ENCABEZADOS = ("BLEU-1", "BLEU-2", "BLEU-3", "BLEU-4", "METEOR", "ROUGE_L")


@dataclass
class EvalReport:
    bleu1: float
    bleu2: float
    bleu3: float
    bleu4: float
    meteor: float
    rouge_l: float
    n: int
    per_sample: List[Dict[str, Any]] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def puntuaciones(self) -> Dict[str, float]:
        return {columna: getattr(self, columna) for columna in COLUMNAS}

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, datos: Dict[str, Any]) -> "EvalReport":
        return cls(**datos)

    def guardar(self, ruta: Union[str, Path]) -> None:
        Path(ruta).write_text(json.dumps(self.to_dict(), indent=2, ensure_ascii=False), encoding="utf-8")

    @classmethod
    def cargar(cls, ruta: Union[str, Path]) -> "EvalReport":
        return cls.from_dict(json.loads(Path(ruta).read_text(encoding="utf-8")))


def evaluar_pares(
    ids: Sequence[str],
    candidates: Sequence[str],
    references: Sequence[str],
    smoothing: bool = False,
    rouge_beta: float = 1.0,
) -> EvalReport:
    """
    Calcula todas las métricas sobre parejas alineadas.

    Las parejas se ordenan por id, así el resultado no depende del orden de entrada.

    Args:
        ids: Identificadores de cada pareja
        candidates: Textos generados
        references: Textos de referencia
        smoothing: Suavizado de BLEU
        rouge_beta: Peso del recall en ROUGE_L

    Returns:
        EvalReport completo con desglose por muestra
    """
    if not len(ids) == len(candidates) == len(references):
        raise InputError("ids, candidatas y referencias deben tener la misma longitud")
    orden = sorted(range(len(ids)), key=lambda i: ids[i])
    ids = [ids[i] for i in orden]
    candidatas = [candidates[i] for i in orden]
    referencias = [references[i] for i in orden]

    return EvalReport(
        bleu1=compute_bleu(candidatas, referencias, 1, smoothing),
        bleu2=compute_bleu(candidatas, referencias, 2, smoothing),
        bleu3=compute_bleu(candidatas, referencias, 3, smoothing),
        bleu4=compute_bleu(candidatas, referencias, 4, smoothing),
        meteor=compute_meteor(candidatas, referencias),
        rouge_l=compute_rouge_l(candidatas, referencias, rouge_beta),
        n=len(ids),
        per_sample=[
            {
                "id": i,
                "bleu4": bleu_oracion(c, r),
                "rouge_l": 100.0 * rouge_l_oracion(c, r, rouge_beta),
            }
            for i, c, r in zip(ids, candidatas, referencias)
        ],
        metadata={
            "tokenization": TOKENIZACION,
            "bleu_smoothing": smoothing,
            "rouge_beta": rouge_beta,
            "meteor_modules": ["exact", "stem"],
        },
    )


def _leer_textos(ruta: Union[str, Path]) -> Dict[str, str]:
    textos: Dict[str, str] = {}
    for numero, fila in enumerate(leer_jsonl(ruta), start=1):
        if "id" not in fila or "text" not in fila:
            raise InputError(f"{ruta}:{numero}: se esperaban los campos 'id' y 'text'")
        textos[str(fila["id"])] = str(fila["text"])
    return textos


def evaluate_corpus(
    predictions: Union[str, Path],
    references: Union[str, Path],
    smoothing: bool = False,
) -> EvalReport:
    """
    Evalúa predictions.jsonl contra references.jsonl (líneas {"id", "text"}).

    Raises:
        MissingIdsError: Si algún id aparece en un solo archivo
    """
    predichas = _leer_textos(predictions)
    referencias = _leer_textos(references)
    faltantes = set(predichas) ^ set(referencias)
    if faltantes:
        raise MissingIdsError(list(faltantes))
    ids = sorted(referencias)
    reporte = evaluar_pares(ids, [predichas[i] for i in ids], [referencias[i] for i in ids], smoothing)
    logger.info("evaluadas %d parejas: %s", reporte.n, reporte.puntuaciones())
    return reporte


def promediar_reportes(reportes: Sequence[EvalReport]) -> EvalReport:
    """
    Media aritmética de las métricas de corpus; conserva los reportes por semilla.
    """
    if not reportes:
        raise InputError("no hay reportes que promediar")
    tabla = pd.DataFrame([r.puntuaciones() for r in reportes])
    medias = tabla.mean(axis=0)
    return EvalReport(
        **{columna: float(medias[columna]) for columna in COLUMNAS},
        n=reportes[0].n,
        per_sample=[],
        metadata={
            "promedio_de": len(reportes),
            "por_semilla": [r.puntuaciones() for r in reportes],
            **{k: v for k, v in reportes[0].metadata.items() if k != "seed"},
        },
    )
