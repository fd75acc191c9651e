"""
Estadísticas por partición (tamaño, longitud de entidad y de contexto)
"""
from typing import Sequence

import pandas as pd

from core.tipos import DatasetStats, ECQGSample


def contar_palabras(texto: str) -> int:
    return len(texto.split())


def compute_stats(samples: Sequence[ECQGSample], split: str = "train") -> DatasetStats:
    """
    Calcula tamaño y longitudes (en palabras separadas por espacios) de una partición.

    Args:
        samples: Muestras de la partición
        split: Nombre de la partición

    Returns:
        DatasetStats con medias redondeadas a 2 decimales
    """
    if not samples:
        return DatasetStats(split, 0, 0.0, 0, 0, 0.0, 0, 0)

    tabla = pd.DataFrame({
        "entidad": [contar_palabras(m.entity) for m in samples],
        "contexto": [contar_palabras(m.context) for m in samples],
    })
    resumen = tabla.agg(["mean", "min", "max"])

    return DatasetStats(
        split=split,
        size=len(samples),
        entity_len_mean=round(float(resumen.at["mean", "entidad"]), 2),
        entity_len_min=int(resumen.at["min", "entidad"]),
        entity_len_max=int(resumen.at["max", "entidad"]),
        context_len_mean=round(float(resumen.at["mean", "contexto"]), 2),
        context_len_min=int(resumen.at["min", "contexto"]),
        context_len_max=int(resumen.at["max", "contexto"]),
    )
