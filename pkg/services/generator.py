"""
Generación de preguntas centradas en entidades
"""
import logging
from typing import Any, Dict, List, Sequence

import torch
from tqdm import tqdm
from transformers import PreTrainedTokenizerBase

from core.errores import InputError
from core.modelo import GenconeModel

logger = logging.getLogger(__name__)


def _dispositivo(modelo: GenconeModel) -> torch.device:
    return next(modelo.parameters()).device


def _parametros_decodificacion(modelo: GenconeModel, strategy: str, beam_size: int, max_len: int):
    if strategy not in ("greedy", "beam"):
        raise InputError(f"estrategia de decodificación desconocida: {strategy}")
    if max_len < 1:
        raise InputError("max_len debe ser >= 1")
    haces = 1 if strategy == "greedy" else max(1, beam_size)
    return haces, min(max_len, modelo.config.max_target_len)


def generate_batch(
    filas: Sequence[Dict[str, Any]],
    modelo: GenconeModel,
    tokenizador: PreTrainedTokenizerBase,
    strategy: str = "beam",
    beam_size: int = 4,
    max_len: int = 32,
    batch_size: int = 16,
) -> List[Dict[str, str]]:
    """
    Genera preguntas para filas {"id", "entity", "context"}.

    Args:
        filas: Entradas
        modelo: Modelo entrenado
        tokenizador: Tokenizador del checkpoint
        strategy: "greedy" o "beam"
        beam_size: Tamaño del haz
        max_len: Tokens máximos generados (acotado a max_target_len)
        batch_size: Entradas por llamada al modelo

    Returns:
        Líneas {"id", "text"} en el orden de entrada
    """
    haces, largo = _parametros_decodificacion(modelo, strategy, beam_size, max_len)
    for fila in filas:
        if not str(fila.get("context", "")).strip():
            raise InputError(f"contexto vacío en la entrada {fila.get('id', '?')}")
        if not str(fila.get("entity", "")).strip():
            raise InputError(f"entidad vacía en la entrada {fila.get('id', '?')}")

    modelo.eval()
    dispositivo = _dispositivo(modelo)
    salidas: List[Dict[str, str]] = []
    for inicio in tqdm(range(0, len(filas), batch_size), desc="Generando", disable=len(filas) <= batch_size):
        lote = filas[inicio:inicio + batch_size]
        entrada = tokenizador(
            [str(f["entity"]) for f in lote],
            [str(f["context"]) for f in lote],
            truncation="only_second",
            max_length=modelo.config.max_source_len,
            padding=True,
            return_tensors="pt",
        )
        ids = modelo.generar_ids(
            entrada["input_ids"].to(dispositivo),
            entrada["attention_mask"].to(dispositivo),
            num_beams=haces,
            max_len=largo,
        )
        textos = tokenizador.batch_decode(ids, skip_special_tokens=True)
        salidas.extend(
            {"id": str(f.get("id", inicio + k)), "text": t.strip()} for k, (f, t) in enumerate(zip(lote, textos))
        )
    return salidas


def generate(
    entity: str,
    context: str,
    modelo: GenconeModel,
    tokenizador: PreTrainedTokenizerBase,
    strategy: str = "beam",
    beam_size: int = 4,
    max_len: int = 32,
) -> str:
    """
    Genera una pregunta sobre `entity` a partir de `context`.
    """
    return generate_batch(
        [{"id": "0", "entity": entity, "context": context}],
        modelo, tokenizador, strategy, beam_size, max_len,
    )[0]["text"]
