"""
Alineación de spans de caracteres con tokens
"""
from typing import Optional, Sequence, Tuple

import numpy as np

from core.errores import AlignmentError

SEGMENTO_CONTEXTO = 1


def align_span(
    context: str,
    answer_text: str,
    answer_start: int,
    offsets: Sequence[Optional[Tuple[int, int]]],
    sequence_ids: Sequence[Optional[int]],
) -> np.ndarray:
    """
    Convierte un span de caracteres en un vector de bits sobre los tokens de entrada.

    Un token recibe 1 si su rango de caracteres se solapa con
    [answer_start, answer_start + len(answer_text)). Solo cuentan los tokens del
    segmento de contexto; la entidad y el separador quedan siempre en 0.

    Args:
        context: Texto del contexto
        answer_text: Texto de la respuesta
        answer_start: Offset de la respuesta en el contexto
        offsets: (inicio, fin) por token, relativos al texto de su segmento
        sequence_ids: Segmento de cada token (0 entidad, 1 contexto, None especial)

    Returns:
        Vector de enteros 0/1 de la misma longitud que los tokens
    """
    if len(offsets) != len(sequence_ids):
        raise AlignmentError("offsets y sequence_ids tienen longitudes distintas")
    fin = answer_start + len(answer_text)
    if answer_start < 0 or context[answer_start:fin] != answer_text:
        raise AlignmentError(
            f"el span ({answer_start}, {fin}) no coincide con '{answer_text}'"
        )

    bits = np.zeros(len(offsets), dtype=np.int64)
    for i, (offset, segmento) in enumerate(zip(offsets, sequence_ids)):
        if segmento != SEGMENTO_CONTEXTO or offset is None:
            continue
        inicio_token, fin_token = offset
        if fin_token > inicio_token and inicio_token < fin and fin_token > answer_start:
            bits[i] = 1

    if not bits.any():
        raise AlignmentError(
            f"la respuesta '{answer_text}' (carácter {answer_start}) no cae en ningún token"
        )
    return bits
