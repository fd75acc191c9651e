"""
Votación de respuestas y normalización de texto
"""
import re
import string
from collections import Counter, defaultdict
from typing import Dict, List, Sequence

from core.errores import PreconditionError
from core.tipos import Respuesta

_BORDES = string.whitespace + string.punctuation
_ESPACIOS = re.compile(r"\s+")


def normalizar_texto(texto: str) -> str:
    """
    Minúsculas, sin espacios ni puntuación en los bordes y espacios internos colapsados.

    Args:
        texto: Cadena original

    Returns:
        Cadena normalizada
    """
    return _ESPACIOS.sub(" ", texto.lower().strip(_BORDES))


def vote_answer(answers: Sequence[Respuesta]) -> Respuesta:
    """
    Elige la respuesta más frecuente (por texto normalizado).

    Empates: texto normalizado más corto y luego menor char_start.
    Dentro del grupo ganador se devuelve el miembro con menor char_start.

    Args:
        answers: Lista no vacía de (texto, char_start)

    Returns:
        Un miembro de la lista de entrada
    """
    if not answers:
        raise PreconditionError("vote_answer requiere al menos una respuesta")

    frecuencias: Counter = Counter()
    grupos: Dict[str, List[Respuesta]] = defaultdict(list)
    for texto, inicio in answers:
        clave = normalizar_texto(texto)
        frecuencias[clave] += 1
        grupos[clave].append((texto, inicio))

    ganador = min(
        grupos,
        key=lambda clave: (
            -frecuencias[clave],
            len(clave),
            min(inicio for _, inicio in grupos[clave]),
        ),
    )
    # min() conserva el primero ante igualdad de inicio
    return min(grupos[ganador], key=lambda respuesta: respuesta[1])
