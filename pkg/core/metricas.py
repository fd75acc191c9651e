"""
Métricas automáticas: BLEU-1..4, METEOR y ROUGE_L (escala 0-100)
"""
import math
from collections import Counter
from typing import List, Optional, Sequence, Tuple

import numpy as np
from nltk.stem.porter import PorterStemmer
from nltk.tokenize import wordpunct_tokenize
from nltk.translate.bleu_score import brevity_penalty, closest_ref_length
from nltk.translate.meteor_score import meteor_score
from nltk.util import ngrams

from core.errores import ContractError

TOKENIZACION = "lowercase+wordpunct"


def tokenizar(texto: str) -> List[str]:
    """
    Minúsculas y separación por espacios y puntuación.
    """
    return wordpunct_tokenize(texto.lower())


def _validar(candidates: Sequence[str], references: Sequence[str]) -> None:
    if len(candidates) != len(references):
        raise ContractError(
            f"{len(candidates)} candidatas frente a {len(references)} referencias"
        )


def _validar_orden(n: int) -> None:
    if not 1 <= n <= 4:
        raise ContractError(f"orden BLEU fuera de 1..4: {n}")


def _conteos_bleu(
    pares: Sequence[Tuple[List[str], List[str]]], n: int
) -> Tuple[List[int], List[int], int, int]:
    """
    Coincidencias recortadas y totales por orden, sumados sobre el corpus.

    Una oración sin n-gramas de orden k no suma nada al total de ese orden.
    """
    coincidencias, totales = [0] * n, [0] * n
    largo_hipotesis = largo_referencia = 0
    for hipotesis, referencia in pares:
        largo_hipotesis += len(hipotesis)
        largo_referencia += closest_ref_length([referencia], len(hipotesis))
        for k in range(1, n + 1):
            propios = Counter(ngrams(hipotesis, k))
            ajenos = Counter(ngrams(referencia, k))
            coincidencias[k - 1] += sum(min(cuenta, ajenos[g]) for g, cuenta in propios.items())
            totales[k - 1] += sum(propios.values())
    return coincidencias, totales, largo_hipotesis, largo_referencia


def _bleu_de_conteos(
    coincidencias: Sequence[int],
    totales: Sequence[int],
    largo_hipotesis: int,
    largo_referencia: int,
    suavizado: Optional[str] = None,
) -> float:
    if largo_hipotesis == 0:
        return 0.0
    logaritmos = []
    for k, (m, t) in enumerate(zip(coincidencias, totales)):
        # órdenes sin ningún n-grama en el corpus quedan fuera de la media
        if t == 0:
            continue
        if suavizado == "method1" and m == 0:
            m = 0.1
        elif suavizado == "method2" and k > 0:
            m, t = m + 1, t + 1
        if m == 0:
            return 0.0
        logaritmos.append(math.log(m / t))
    penalizacion = brevity_penalty(largo_referencia, largo_hipotesis)
    return 100.0 * penalizacion * math.exp(sum(logaritmos) / len(logaritmos))


def compute_bleu(
    candidates: Sequence[str], references: Sequence[str], n: int = 4, smoothing: bool = False
) -> float:
    """
    BLEU-n acumulado a nivel de corpus con penalización por brevedad.

    Args:
        candidates: Preguntas generadas
        references: Preguntas de referencia (una por candidata)
        n: Orden máximo de n-gramas (1..4)
        smoothing: Suavizado method2 de Lin y Och (desactivado por defecto)

    Returns:
        Puntuación en [0, 100]
    """
    _validar(candidates, references)
    _validar_orden(n)
    pares = [(tokenizar(c), tokenizar(r)) for c, r in zip(candidates, references)]
    return _bleu_de_conteos(*_conteos_bleu(pares, n), suavizado="method2" if smoothing else None)


def bleu_oracion(candidate: str, reference: str, n: int = 4) -> float:
    """
    BLEU de una sola pareja (suavizado method1 para no anular oraciones cortas).
    """
    _validar_orden(n)
    pares = [(tokenizar(candidate), tokenizar(reference))]
    return _bleu_de_conteos(*_conteos_bleu(pares, n), suavizado="method1")


def lcs(a: Sequence[str], b: Sequence[str]) -> int:
    """
    Longitud de la subsecuencia común más larga (programación dinámica por filas).
    """
    if not a or not b:
        return 0
    anterior = np.zeros(len(b) + 1, dtype=np.int64)
    b_arr = np.array(b, dtype=object)
    for simbolo in a:
        iguales = b_arr == simbolo
        actual = np.zeros_like(anterior)
        for j in range(1, len(b) + 1):
            actual[j] = anterior[j - 1] + 1 if iguales[j - 1] else max(anterior[j], actual[j - 1])
        anterior = actual
    return int(anterior[-1])


def rouge_l_oracion(candidate: str, reference: str, beta: float = 1.0) -> float:
    """
    F-medida de ROUGE_L de una pareja, en [0, 1].
    """
    c, r = tokenizar(candidate), tokenizar(reference)
    comun = lcs(c, r)
    if comun == 0:
        return 0.0
    precision, recall = comun / len(c), comun / len(r)
    return (1 + beta ** 2) * precision * recall / (recall + beta ** 2 * precision)


def compute_rouge_l(candidates: Sequence[str], references: Sequence[str], beta: float = 1.0) -> float:
    """
    ROUGE_L promediado sobre el corpus, en [0, 100].

    Args:
        candidates: Preguntas generadas
        references: Preguntas de referencia
        beta: Peso del recall en la F-medida

    Returns:
        Puntuación media
    """
    _validar(candidates, references)
    if not candidates:
        return 0.0
    return 100.0 * float(np.mean([rouge_l_oracion(c, r, beta) for c, r in zip(candidates, references)]))


class _SinSinonimos:
    """
    Sustituto de WordNet sin sinónimos: deja METEOR con los módulos exacto y raíz.
    """

    @staticmethod
    def synsets(_palabra):
        return []


_RAIZ = PorterStemmer()


def meteor_oracion(candidate: str, reference: str) -> float:
    hipotesis = tokenizar(candidate)
    if not hipotesis:
        return 0.0
    return float(meteor_score([tokenizar(reference)], hipotesis, stemmer=_RAIZ, wordnet=_SinSinonimos()))


def compute_meteor(candidates: Sequence[str], references: Sequence[str]) -> float:
    """
    METEOR (exacto + raíz) promediado sobre el corpus, en [0, 100].
    """
    _validar(candidates, references)
    if not candidates:
        return 0.0
    return 100.0 * float(np.mean([meteor_oracion(c, r) for c, r in zip(candidates, references)]))
