"""
Pruebas de la alineación de spans de respuesta con tokens
"""
import numpy as np
import pytest

from core.alineacion import align_span
from core.errores import AlignmentError
from core.tipos import ECQGSample
from core.tokenizacion import codificar_muestra, construir_tokenizador_palabras

CONTEXTO = "Beyonce was born in Houston"
# entidad, separador, cinco palabras del contexto, separador final
OFFSETS = [(0, 7), (0, 0), (0, 7), (8, 11), (12, 16), (17, 19), (20, 27), (0, 0)]
SEGMENTOS = [0, None, 1, 1, 1, 1, 1, None]


def test_respuesta_de_un_token():
    bits = align_span(CONTEXTO, "Houston", 20, OFFSETS, SEGMENTOS)
    assert bits.tolist() == [0, 0, 0, 0, 0, 0, 1, 0]


def test_entidad_y_separador_quedan_en_cero():
    bits = align_span(CONTEXTO, "Beyonce", 0, OFFSETS, SEGMENTOS)
    assert bits.tolist() == [0, 0, 1, 0, 0, 0, 0, 0]


def test_respuesta_de_varios_tokens():
    contexto = "w0 w1 w2 w3 w4 w5 w6 w7 w8 w9"
    offsets = [(3 * i, 3 * i + 2) for i in range(10)]
    bits = align_span(contexto, "w5 w6 w7", 15, offsets, [1] * 10)
    assert np.flatnonzero(bits).tolist() == [5, 6, 7]


def test_solapamiento_parcial_cuenta():
    # "ust" cae dentro del token "Houston"
    bits = align_span(CONTEXTO, "ust", 22, OFFSETS, SEGMENTOS)
    assert np.flatnonzero(bits).tolist() == [6]


def test_span_que_no_coincide():
    with pytest.raises(AlignmentError):
        align_span(CONTEXTO, "Dallas", 20, OFFSETS, SEGMENTOS)


def test_respuesta_truncada():
    # los tokens solo cubren "Beyonce was born"
    with pytest.raises(AlignmentError):
        align_span(CONTEXTO, "Houston", 20, OFFSETS[:5] + [(0, 0)], SEGMENTOS[:5] + [None])


def test_longitudes_distintas():
    with pytest.raises(AlignmentError):
        align_span(CONTEXTO, "Houston", 20, OFFSETS, SEGMENTOS[:-1])


def test_respuesta_mas_alla_de_la_longitud_maxima():
    palabras = [f"w{i}" for i in range(200)] + ["Houston"]
    contexto = " ".join(palabras)
    muestra = ECQGSample("largo", contexto, "Beyonce", "Where ?", "Houston", contexto.index("Houston"))
    tokenizador = construir_tokenizador_palabras([contexto, "Beyonce Where ?"])

    with pytest.raises(AlignmentError):
        codificar_muestra(muestra, tokenizador, max_source_len=128, max_target_len=32)

    corta = ECQGSample("corto", "w0 w1 Houston", "Beyonce", "Where ?", "Houston", 6)
    ejemplo = codificar_muestra(corta, tokenizador, max_source_len=128, max_target_len=32)
    # Beyonce </s> w0 w1 Houston </s>
    assert ejemplo["answer_bits"] == [0, 0, 0, 0, 1, 0]
    assert ejemplo["focus_bits"] == ejemplo["answer_bits"]
