"""
Pruebas de las estadísticas por partición
"""
from hypothesis import given, strategies as st

from core.estadisticas import compute_stats, contar_palabras
from core.tipos import ECQGSample


def _muestra(entidad: str, palabras_contexto: int) -> ECQGSample:
    contexto = " ".join(["w"] * palabras_contexto)
    return ECQGSample("x", contexto, entidad, "q ?", "w", 0)


def test_una_muestra():
    stats = compute_stats([_muestra("Beyonce", 20)])
    assert stats.size == 1
    assert (stats.entity_len_mean, stats.entity_len_min, stats.entity_len_max) == (1.0, 1, 1)
    assert (stats.context_len_mean, stats.context_len_min, stats.context_len_max) == (20.0, 20, 20)


def test_dos_muestras():
    stats = compute_stats([_muestra("Beyonce", 5), _muestra("New York City", 7)])
    assert (stats.entity_len_mean, stats.entity_len_min, stats.entity_len_max) == (2.0, 1, 3)


def test_media_redondeada():
    stats = compute_stats([_muestra("a", 1), _muestra("a", 1), _muestra("a b", 2)])
    assert stats.entity_len_mean == 1.33


def test_vacio():
    stats = compute_stats([], split="test")
    assert stats.size == 0
    assert stats.split == "test"
    assert stats.entity_len_max == 0 and stats.context_len_mean == 0.0


@given(st.lists(st.tuples(st.integers(1, 6), st.integers(1, 60)), min_size=1, max_size=20))
def test_min_media_max(longitudes):
    muestras = [_muestra(" ".join(["e"] * e), c) for e, c in longitudes]
    stats = compute_stats(muestras)
    assert stats.entity_len_min <= stats.entity_len_mean <= stats.entity_len_max
    assert stats.context_len_min <= stats.context_len_mean <= stats.context_len_max


def test_palabras_separadas_por_espacios():
    assert contar_palabras("Who sang in Destiny's Child?") == 5
    assert contar_palabras("  late   1990s \n") == 2
    assert contar_palabras("") == 0
