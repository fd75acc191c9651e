"""
Pruebas del constructor del dataset ECQG
"""
import json
import logging

import pytest
from hypothesis import given, settings, strategies as st

from core.entidades import DictionaryNER, contiene_secuencia
from core.errores import IntegrityError, PreconditionError, SquadParseError
from core.votacion import normalizar_texto
from services.dataset_builder import (
    FRACCION_VALIDACION,
    build_dataset,
    cargar_dataset,
    digest_archivo,
    guardar_dataset,
    parse_squad,
    procesar_registro,
)
from tests.corpus_sintetico import CONSERVADAS_POR_BLOQUE, ENTIDADES, conservadas_esperadas, documento_squad


def _documento_minimo():
    contexto = "Beyonce rose to fame in the late 1990s."
    return {
        "data": [{
            "title": "Beyonce",
            "paragraphs": [{
                "context": contexto,
                "qas": [
                    {"id": "a", "question": "When did Beyonce become popular?", "is_impossible": False,
                     "answers": [{"text": "late 1990s", "answer_start": 28}]},
                    {"id": "b", "question": "Why?", "is_impossible": True, "answers": []},
                ],
            }],
        }]
    }


def test_parse_conserva_cantidad():
    registros = parse_squad(_documento_minimo())
    assert [r.id for r in registros] == ["a", "b"]
    assert registros[0].answers == (("late 1990s", 28),)
    assert registros[1].is_impossible and registros[1].answers == ()


def test_parse_origen():
    assert {r.origin for r in parse_squad(_documento_minimo(), origin="dev")} == {"dev"}


def test_parse_inicio_fuera_del_contexto():
    documento = _documento_minimo()
    documento["data"][0]["paragraphs"][0]["qas"][0]["answers"][0]["answer_start"] = 500
    with pytest.raises(IntegrityError, match="a"):
        parse_squad(documento)


def test_parse_campo_ausente_nombra_la_ruta():
    documento = _documento_minimo()
    del documento["data"][0]["paragraphs"][0]["qas"][1]["question"]
    with pytest.raises(SquadParseError, match=r"data\[0\]\.paragraphs\[0\]\.qas\[1\]\.question"):
        parse_squad(documento)


def test_parse_tipo_invalido():
    with pytest.raises(SquadParseError):
        parse_squad({"data": {"title": "x"}})


def test_parse_id_duplicado():
    documento = _documento_minimo()
    documento["data"][0]["paragraphs"][0]["qas"][1]["id"] = "a"
    with pytest.raises(IntegrityError):
        parse_squad(documento)


def test_parse_imposible_con_respuestas():
    documento = _documento_minimo()
    documento["data"][0]["paragraphs"][0]["qas"][0]["is_impossible"] = True
    with pytest.raises(SquadParseError):
        parse_squad(documento)


def test_conteos_de_filtrado(ner):
    corpus = parse_squad(documento_squad(10))
    dataset = build_dataset(corpus, ner, seed=1)
    filtros = dataset.filtros
    assert (filtros.total, filtros.imposibles, filtros.sin_entidad, filtros.respuesta_igual_entidad) == (10, 2, 1, 1)
    assert filtros.conservadas == CONSERVADAS_POR_BLOQUE
    assert len(dataset.train) + len(dataset.validation) == CONSERVADAS_POR_BLOQUE
    assert dataset.test == []


def test_particion_por_fraccion(dataset):
    conservadas = conservadas_esperadas(200)
    assert len(dataset.train) == round(conservadas * (1 - FRACCION_VALIDACION))
    assert len(dataset.validation) == conservadas - len(dataset.train)


def test_dev_pasa_a_test(ner):
    corpus = parse_squad(documento_squad(20)) + parse_squad(documento_squad(10, semilla=3, prefijo="d"), origin="dev")
    dataset = build_dataset(corpus, ner)
    assert len(dataset.test) == conservadas_esperadas(10)
    assert all(m.id.startswith("d") for m in dataset.test)
    assert not any(m.id.startswith("d") for m in dataset.train + dataset.validation)


def test_invariantes_de_cada_muestra(dataset):
    for muestra in dataset.train + dataset.validation + dataset.test:
        fin = muestra.answer_start + len(muestra.answer_text)
        assert muestra.context[muestra.answer_start:fin] == muestra.answer_text
        assert normalizar_texto(muestra.answer_text) != normalizar_texto(muestra.entity)
        assert contiene_secuencia(muestra.context, muestra.entity)


def test_votacion_aplicada(dataset):
    # las anotaciones "in <año>" pierden frente a "<año>"
    assert all(not m.answer_text.startswith("in ") for m in dataset.train)


def test_salida_identica_con_la_misma_semilla(corpus, ner, tmp_path):
    digests = []
    for corrida in ("uno", "dos"):
        dataset = build_dataset(corpus, ner, seed=7, hilos=2)
        guardar_dataset(dataset, tmp_path / corrida, {"seed": 7})
        digests.append({
            nombre: digest_archivo(tmp_path / corrida / nombre)
            for nombre in ("train.jsonl", "validation.jsonl", "test.jsonl", "stats.json", "meta.json")
        })
    assert digests[0] == digests[1]


def test_semillas_distintas_cambian_la_mezcla(corpus, ner):
    a = build_dataset(corpus, ner, seed=1)
    b = build_dataset(corpus, ner, seed=2)
    assert [m.id for m in a.train] != [m.id for m in b.train]
    assert sorted(m.id for m in a.train + a.validation) == sorted(m.id for m in b.train + b.validation)


def test_fraccion_invalida(corpus, ner):
    with pytest.raises(PreconditionError):
        build_dataset(corpus, ner, train_fraction=1.0)


def test_dataset_vacio_solo_avisa(ner, caplog):
    corpus = [r for r in parse_squad(documento_squad(10)) if r.is_impossible]
    with caplog.at_level(logging.WARNING):
        dataset = build_dataset(corpus, ner)
    assert dataset.train == dataset.validation == dataset.test == []
    assert "vacío" in caplog.text


def test_guardar_y_cargar(dataset, tmp_path):
    estadisticas = guardar_dataset(dataset, tmp_path, {"seed": 42})
    assert estadisticas["filtros"]["conservadas"] == conservadas_esperadas(200)
    assert json.loads((tmp_path / "stats.json").read_text())["train"]["size"] == len(dataset.train)
    cargado = cargar_dataset(tmp_path)
    assert cargado.train == dataset.train
    assert cargado.validation == dataset.validation


@settings(max_examples=25, deadline=None)
@given(st.sets(st.integers(min_value=0, max_value=59), max_size=60))
def test_monotonia_del_filtrado(indices):
    ner = DictionaryNER(ENTIDADES)
    completo = parse_squad(documento_squad(60))
    parcial = [completo[i] for i in sorted(indices)]
    emitidas_completo = {}
    for registro in completo:
        _, muestra = procesar_registro(registro, ner)
        if muestra is not None:
            emitidas_completo[muestra.id] = muestra
    subconjunto = build_dataset(parcial, ner, seed=0)
    for muestra in subconjunto.train + subconjunto.validation:
        assert emitidas_completo[muestra.id] == muestra
