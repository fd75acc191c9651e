"""
Fixtures compartidas: corpus sintético, configuración y modelo de juguete
"""
import pytest
import torch

from core.config import TrainConfig
from core.entidades import DictionaryNER
from core.modelo import construir_modelo
from core.tokenizacion import codificar_muestra, collate, construir_tokenizador_palabras, textos_de
from services.dataset_builder import build_dataset, parse_squad
from tests.corpus_sintetico import ENTIDADES, documento_squad


@pytest.fixture(scope="session")
def ner():
    return DictionaryNER(ENTIDADES)


@pytest.fixture(scope="session")
def corpus():
    return parse_squad(documento_squad(200))


@pytest.fixture(scope="session")
def dataset(corpus, ner):
    return build_dataset(corpus, ner, seed=42)


@pytest.fixture(scope="session")
def muestras(dataset):
    return dataset.train + dataset.validation


@pytest.fixture(scope="session")
def tokenizador(muestras):
    return construir_tokenizador_palabras(textos_de(muestras))


@pytest.fixture
def config_juguete():
    return TrainConfig.toy(dtype="float64")


@pytest.fixture
def modelo(config_juguete, tokenizador):
    torch.manual_seed(0)
    return construir_modelo(config_juguete, tokenizador).eval()


@pytest.fixture
def ejemplos(muestras, tokenizador, config_juguete):
    return [
        codificar_muestra(m, tokenizador, config_juguete.max_source_len, config_juguete.max_target_len)
        for m in muestras[:3]
    ]


@pytest.fixture
def batch(ejemplos, tokenizador):
    return collate(ejemplos, tokenizador.pad_token_id)
