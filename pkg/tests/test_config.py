"""
Pruebas de TrainConfig
"""
import json
import logging

import pytest

from core.config import TrainConfig
from core.errores import ConfigError


def test_valores_por_tamano():
    base, grande = TrainConfig(), TrainConfig(base_model_size="large")
    assert (base.batch_size, base.max_epochs, base.backbone_name) == (64, 15, "t5-base")
    assert (grande.batch_size, grande.max_epochs, grande.classifier_name) == (32, 10, "bert-large-uncased")
    assert TrainConfig(backbone_family="bart").backbone_name == "facebook/bart-base"


def test_lambdas_deben_sumar_03():
    with pytest.raises(ConfigError):
        TrainConfig(lambda1=0.2, lambda2=0.2)
    assert TrainConfig(lambda1=0.2, lambda2=0.2, allow_lambda_override=True).lambda1 == 0.2


def test_lambda_fuera_de_rango():
    with pytest.raises(ConfigError):
        TrainConfig(lambda1=0.0, lambda2=0.3)


def test_lr_fuera_de_la_grilla_solo_avisa(caplog):
    with caplog.at_level(logging.WARNING):
        TrainConfig(learning_rate=3e-4)
    assert "fuera de la grilla" in caplog.text


@pytest.mark.parametrize("cambio", [{"mode": "otro"}, {"max_source_len": 200}, {"max_target_len": 40},
                                    {"backbone_family": "gpt"}, {"seeds": []}, {"dtype": "float16"}])
def test_valores_invalidos(cambio):
    with pytest.raises(ConfigError):
        TrainConfig(**cambio)


def test_json_plano(tmp_path):
    ruta = tmp_path / "config.json"
    TrainConfig.toy(seeds=[1, 2, 3]).to_json(ruta)
    assert TrainConfig.from_json(ruta) == TrainConfig.toy(seeds=[1, 2, 3])


def test_clave_desconocida(tmp_path):
    ruta = tmp_path / "config.json"
    ruta.write_text(json.dumps({"lambda3": 0.1}))
    with pytest.raises(ConfigError, match="lambda3"):
        TrainConfig.from_json(ruta)


def test_modulos_activos():
    assert TrainConfig(mode="qv_only").modulos_activos == {"cf": False, "qv": True}
    assert TrainConfig(mode="seq2seq").modulos_activos == {"cf": False, "qv": False}
