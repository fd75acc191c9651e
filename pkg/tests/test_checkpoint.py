"""
Pruebas de guardado y carga de checkpoints
"""
import json

import pytest
import torch

from core.errores import ConfigError
from services.checkpoint import ARCHIVO_MANIFIESTO, cargar_checkpoint, guardar_checkpoint


def test_recarga_reproduce_la_pasada(modelo, tokenizador, config_juguete, batch, tmp_path):
    guardar_checkpoint(tmp_path, modelo, tokenizador, config_juguete, semilla=3, extra={"best_epoch": 2})
    recargado, tokenizador_recargado, manifiesto = cargar_checkpoint(tmp_path)

    with torch.no_grad():
        original = modelo(batch).loss_total.item()
        copia = recargado(batch).loss_total.item()
    assert copia == pytest.approx(original, abs=1e-9)
    assert tokenizador_recargado.convert_ids_to_tokens(batch.input_ids[0].tolist()) == \
        tokenizador.convert_ids_to_tokens(batch.input_ids[0].tolist())
    assert not recargado.training
    assert manifiesto["best_epoch"] == 2


def test_contenido_del_manifiesto(modelo, tokenizador, config_juguete, tmp_path):
    guardar_checkpoint(tmp_path, modelo, tokenizador, config_juguete, semilla=3)
    manifiesto = json.loads((tmp_path / ARCHIVO_MANIFIESTO).read_text())
    assert manifiesto["d"] == 8
    assert (manifiesto["lambda1"], manifiesto["lambda2"]) == (0.15, 0.15)
    assert manifiesto["separator"] == {"token": "</s>", "id": 1}
    assert manifiesto["seed"] == 3
    assert manifiesto["mode"] == "full"
    assert set(manifiesto["flags"]) == {"loss_literal_positive_only", "fusion_use_logits", "classifier_fresh_init"}
    assert manifiesto["schedule"]["after_warmup"] == "constant"


def test_directorio_sin_manifiesto(tmp_path):
    with pytest.raises(ConfigError):
        cargar_checkpoint(tmp_path)
