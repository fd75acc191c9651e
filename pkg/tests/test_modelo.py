"""
Pruebas del modelo: formas, normalización, enmascarado, fusión y ablaciones
"""
import pytest
import torch
import torch.nn.functional as F
from transformers import BertModel

from core.clasificador import configuracion_bert_juguete, construir_clasificador
from core.config import TrainConfig
from core.errores import ContractError
from core.modelo import construir_modelo
from core.perdidas import cf_loss, qg_loss, qv_loss
from core.tokenizacion import TokenBatch, collate


def _modelo_d2(tokenizador):
    torch.manual_seed(0)
    return construir_modelo(TrainConfig.toy(hidden_size=2, toy_heads=1, dtype="float64"), tokenizador).eval()


def test_forma_de_la_codificacion(modelo, tokenizador):
    input_ids = torch.randint(3, len(tokenizador), (2, 16))
    H_C = modelo.encode(input_ids, torch.ones_like(input_ids))
    assert H_C.shape == (2, 16, 8)


def test_muestra_duplicada_da_filas_identicas(modelo, ejemplos, tokenizador):
    lote = collate([ejemplos[0], ejemplos[0]], tokenizador.pad_token_id)
    with torch.no_grad():
        H_C = modelo.encode(lote.input_ids, lote.attention_mask)
    torch.testing.assert_close(H_C[0], H_C[1], rtol=0, atol=0)


def test_relleno_no_altera_posiciones_reales(modelo, ejemplos, tokenizador):
    ids = ejemplos[0]["input_ids"]
    largo = len(ids)
    pad = tokenizador.pad_token_id
    corto = torch.tensor([ids])
    relleno = torch.tensor([ids + [pad] * 4])
    mascara = torch.tensor([[1] * largo + [0] * 4])
    with torch.no_grad():
        H_corto = modelo.encode(corto, torch.ones_like(corto))
        H_relleno = modelo.encode(relleno, mascara)
    torch.testing.assert_close(H_relleno[:, :largo], H_corto, rtol=0, atol=1e-6)


def test_entrada_demasiado_larga(modelo):
    ids = torch.full((1, 129), 3)
    with pytest.raises(ContractError):
        modelo.encode(ids, torch.ones_like(ids))


def test_probabilidades_normalizadas(modelo, batch):
    with torch.no_grad():
        salida = modelo(batch)
    for probabilidades in (salida.H_F, salida.H_A, salida.p_Q):
        torch.testing.assert_close(
            probabilidades.sum(-1), torch.ones(probabilidades.shape[:2], dtype=torch.float64), atol=1e-5, rtol=0
        )
    assert salida.H_F.shape == (*batch.input_ids.shape, 2)
    assert salida.p_Q.shape == (*batch.question_ids.shape, modelo.seq2seq.config.vocab_size)
    assert salida.H_Q.shape == (*batch.question_ids.shape, 8)
    assert salida.S.shape == (batch.tamano, batch.input_ids.shape[1], batch.question_ids.shape[1])


@pytest.mark.parametrize("clasificador", ["clasificador_foco", "clasificador_respuesta"])
def test_cabeza_en_cero_da_uniforme(modelo, batch, clasificador):
    cabeza = getattr(modelo, clasificador).cabeza
    with torch.no_grad():
        cabeza.weight.zero_()
        cabeza.bias.zero_()
        H = torch.randn(batch.tamano, batch.input_ids.shape[1], 8, dtype=torch.float64)
        probabilidades = getattr(modelo, clasificador)(H, batch.attention_mask)
    assert torch.all(probabilidades == 0.5)


def test_clasificador_sin_capas_a_mano():
    bert = BertModel(configuracion_bert_juguete(TrainConfig.toy(hidden_size=2, toy_heads=1)), add_pooling_layer=False)
    bert.encoder.layer = bert.encoder.layer[:0]
    clasificador = construir_clasificador(2, bert).double()
    with torch.no_grad():
        clasificador.cabeza.weight.copy_(torch.tensor([[1.0, -1.0], [0.5, 2.0]]))
        clasificador.cabeza.bias.copy_(torch.tensor([0.1, -0.2]))
    H = torch.tensor([[[0.3, 0.7]]], dtype=torch.float64)
    logits = torch.tensor([0.3 - 0.7 + 0.1, 0.15 + 1.4 - 0.2], dtype=torch.float64)
    esperado = torch.exp(logits) / torch.exp(logits).sum()
    torch.testing.assert_close(clasificador(H, torch.ones(1, 1))[0, 0], esperado)


def test_fusion_inicial_es_identidad(modelo, batch):
    with torch.no_grad():
        H_C = modelo.encode(batch.input_ids, batch.attention_mask)
        H_CF = modelo.fuse(H_C, modelo.focus_locate(H_C, batch.attention_mask))
    torch.testing.assert_close(H_CF, H_C)
    assert modelo.fusion.weight.shape == (8, 10)


def test_fusion_en_cero_anula(modelo, batch):
    with torch.no_grad():
        modelo.fusion.weight.zero_()
        H_C = modelo.encode(batch.input_ids, batch.attention_mask)
        H_CF = modelo.fuse(H_C, modelo.focus_locate(H_C, batch.attention_mask))
    assert torch.all(H_CF == 0)


def test_fusion_a_mano(tokenizador):
    modelo = _modelo_d2(tokenizador)
    with torch.no_grad():
        modelo.fusion.weight.fill_(1.0)
        H_CF = modelo.fuse(
            torch.tensor([[[1.0, 2.0]]], dtype=torch.float64),
            torch.tensor([[[0.3, 0.7]]], dtype=torch.float64),
        )
    torch.testing.assert_close(H_CF, torch.full((1, 1, 2), 4.0, dtype=torch.float64))


def test_fusion_formas_incompatibles(modelo):
    with pytest.raises(ContractError):
        modelo.fuse(torch.zeros(1, 3, 8), torch.zeros(1, 4, 2))


def test_independencia_del_batch(modelo, ejemplos, tokenizador):
    lote = collate(ejemplos, tokenizador.pad_token_id)
    solo = collate([ejemplos[1]], tokenizador.pad_token_id)
    largo_q = len(ejemplos[1]["question_ids"])
    with torch.no_grad():
        p_lote = modelo(lote).p_Q[1, :largo_q]
        p_solo = modelo(solo).p_Q[0, :largo_q]
    torch.testing.assert_close(p_lote, p_solo, rtol=0, atol=1e-9)


def test_pregunta_demasiado_larga(modelo, batch):
    ids = torch.full((1, 33), 3)
    with pytest.raises(ContractError):
        modelo.qg_forward(torch.zeros(1, 4, 8, dtype=torch.float64), torch.ones(1, 4), ids)


def test_modo_seq2seq(modelo, batch):
    with torch.no_grad():
        salida = modelo(batch, mode="seq2seq")
    assert salida.loss_total.item() == salida.L_QG.item()
    assert salida.H_F is None and salida.H_A is None and salida.S is None


def test_modo_qv_only_sin_fusion(modelo, batch):
    with torch.no_grad():
        salida = modelo(batch, mode="qv_only")
    assert torch.equal(salida.H_CF, salida.H_C)
    assert salida.L_CF.item() == 0.0
    assert salida.L_QV.item() > 0.0


def test_modo_cf_only(modelo, batch):
    with torch.no_grad():
        salida = modelo(batch, mode="cf_only")
    assert salida.L_QV.item() == 0.0 and salida.H_CQ is None
    assert salida.L_CF.item() > 0.0


def test_pasada_completa_igual_a_la_composicion(modelo, batch):
    mascara = batch.attention_mask
    with torch.no_grad():
        salida = modelo(batch, mode="full")
        H_C = modelo.encode(batch.input_ids, mascara)
        H_F = modelo.focus_locate(H_C, mascara)
        H_CF = modelo.fuse(H_C, H_F)
        p_Q, H_Q = modelo.qg_forward(H_CF, mascara, batch.question_ids)
        _, H_CQ = modelo.dual_attention(H_C, H_Q, mascara, batch.question_mask)
        H_A = modelo.answer_infer(H_CQ, mascara)
        compuesta = (
            qg_loss(p_Q, batch.question_ids, batch.question_mask)
            + 0.15 * cf_loss(H_F, batch.focus_bits, mascara)
            + 0.15 * qv_loss(H_A, batch.answer_bits, mascara)
        )
    assert salida.loss_total.item() == pytest.approx(compuesta.item(), abs=1e-9)
    assert salida.loss_parts["loss_total"] == pytest.approx(
        salida.L_QG.item() + 0.15 * salida.L_CF.item() + 0.15 * salida.L_QV.item(), abs=1e-9
    )


def test_perdidas_por_muestra_no_dependen_del_relleno(modelo, ejemplos, tokenizador):
    lote = collate(ejemplos, tokenizador.pad_token_id)
    with torch.no_grad():
        for i, ejemplo in enumerate(ejemplos):
            solo = modelo(collate([ejemplo], tokenizador.pad_token_id)).loss_parts
            dentro = modelo(lote.muestra(i)).loss_parts
            for parte in ("L_QG", "L_CF", "L_QV", "loss_total"):
                assert dentro[parte] == pytest.approx(solo[parte], abs=1e-9)


def _lote_aleatorio(generador, vocabulario, pad):
    tamano = int(torch.randint(1, 4, (), generator=generador))
    largo_c = int(torch.randint(4, 21, (), generator=generador))
    largo_q = int(torch.randint(2, 11, (), generator=generador))
    input_ids = torch.randint(3, vocabulario, (tamano, largo_c), generator=generador)
    question_ids = torch.randint(3, vocabulario, (tamano, largo_q), generator=generador)
    reales_c = torch.randint(2, largo_c + 1, (tamano,), generator=generador)
    reales_q = torch.randint(1, largo_q + 1, (tamano,), generator=generador)
    reales_c[0], reales_q[0] = largo_c, largo_q
    attention_mask = (torch.arange(largo_c) < reales_c[:, None]).long()
    question_mask = (torch.arange(largo_q) < reales_q[:, None]).long()
    input_ids[attention_mask == 0] = pad
    question_ids[question_mask == 0] = pad
    focus_bits = torch.randint(0, 2, (tamano, largo_c), generator=generador) * attention_mask
    answer_bits = torch.randint(0, 2, (tamano, largo_c), generator=generador) * attention_mask
    return TokenBatch(input_ids, attention_mask, focus_bits, answer_bits, question_ids, question_mask)


def test_pasada_completa_igual_a_la_composicion_en_lotes_aleatorios(modelo, tokenizador):
    generador = torch.Generator().manual_seed(0)
    for _ in range(100):
        lote = _lote_aleatorio(generador, len(tokenizador), tokenizador.pad_token_id)
        mascara = lote.attention_mask
        with torch.no_grad():
            salida = modelo(lote, mode="full")
            H_C = modelo.encode(lote.input_ids, mascara)
            H_F = modelo.focus_locate(H_C, mascara)
            p_Q, H_Q = modelo.qg_forward(modelo.fuse(H_C, H_F), mascara, lote.question_ids)
            _, H_CQ = modelo.dual_attention(H_C, H_Q, mascara, lote.question_mask)
            H_A = modelo.answer_infer(H_CQ, mascara)
            compuesta = (
                qg_loss(p_Q, lote.question_ids, lote.question_mask)
                + 0.15 * cf_loss(H_F, lote.focus_bits, mascara)
                + 0.15 * qv_loss(H_A, lote.answer_bits, mascara)
            )
        assert salida.loss_total.item() == pytest.approx(compuesta.item(), abs=1e-9)


def test_fusion_con_logits(config_juguete, tokenizador, batch):
    torch.manual_seed(0)
    modelo = construir_modelo(config_juguete.con(fusion_use_logits=True), tokenizador).eval()
    with torch.no_grad():
        H_C = modelo.encode(batch.input_ids, batch.attention_mask)
        logits = modelo.clasificador_foco.logits(H_C, batch.attention_mask)
        _, H_CF = modelo.memoria_decodificador(H_C, batch.attention_mask, "full")
    torch.testing.assert_close(H_CF, modelo.fuse(H_C, logits))
    torch.testing.assert_close(F.softmax(logits, -1), modelo.focus_locate(H_C, batch.attention_mask))


def test_backbone_bart(tokenizador, batch):
    torch.manual_seed(0)
    config = TrainConfig.toy(backbone_family="bart", backbone_name="toy-bart", dtype="float64")
    modelo = construir_modelo(config, tokenizador).eval()
    with torch.no_grad():
        salida = modelo(batch)
    assert salida.H_C.shape == (*batch.input_ids.shape, 8)
    assert torch.isfinite(salida.loss_total)
