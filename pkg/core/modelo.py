"""
Modelo GenCONE: codificación conjunta, foco de contenido, generación y verificación
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F
from transformers import (
    AutoConfig,
    AutoModelForSeq2SeqLM,
    BartConfig,
    BertConfig,
    BertModel,
    PreTrainedModel,
    PreTrainedTokenizerBase,
    T5Config,
)
from transformers.modeling_outputs import BaseModelOutput

from core.atencion import DualAttention
from core.clasificador import TokenClassifier, construir_clasificador, construir_encoder_bert
from core.config import MODOS, TrainConfig, directorio_cache
from core.errores import ConfigError, ContractError
from core.perdidas import cf_loss, qg_loss, qv_loss, total_loss
from core.tokenizacion import TokenBatch

logger = logging.getLogger(__name__)


@dataclass
class ForwardOutputs:
    """
    Representaciones intermedias de una pasada y las pérdidas por parte.

    Los campos de módulos inactivos (según el modo de ablación) quedan en None
    y sus pérdidas valen 0.
    """
    H_C: torch.Tensor
    H_F: Optional[torch.Tensor]
    H_CF: torch.Tensor
    H_Q: torch.Tensor
    p_Q: torch.Tensor
    S: Optional[torch.Tensor]
    H_CQ: Optional[torch.Tensor]
    H_A: Optional[torch.Tensor]
    L_QG: torch.Tensor
    L_CF: torch.Tensor
    L_QV: torch.Tensor
    loss_total: torch.Tensor

    @property
    def loss_parts(self) -> Dict[str, float]:
        return {
            "L_QG": self.L_QG.item(),
            "L_CF": self.L_CF.item(),
            "L_QV": self.L_QV.item(),
            "loss_total": self.loss_total.item(),
        }


class GenconeModel(nn.Module):
    """
    Red completa sobre un seq2seq preentrenado (T5 o BART).

    Submódulos:
        seq2seq: encoder-decoder que produce H^C, H^Q y p^Q
        clasificador_foco: H^C -> H^F
        fusion: w_CF, [H^C ; H^F] -> H^{C_F}
        atencion_dual: w_S y w_CQ, (H^C, H^Q) -> (S, H^{C_Q})
        clasificador_respuesta: H^{C_Q} -> H^A
    """

    def __init__(
        self,
        seq2seq: PreTrainedModel,
        bert_foco: BertModel,
        bert_respuesta: BertModel,
        config: TrainConfig,
    ):
        super().__init__()
        self.config = config
        self.seq2seq = seq2seq
        self.d = seq2seq.config.d_model
        self.config_clasificador: BertConfig = bert_foco.config

        self.clasificador_foco: TokenClassifier = construir_clasificador(self.d, bert_foco)
        # w_CF ∈ R^{(d+2) x d}; se inicia como [I_d ; 0] para que H^{C_F} = H^C al comenzar
        self.fusion = nn.Linear(self.d + 2, self.d, bias=False)
        with torch.no_grad():
            self.fusion.weight.zero_()
            self.fusion.weight[:, : self.d].copy_(torch.eye(self.d))
        self.atencion_dual = DualAttention(self.d)
        self.clasificador_respuesta: TokenClassifier = construir_clasificador(self.d, bert_respuesta)

    # -- operaciones individuales ------------------------------------------

    def encode(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        """
        H^C = Encoder(E <sep> T), forma [B x |C| x d].
        """
        if input_ids.shape[1] > self.config.max_source_len:
            raise ContractError(
                f"entrada de longitud {input_ids.shape[1]} > {self.config.max_source_len}; truncar antes"
            )
        encoder = self.seq2seq.get_encoder()
        return encoder(input_ids=input_ids, attention_mask=attention_mask, return_dict=True).last_hidden_state

    def focus_locate(self, H_C: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        """
        H^F = softmax(clasificador(H^C)), forma [B x |C| x 2]; índice 0 = foco.
        """
        return self.clasificador_foco(H_C, attention_mask)

    def fuse(self, H_C: torch.Tensor, H_F: torch.Tensor) -> torch.Tensor:
        """
        H^{C_F} = [H^C ; H^F] · w_CF.
        """
        if H_C.shape[:2] != H_F.shape[:2] or H_F.shape[-1] != 2 or H_C.shape[-1] != self.d:
            raise ContractError(
                f"formas incompatibles para la fusión: {tuple(H_C.shape)} y {tuple(H_F.shape)}"
            )
        return self.fusion(torch.cat([H_C, H_F], dim=-1))

    def qg_forward(
        self, H_CF: torch.Tensor, attention_mask: torch.Tensor, question_ids: torch.Tensor
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        """
        Decodificación con teacher forcing sobre la memoria H^{C_F}.

        Returns:
            (p_Q [B x |Q| x V], H_Q [B x |Q| x d]) con H_Q los últimos estados del decoder
        """
        if question_ids.shape[1] > self.config.max_target_len:
            raise ContractError(
                f"pregunta de longitud {question_ids.shape[1]} > {self.config.max_target_len}"
            )
        entrada_decoder = self.seq2seq.prepare_decoder_input_ids_from_labels(labels=question_ids)
        salida = self.seq2seq(
            encoder_outputs=BaseModelOutput(last_hidden_state=H_CF),
            attention_mask=attention_mask,
            decoder_input_ids=entrada_decoder,
            output_hidden_states=True,
            use_cache=False,
            return_dict=True,
        )
        return F.softmax(salida.logits, dim=-1), salida.decoder_hidden_states[-1]

    def dual_attention(
        self,
        H_C: torch.Tensor,
        H_Q: torch.Tensor,
        attention_mask: torch.Tensor,
        question_mask: torch.Tensor,
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        return self.atencion_dual(H_C, H_Q, attention_mask, question_mask)

    def answer_infer(self, H_CQ: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        """
        H^A = softmax(clasificador(H^{C_Q})); índice 0 = token de respuesta.
        """
        return self.clasificador_respuesta(H_CQ, attention_mask)

    # -- pasada completa -----------------------------------------------------

    def memoria_decodificador(
        self, H_C: torch.Tensor, attention_mask: torch.Tensor, modo: str
    ) -> Tuple[Optional[torch.Tensor], torch.Tensor]:
        """
        (H^F, H^{C_F}) según el modo; sin CF la memoria del decoder es H^C.
        """
        if modo not in ("full", "cf_only"):
            return None, H_C
        logits = self.clasificador_foco.logits(H_C, attention_mask)
        H_F = F.softmax(logits, dim=-1)
        return H_F, self.fuse(H_C, logits if self.config.fusion_use_logits else H_F)

    def forward(self, batch: TokenBatch, mode: Optional[str] = None) -> ForwardOutputs:
        """
        Pasada completa con ablaciones: full, cf_only, qv_only o seq2seq.
        """
        modo = mode or self.config.mode
        if modo not in MODOS:
            raise ConfigError(f"modo desconocido: {modo}")
        literal = self.config.loss_literal_positive_only

        H_C = self.encode(batch.input_ids, batch.attention_mask)
        H_F, H_CF = self.memoria_decodificador(H_C, batch.attention_mask, modo)
        p_Q, H_Q = self.qg_forward(H_CF, batch.attention_mask, batch.question_ids)

        cero = H_C.new_zeros(())
        L_QG = qg_loss(p_Q, batch.question_ids, batch.question_mask)
        L_CF = cero if H_F is None else cf_loss(H_F, batch.focus_bits, batch.attention_mask, literal)

        S = H_CQ = H_A = None
        L_QV = cero
        if modo in ("full", "qv_only"):
            S, H_CQ = self.dual_attention(H_C, H_Q, batch.attention_mask, batch.question_mask)
            H_A = self.answer_infer(H_CQ, batch.attention_mask)
            L_QV = qv_loss(H_A, batch.answer_bits, batch.attention_mask, literal)

        return ForwardOutputs(
            H_C=H_C, H_F=H_F, H_CF=H_CF, H_Q=H_Q, p_Q=p_Q, S=S, H_CQ=H_CQ, H_A=H_A,
            L_QG=L_QG, L_CF=L_CF, L_QV=L_QV,
            loss_total=total_loss(L_QG, L_CF, L_QV, self.config.lambda1, self.config.lambda2),
        )

    @torch.no_grad()
    def generar_ids(
        self,
        input_ids: torch.Tensor,
        attention_mask: torch.Tensor,
        num_beams: int,
        max_len: int,
    ) -> torch.Tensor:
        """
        Decodificación voraz (num_beams=1) o por haz; la rama QV no se ejecuta.
        """
        H_C = self.encode(input_ids, attention_mask)
        _, H_CF = self.memoria_decodificador(H_C, attention_mask, self.config.mode)
        return self.seq2seq.generate(
            encoder_outputs=BaseModelOutput(last_hidden_state=H_CF),
            attention_mask=attention_mask,
            num_beams=num_beams,
            do_sample=False,
            max_new_tokens=max_len,
            early_stopping=num_beams > 1,
        )

    def configuraciones(self) -> Dict[str, Dict[str, Any]]:
        """
        Configuraciones serializables para reconstruir el modelo sin descargas.
        """
        return {
            "seq2seq": self.seq2seq.config.to_dict(),
            "clasificador": self.config_clasificador.to_dict(),
        }


def configuracion_seq2seq_juguete(config: TrainConfig, tokenizador: PreTrainedTokenizerBase):
    d, capas, cabezas = config.hidden_size, config.toy_layers, config.toy_heads
    vocabulario = config.vocab_size or len(tokenizador)
    pad, eos = tokenizador.pad_token_id, tokenizador.eos_token_id
    if config.backbone_family == "t5":
        return T5Config(
            vocab_size=vocabulario,
            d_model=d,
            d_kv=d // cabezas,
            d_ff=2 * d,
            num_layers=capas,
            num_decoder_layers=capas,
            num_heads=cabezas,
            dropout_rate=config.dropout,
            feed_forward_proj="gated-gelu",
            pad_token_id=pad,
            eos_token_id=eos,
            decoder_start_token_id=pad,
        )
    return BartConfig(
        vocab_size=vocabulario,
        d_model=d,
        encoder_layers=capas,
        decoder_layers=capas,
        encoder_attention_heads=cabezas,
        decoder_attention_heads=cabezas,
        encoder_ffn_dim=2 * d,
        decoder_ffn_dim=2 * d,
        dropout=config.dropout,
        attention_dropout=config.dropout,
        activation_dropout=config.dropout,
        max_position_embeddings=config.max_source_len + 2,
        pad_token_id=pad,
        bos_token_id=eos,
        eos_token_id=eos,
        decoder_start_token_id=eos,
        forced_eos_token_id=None,
    )


def _ajustar_precision(modelo: GenconeModel, config: TrainConfig) -> GenconeModel:
    if config.dtype == "float64":
        modelo = modelo.to(torch.float64)
    return modelo


def construir_modelo(config: TrainConfig, tokenizador: PreTrainedTokenizerBase) -> GenconeModel:
    """
    Construye GenCONE con pesos preentrenados o, si `pretrained` es False, de juguete.

    Args:
        config: Configuración de entrenamiento
        tokenizador: Tokenizador ya construido (define vocabulario y tokens especiales)

    Returns:
        Modelo listo para entrenar
    """
    if config.pretrained:
        seq2seq = AutoModelForSeq2SeqLM.from_pretrained(config.backbone_name, cache_dir=directorio_cache())
        logger.info("backbone %s cargado (d=%d)", config.backbone_name, seq2seq.config.d_model)
    else:
        seq2seq = AutoModelForSeq2SeqLM.from_config(configuracion_seq2seq_juguete(config, tokenizador))
    modelo = GenconeModel(seq2seq, construir_encoder_bert(config), construir_encoder_bert(config), config)
    return _ajustar_precision(modelo, config)


def reconstruir_modelo(config: TrainConfig, configuraciones: Dict[str, Dict[str, Any]]) -> GenconeModel:
    """
    Reconstruye la arquitectura desde las configuraciones guardadas en un checkpoint.
    """
    datos = dict(configuraciones["seq2seq"])
    tipo = datos.pop("model_type")
    seq2seq = AutoModelForSeq2SeqLM.from_config(AutoConfig.for_model(tipo, **datos))
    bert_config = BertConfig.from_dict(configuraciones["clasificador"])
    modelo = GenconeModel(
        seq2seq,
        BertModel(bert_config, add_pooling_layer=False),
        BertModel(bert_config, add_pooling_layer=False),
        config,
    )
    return _ajustar_precision(modelo, config)
