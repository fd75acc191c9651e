"""
Clasificador de tokens sobre representaciones continuas (foco y respuesta)
"""
import torch
import torch.nn as nn
import torch.nn.functional as F
from transformers import BertConfig, BertModel

from core.config import TrainConfig, directorio_cache


class TokenClassifier(nn.Module):
    """
    Pila de capas codificadoras tipo BERT que consume vectores en lugar de ids,
    seguida de una cabeza lineal de 2 clases (índice 0 = clase positiva).

    La capa de embeddings de BERT se omite: las entradas se proyectan directamente
    a la capa 0.
    """

    def __init__(self, d_entrada: int, encoder: nn.Module, hidden_size: int):
        """
        Args:
            d_entrada: Dimensión de las representaciones de entrada
            encoder: BertEncoder (preentrenado o nuevo)
            hidden_size: Dimensión oculta del encoder
        """
        super().__init__()
        self.proyeccion = (
            nn.Identity() if d_entrada == hidden_size else nn.Linear(d_entrada, hidden_size)
        )
        self.encoder = encoder
        self.cabeza = nn.Linear(hidden_size, 2)

    def logits(self, H: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        oculto = self.proyeccion(H)
        if len(self.encoder.layer):
            # máscara aditiva extendida [B x 1 x 1 x L]
            extendida = (1.0 - mask[:, None, None, :].to(oculto.dtype)) * torch.finfo(oculto.dtype).min
            oculto = self.encoder(oculto, attention_mask=extendida)[0]
        return self.cabeza(oculto)

    def forward(self, H: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        return F.softmax(self.logits(H, mask), dim=-1)


def configuracion_bert_juguete(config: TrainConfig) -> BertConfig:
    return BertConfig(
        vocab_size=2,
        hidden_size=config.hidden_size,
        num_hidden_layers=config.toy_layers,
        num_attention_heads=config.toy_heads,
        intermediate_size=2 * config.hidden_size,
        hidden_act="gelu",
        hidden_dropout_prob=config.dropout,
        attention_probs_dropout_prob=config.dropout,
        attn_implementation="eager",
    )


def construir_encoder_bert(config: TrainConfig) -> BertModel:
    """
    BERT del que se toma el encoder: preentrenado, reinicializado o de juguete.

    Returns:
        BertModel sin capa de pooling; solo se usa `.encoder`
    """
    if not config.pretrained:
        return BertModel(configuracion_bert_juguete(config), add_pooling_layer=False)

    if config.classifier_fresh_init:
        bert_config = BertConfig.from_pretrained(config.classifier_name, cache_dir=directorio_cache())
        modelo = BertModel(bert_config, add_pooling_layer=False)
    else:
        modelo = BertModel.from_pretrained(
            config.classifier_name, cache_dir=directorio_cache(), add_pooling_layer=False
        )
    if config.classifier_layers >= 0:
        modelo.encoder.layer = modelo.encoder.layer[: config.classifier_layers]
        modelo.config.num_hidden_layers = config.classifier_layers
    return modelo


def construir_clasificador(d: int, bert: BertModel) -> TokenClassifier:
    return TokenClassifier(d, bert.encoder, bert.config.hidden_size)
