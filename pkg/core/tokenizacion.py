"""
Tokenización, codificación de muestras y batches de tensores (TokenBatch)
"""
import logging
from collections import Counter
from dataclasses import dataclass, fields
from typing import Dict, Iterable, List, Optional, Sequence

import torch
from tokenizers import Tokenizer, models, pre_tokenizers, processors
from torch.utils.data import Dataset
from transformers import AutoTokenizer, PreTrainedTokenizerBase, PreTrainedTokenizerFast

from core.alineacion import align_span
from core.config import TrainConfig, directorio_cache
from core.errores import AlignmentError, ContractError
from core.tipos import ECQGSample

logger = logging.getLogger(__name__)

PAD, EOS, UNK = "<pad>", "</s>", "<unk>"


def construir_tokenizador_palabras(textos: Iterable[str]) -> PreTrainedTokenizerFast:
    """
    Tokenizador a nivel de palabra construido sobre un corpus (modelos de juguete).

    Reproduce las convenciones de T5: <pad>=0, </s>=1 como separador y fin,
    y la plantilla "E </s> T </s>" para pares.

    Args:
        textos: Textos de los que se extrae el vocabulario

    Returns:
        Tokenizador rápido con offsets y sequence_ids
    """
    pre = pre_tokenizers.Whitespace()
    frecuencias: Counter = Counter()
    for texto in textos:
        frecuencias.update(palabra for palabra, _ in pre.pre_tokenize_str(texto))

    vocabulario = {PAD: 0, EOS: 1, UNK: 2}
    for palabra, _ in sorted(frecuencias.items(), key=lambda par: (-par[1], par[0])):
        vocabulario.setdefault(palabra, len(vocabulario))

    nucleo = Tokenizer(models.WordLevel(vocab=vocabulario, unk_token=UNK))
    nucleo.pre_tokenizer = pre
    nucleo.post_processor = processors.TemplateProcessing(
        single=f"$A {EOS}",
        pair=f"$A:0 {EOS}:0 $B:1 {EOS}:1",
        special_tokens=[(EOS, vocabulario[EOS])],
    )
    return PreTrainedTokenizerFast(
        tokenizer_object=nucleo,
        pad_token=PAD,
        eos_token=EOS,
        unk_token=UNK,
        sep_token=EOS,
        clean_up_tokenization_spaces=True,
    )


def cargar_tokenizador(config: TrainConfig, textos: Optional[Iterable[str]] = None) -> PreTrainedTokenizerBase:
    """
    Tokenizador del backbone preentrenado, o de palabras para modelos de juguete.
    """
    if config.pretrained:
        tokenizador = AutoTokenizer.from_pretrained(
            config.backbone_name, cache_dir=directorio_cache(), use_fast=True
        )
        if not tokenizador.is_fast:
            raise ContractError("se requiere un tokenizador rápido (offsets)")
        return tokenizador
    if textos is None:
        raise ContractError("un modelo de juguete necesita textos para su vocabulario")
    return construir_tokenizador_palabras(textos)


def token_separador(tokenizador: PreTrainedTokenizerBase) -> str:
    # T5 no define sep_token: su </s> hace de separador
    return tokenizador.sep_token or tokenizador.eos_token


def textos_de(samples: Sequence[ECQGSample]) -> List[str]:
    return [t for m in samples for t in (m.entity, m.context, m.question)]


@dataclass
class TokenBatch:
    """
    Batch tokenizado y con padding. El orden de campos es el de serialización.

    input_ids: [B x |C|] con C = E <sep> T
    focus_bits / answer_bits: bits por token (0 en posiciones enmascaradas)
    question_ids / question_mask: [B x |Q|]
    """
    input_ids: torch.Tensor
    attention_mask: torch.Tensor
    focus_bits: torch.Tensor
    answer_bits: torch.Tensor
    question_ids: torch.Tensor
    question_mask: torch.Tensor

    @property
    def tamano(self) -> int:
        return int(self.input_ids.shape[0])

    def to(self, dispositivo) -> "TokenBatch":
        return TokenBatch(**{f.name: getattr(self, f.name).to(dispositivo) for f in fields(self)})

    def muestra(self, indice: int) -> "TokenBatch":
        return TokenBatch(**{
            f.name: getattr(self, f.name)[indice:indice + 1] for f in fields(self)
        })

    def save(self, ruta) -> None:
        torch.save({f.name: getattr(self, f.name).cpu() for f in fields(self)}, ruta)

    @classmethod
    def load(cls, ruta) -> "TokenBatch":
        datos = torch.load(ruta)
        return cls(**{f.name: datos[f.name] for f in fields(cls)})


def codificar_muestra(
    sample: ECQGSample,
    tokenizador: PreTrainedTokenizerBase,
    max_source_len: int,
    max_target_len: int,
) -> Dict[str, List[int]]:
    """
    Tokeniza (entidad, contexto) y la pregunta, y alinea los bits de respuesta.

    Args:
        sample: Muestra del dataset
        tokenizador: Tokenizador rápido
        max_source_len: Longitud máxima de C
        max_target_len: Longitud máxima de Q

    Returns:
        Diccionario de listas de enteros

    Raises:
        AlignmentError: Si la respuesta quedó fuera tras truncar
    """
    entrada = tokenizador(
        sample.entity,
        sample.context,
        truncation="only_second",
        max_length=max_source_len,
        return_offsets_mapping=True,
    )
    bits = align_span(
        sample.context,
        sample.answer_text,
        sample.answer_start,
        entrada["offset_mapping"],
        entrada.sequence_ids(),
    ).tolist()
    pregunta = tokenizador(sample.question, truncation=True, max_length=max_target_len)
    return {
        "input_ids": list(entrada["input_ids"]),
        # El foco de entrenamiento es la propia respuesta
        "focus_bits": bits,
        "answer_bits": list(bits),
        "question_ids": list(pregunta["input_ids"]),
    }


def codificar_entrada(
    entity: str, context: str, tokenizador: PreTrainedTokenizerBase, max_source_len: int
) -> Dict[str, torch.Tensor]:
    """
    Codificación de inferencia: solo C = E <sep> T.
    """
    entrada = tokenizador(
        entity, context, truncation="only_second", max_length=max_source_len, return_tensors="pt"
    )
    return {"input_ids": entrada["input_ids"], "attention_mask": entrada["attention_mask"]}


def _rellenar(secuencias: Sequence[Sequence[int]], valor: int) -> torch.Tensor:
    largo = max(len(s) for s in secuencias)
    return torch.tensor([list(s) + [valor] * (largo - len(s)) for s in secuencias], dtype=torch.long)


def collate(ejemplos: Sequence[Dict[str, List[int]]], pad_id: int) -> TokenBatch:
    """
    Agrupa ejemplos codificados en un TokenBatch con padding a la derecha.
    """
    input_ids = _rellenar([e["input_ids"] for e in ejemplos], pad_id)
    question_ids = _rellenar([e["question_ids"] for e in ejemplos], pad_id)
    return TokenBatch(
        input_ids=input_ids,
        attention_mask=_rellenar([[1] * len(e["input_ids"]) for e in ejemplos], 0),
        focus_bits=_rellenar([e["focus_bits"] for e in ejemplos], 0),
        answer_bits=_rellenar([e["answer_bits"] for e in ejemplos], 0),
        question_ids=question_ids,
        question_mask=_rellenar([[1] * len(e["question_ids"]) for e in ejemplos], 0),
    )


class ECQGTorchDataset(Dataset):
    """
    Dataset de PyTorch sobre muestras ECQG ya codificadas.

    Las muestras cuya respuesta no se puede alinear se descartan con un aviso.
    """

    def __init__(self, samples: Sequence[ECQGSample], tokenizador: PreTrainedTokenizerBase, config: TrainConfig):
        self.ids: List[str] = []
        self.ejemplos: List[Dict[str, List[int]]] = []
        descartadas = 0
        for sample in samples:
            try:
                ejemplo = codificar_muestra(
                    sample, tokenizador, config.max_source_len, config.max_target_len
                )
            except AlignmentError as error:
                descartadas += 1
                logger.debug("muestra %s descartada: %s", sample.id, error)
                continue
            self.ids.append(sample.id)
            self.ejemplos.append(ejemplo)
        if descartadas:
            logger.warning("%d muestras descartadas por alineación", descartadas)

    def __len__(self) -> int:
        return len(self.ejemplos)

    def __getitem__(self, indice: int) -> Dict[str, List[int]]:
        return self.ejemplos[indice]
