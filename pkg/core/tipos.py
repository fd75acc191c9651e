"""
Tipos de dominio del pipeline de datos ECQG
"""
from dataclasses import dataclass, field, asdict
from typing import Dict, List, NamedTuple, Tuple


# (texto, inicio en caracteres)
Respuesta = Tuple[str, int]


@dataclass(frozen=True)
class RawQA:
    """
    Registro SQuAD sin procesar.

    Args:
        id: Identificador único en el corpus
        title: Título del artículo de Wikipedia
        context: Párrafo
        question: Pregunta
        answers: Lista de (texto, char_start)
        is_impossible: True si la pregunta no tiene respuesta
        origin: Partición SQuAD de procedencia ("train" o "dev")
    """
    id: str
    title: str
    context: str
    question: str
    answers: Tuple[Respuesta, ...]
    is_impossible: bool
    origin: str = "train"


@dataclass(frozen=True)
class ECQGSample:
    """
    Unidad atómica del dataset: (contexto, entidad, pregunta, span de respuesta).
    """
    id: str
    context: str
    entity: str
    question: str
    answer_text: str
    answer_start: int

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)

    @classmethod
    def from_dict(cls, datos: Dict[str, object]) -> "ECQGSample":
        return cls(
            id=str(datos["id"]),
            context=str(datos["context"]),
            entity=str(datos["entity"]),
            question=str(datos["question"]),
            answer_text=str(datos["answer_text"]),
            answer_start=int(datos["answer_start"]),
        )


@dataclass(frozen=True)
class DatasetStats:
    split: str
    size: int
    entity_len_mean: float
    entity_len_min: int
    entity_len_max: int
    context_len_mean: float
    context_len_min: int
    context_len_max: int

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


class EntitySpan(NamedTuple):
    """
    Entidad reconocida: texto, inicio, fin (exclusivo) y etiqueta.
    """
    text: str
    start: int
    end: int
    label: str


@dataclass
class ConteoFiltros:
    """
    Cuántas muestras descarta cada etapa del constructor.
    """
    total: int = 0
    imposibles: int = 0
    sin_entidad: int = 0
    respuesta_igual_entidad: int = 0
    conservadas: int = 0

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


@dataclass
class ECQGDataset:
    """
    Las tres particiones del dataset construido.
    """
    train: List[ECQGSample] = field(default_factory=list)
    validation: List[ECQGSample] = field(default_factory=list)
    test: List[ECQGSample] = field(default_factory=list)
    filtros: ConteoFiltros = field(default_factory=ConteoFiltros)

    def particiones(self) -> Dict[str, List[ECQGSample]]:
        return {"train": self.train, "validation": self.validation, "test": self.test}
