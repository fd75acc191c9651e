"""
Proveedores de NER intercambiables y reglas de entidad central
"""
import logging
import re
from abc import ABC, abstractmethod
from typing import Dict, List, Optional

from core.errores import ConfigError
from core.tipos import EntitySpan
from core.votacion import normalizar_texto

logger = logging.getLogger(__name__)

_PALABRA = re.compile(r"\w+", re.UNICODE)


class NERProvider(ABC):
    """
    Capacidad abstracta: texto -> lista de entidades con offsets.

    Las implementaciones deben ser deterministas para una entrada fija.
    """

    nombre: str = "abstracto"

    @property
    def version(self) -> str:
        return "0"

    @abstractmethod
    def extract(self, text: str) -> List[EntitySpan]:
        raise NotImplementedError


class DictionaryNER(NERProvider):
    """
    NER determinista basado en diccionario (para pruebas y fixtures).

    Busca coincidencias de palabra completa, sensibles a mayúsculas, dando
    prioridad a las entradas más largas y sin solapamientos.
    """

    nombre = "stub"

    def __init__(self, entidades: Dict[str, str]):
        """
        Args:
            entidades: Mapa texto de entidad -> etiqueta (p. ej. "Beyonce" -> "PERSON")
        """
        self.entidades = dict(entidades)
        ordenadas = sorted(self.entidades, key=lambda e: (-len(e), e))
        self._patrones = [
            (entidad, re.compile(rf"(?<!\w){re.escape(entidad)}(?!\w)"))
            for entidad in ordenadas
        ]

    @property
    def version(self) -> str:
        return f"dict-{len(self.entidades)}"

    def extract(self, text: str) -> List[EntitySpan]:
        ocupados = [False] * len(text)
        encontradas: List[EntitySpan] = []
        for entidad, patron in self._patrones:
            for coincidencia in patron.finditer(text):
                inicio, fin = coincidencia.span()
                if any(ocupados[inicio:fin]):
                    continue
                for i in range(inicio, fin):
                    ocupados[i] = True
                encontradas.append(EntitySpan(entidad, inicio, fin, self.entidades[entidad]))
        return sorted(encontradas, key=lambda e: (e.start, e.end))


class SpacyNER(NERProvider):
    """
    Adaptador del reconocedor de entidades de spaCy.
    """

    nombre = "spacy"

    def __init__(self, modelo: str = "en_core_web_sm"):
        import spacy

        self.modelo = modelo
        try:
            self._nlp = spacy.load(modelo, disable=["lemmatizer"])
        except OSError as error:
            raise ConfigError(f"modelo de spaCy no disponible: {modelo}") from error
        self._version = f"spacy-{spacy.__version__}/{modelo}-{self._nlp.meta.get('version', '?')}"
        logger.info("NER externo cargado: %s", self._version)

    @property
    def version(self) -> str:
        return self._version

    def extract(self, text: str) -> List[EntitySpan]:
        documento = self._nlp(text)
        return [
            EntitySpan(ent.text, ent.start_char, ent.end_char, ent.label_)
            for ent in documento.ents
        ]


def crear_proveedor_ner(tipo: str, entidades: Optional[Dict[str, str]] = None) -> NERProvider:
    """
    Construye el proveedor pedido desde la CLI.

    Args:
        tipo: "stub" o "external"
        entidades: Diccionario para el stub

    Returns:
        Instancia de NERProvider
    """
    if tipo == "stub":
        return DictionaryNER(entidades or {})
    if tipo == "external":
        return SpacyNER()
    raise ConfigError(f"proveedor NER desconocido: {tipo}")


def _palabras(texto: str) -> List[str]:
    return [p.lower() for p in _PALABRA.findall(texto)]


def contiene_secuencia(texto: str, entidad: str) -> bool:
    """
    Coincidencia de secuencia de palabras completa, sin distinguir mayúsculas.

    Args:
        texto: Texto donde buscar
        entidad: Entidad a buscar

    Returns:
        True si las palabras de la entidad aparecen contiguas en el texto
    """
    aguja = _palabras(entidad)
    pajar = _palabras(texto)
    if not aguja or len(aguja) > len(pajar):
        return False
    n = len(aguja)
    return any(pajar[i:i + n] == aguja for i in range(len(pajar) - n + 1))


def titulo_a_entidad(title: str) -> str:
    # Los títulos de SQuAD usan guiones bajos ("New_York_City")
    return " ".join(title.replace("_", " ").split())


def assign_central_entity(
    title: str, context: str, question: str, ner: NERProvider
) -> Optional[str]:
    """
    Asigna la entidad central de una muestra.

    Regla 1: el título (como entidad) aparece en la pregunta y en el contexto.
    Regla 2: el contexto y la pregunta comparten exactamente una entidad
    normalizada; se devuelve su forma superficial en el contexto.

    Args:
        title: Título del artículo
        context: Párrafo
        question: Pregunta
        ner: Proveedor de entidades

    Returns:
        La entidad central o None si la muestra debe filtrarse
    """
    entidad_titulo = titulo_a_entidad(title)
    if (
        entidad_titulo
        and contiene_secuencia(question, entidad_titulo)
        and contiene_secuencia(context, entidad_titulo)
    ):
        return entidad_titulo

    superficies: Dict[str, str] = {}
    for span in ner.extract(context):
        clave = normalizar_texto(span.text)
        if clave:
            superficies.setdefault(clave, span.text)
    en_pregunta = {normalizar_texto(span.text) for span in ner.extract(question)}
    compartidas = set(superficies) & en_pregunta

    if len(compartidas) != 1:
        return None
    return superficies[compartidas.pop()]
