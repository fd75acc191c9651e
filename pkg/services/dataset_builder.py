"""
Construcción del dataset ECQG a partir de corpus en formato SQuAD v2.0
"""
import hashlib
import json
import logging
import random
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from tqdm.contrib.concurrent import thread_map

from core.entidades import NERProvider, assign_central_entity
from core.errores import IntegrityError, PreconditionError, SquadParseError
from core.estadisticas import compute_stats
from core.tipos import ConteoFiltros, ECQGDataset, ECQGSample, RawQA
from core.votacion import normalizar_texto, vote_answer

logger = logging.getLogger(__name__)

FRACCION_VALIDACION = 0.074
PARTICIONES = ("train", "validation", "test")


def _exigir(nodo: Any, tipo: type, ruta: str) -> Any:
    if not isinstance(nodo, tipo):
        raise SquadParseError(ruta, f"se esperaba {tipo.__name__}, llegó {type(nodo).__name__}")
    return nodo


def _campo(nodo: Dict[str, Any], clave: str, tipo: type, ruta: str) -> Any:
    if clave not in nodo:
        raise SquadParseError(f"{ruta}.{clave}", "campo ausente")
    return _exigir(nodo[clave], tipo, f"{ruta}.{clave}")


def parse_squad(document: Dict[str, Any], origin: str = "train") -> List[RawQA]:
    """
    Convierte un documento SQuAD v2.0 (data -> paragraphs -> qas) en registros RawQA.

    Args:
        document: JSON ya decodificado
        origin: Partición de procedencia ("train" o "dev")

    Returns:
        Un RawQA por entrada de qas

    Raises:
        SquadParseError: Esquema inválido (el mensaje nombra la ruta JSON)
        IntegrityError: Span de respuesta que no coincide con el contexto
    """
    _exigir(document, dict, "$")
    registros: List[RawQA] = []
    vistos = set()

    for i, articulo in enumerate(_campo(document, "data", list, "$")):
        ruta_articulo = f"data[{i}]"
        _exigir(articulo, dict, ruta_articulo)
        titulo = str(articulo.get("title", ""))
        for j, parrafo in enumerate(_campo(articulo, "paragraphs", list, ruta_articulo)):
            ruta_parrafo = f"{ruta_articulo}.paragraphs[{j}]"
            _exigir(parrafo, dict, ruta_parrafo)
            contexto = _campo(parrafo, "context", str, ruta_parrafo)
            for k, qa in enumerate(_campo(parrafo, "qas", list, ruta_parrafo)):
                ruta_qa = f"{ruta_parrafo}.qas[{k}]"
                _exigir(qa, dict, ruta_qa)
                id_qa = _campo(qa, "id", str, ruta_qa)
                pregunta = _campo(qa, "question", str, ruta_qa)
                imposible = bool(qa.get("is_impossible", False))

                respuestas = []
                for n, respuesta in enumerate(_campo(qa, "answers", list, ruta_qa)):
                    ruta_resp = f"{ruta_qa}.answers[{n}]"
                    _exigir(respuesta, dict, ruta_resp)
                    texto = _campo(respuesta, "text", str, ruta_resp)
                    inicio = _campo(respuesta, "answer_start", int, ruta_resp)
                    if inicio < 0 or contexto[inicio:inicio + len(texto)] != texto:
                        raise IntegrityError(
                            id_qa, f"answer_start={inicio} no apunta a '{texto}' en el contexto"
                        )
                    respuestas.append((texto, inicio))

                if imposible == bool(respuestas):
                    raise SquadParseError(
                        f"{ruta_qa}.answers",
                        "las respuestas deben estar vacías si y solo si is_impossible",
                    )
                if id_qa in vistos:
                    raise IntegrityError(id_qa, "id duplicado en el corpus")
                vistos.add(id_qa)

                registros.append(RawQA(
                    id=id_qa,
                    title=titulo,
                    context=contexto,
                    question=pregunta,
                    answers=tuple(respuestas),
                    is_impossible=imposible,
                    origin=origin,
                ))
    return registros


def leer_squad(ruta: Union[str, Path], origin: str = "train") -> List[RawQA]:
    with open(ruta, "r", encoding="utf-8") as archivo:
        try:
            documento = json.load(archivo)
        except json.JSONDecodeError as error:
            raise SquadParseError("$", f"JSON inválido: {error}") from error
    return parse_squad(documento, origin=origin)


def procesar_registro(registro: RawQA, ner: NERProvider) -> Tuple[str, Optional[ECQGSample]]:
    """
    Reglas por muestra: votación, entidad central y respuesta distinta de la entidad.

    Returns:
        (motivo, muestra) con motivo en {"imposible", "sin_entidad",
        "respuesta_igual_entidad", "conservada"}
    """
    if registro.is_impossible or not registro.answers:
        return "imposible", None

    texto, inicio = vote_answer(registro.answers)
    entidad = assign_central_entity(registro.title, registro.context, registro.question, ner)
    if entidad is None:
        return "sin_entidad", None
    if normalizar_texto(texto) == normalizar_texto(entidad):
        return "respuesta_igual_entidad", None

    return "conservada", ECQGSample(
        id=registro.id,
        context=registro.context,
        entity=entidad,
        question=registro.question,
        answer_text=texto,
        answer_start=inicio,
    )


def build_dataset(
    corpus: Sequence[RawQA],
    ner: NERProvider,
    train_fraction: float = 1.0 - FRACCION_VALIDACION,
    seed: int = 42,
    hilos: int = 1,
) -> ECQGDataset:
    """
    Filtra, asigna entidades y particiona el corpus.

    El split dev de SQuAD pasa a ser test; el split train se reparte en
    train/validation con una mezcla determinista por semilla.

    Args:
        corpus: Registros RawQA (ambos orígenes)
        ner: Proveedor de entidades
        train_fraction: Fracción de train tras filtrar (0 < f < 1)
        seed: Semilla de la mezcla
        hilos: Trabajadores para el procesamiento por muestra

    Returns:
        ECQGDataset con las tres particiones y los conteos de filtrado
    """
    if not 0.0 < train_fraction < 1.0:
        raise PreconditionError(f"train_fraction={train_fraction} debe estar en (0, 1)")

    registros = sorted(corpus, key=lambda r: r.id)
    resultados = thread_map(
        lambda registro: procesar_registro(registro, ner),
        registros,
        max_workers=max(1, hilos),
        desc="Construyendo ECQG",
        disable=len(registros) < 1000,
    )

    conteo = ConteoFiltros(total=len(registros))
    de_train: List[ECQGSample] = []
    de_test: List[ECQGSample] = []
    for registro, (motivo, muestra) in zip(registros, resultados):
        if motivo == "imposible":
            conteo.imposibles += 1
        elif motivo == "sin_entidad":
            conteo.sin_entidad += 1
        elif motivo == "respuesta_igual_entidad":
            conteo.respuesta_igual_entidad += 1
        else:
            conteo.conservadas += 1
            (de_test if registro.origin == "dev" else de_train).append(muestra)

    logger.info(
        "filtrado: %d total, %d imposibles, %d sin entidad, %d respuesta=entidad, %d conservadas",
        conteo.total, conteo.imposibles, conteo.sin_entidad,
        conteo.respuesta_igual_entidad, conteo.conservadas,
    )
    if conteo.conservadas == 0:
        logger.warning("ninguna muestra sobrevivió al filtrado: dataset vacío")

    mezcla = list(de_train)
    random.Random(seed).shuffle(mezcla)
    corte = round(len(mezcla) * train_fraction)
    return ECQGDataset(
        train=mezcla[:corte],
        validation=mezcla[corte:],
        test=de_test,
        filtros=conteo,
    )


def escribir_jsonl(ruta: Union[str, Path], filas: Iterable[Dict[str, Any]]) -> None:
    with open(ruta, "w", encoding="utf-8", newline="\n") as archivo:
        for fila in filas:
            archivo.write(json.dumps(fila, ensure_ascii=False) + "\n")


def leer_jsonl(ruta: Union[str, Path]) -> List[Dict[str, Any]]:
    with open(ruta, "r", encoding="utf-8") as archivo:
        return [json.loads(linea) for linea in archivo if linea.strip()]


def digest_archivo(ruta: Union[str, Path]) -> str:
    sha = hashlib.sha256()
    with open(ruta, "rb") as archivo:
        for bloque in iter(lambda: archivo.read(1 << 20), b""):
            sha.update(bloque)
    return sha.hexdigest()


def guardar_dataset(
    dataset: ECQGDataset,
    salida: Union[str, Path],
    meta: Dict[str, Any],
) -> Dict[str, Any]:
    """
    Escribe train/validation/test.jsonl, stats.json y meta.json.

    Args:
        dataset: Dataset construido
        salida: Directorio de salida
        meta: Semilla, fracciones, proveedor NER e invocación

    Returns:
        Contenido escrito en stats.json
    """
    directorio = Path(salida)
    directorio.mkdir(parents=True, exist_ok=True)
    estadisticas: Dict[str, Any] = {}
    for nombre, muestras in dataset.particiones().items():
        escribir_jsonl(directorio / f"{nombre}.jsonl", (m.to_dict() for m in muestras))
        estadisticas[nombre] = compute_stats(muestras, split=nombre).to_dict()
    estadisticas["filtros"] = dataset.filtros.to_dict()

    (directorio / "stats.json").write_text(json.dumps(estadisticas, indent=2), encoding="utf-8")
    (directorio / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8")
    logger.info(
        "dataset escrito en %s: %s", directorio,
        {nombre: len(m) for nombre, m in dataset.particiones().items()},
    )
    return estadisticas


def cargar_particion(directorio: Union[str, Path], nombre: str) -> List[ECQGSample]:
    ruta = Path(directorio) / f"{nombre}.jsonl"
    if not ruta.exists():
        return []
    return [ECQGSample.from_dict(fila) for fila in leer_jsonl(ruta)]


def cargar_dataset(directorio: Union[str, Path]) -> ECQGDataset:
    return ECQGDataset(**{nombre: cargar_particion(directorio, nombre) for nombre in PARTICIONES})
