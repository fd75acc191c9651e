"""
Entrenamiento conjunto de los tres módulos con parada temprana
"""
import copy
import json
import logging
import math
import tempfile
from dataclasses import asdict, dataclass, field
from functools import partial
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import torch
from torch.utils.data import DataLoader
from tqdm import tqdm
from transformers import PreTrainedTokenizerBase, get_constant_schedule_with_warmup, set_seed

from core.config import GRILLA_LR, TrainConfig
from core.errores import DivergenceError, ECQGError, PreconditionError
from core.metricas import compute_bleu, compute_rouge_l
from core.modelo import GenconeModel, construir_modelo
from core.tipos import ECQGDataset
from core.tokenizacion import ECQGTorchDataset, TokenBatch, cargar_tokenizador, collate, textos_de
from services.checkpoint import guardar_checkpoint
from services.evaluator import EvalReport, evaluar_pares, promediar_reportes
from services.generator import generate_batch

logger = logging.getLogger(__name__)

PARTES = ("L_QG", "L_CF", "L_QV", "loss_total")


def fijar_semilla(semilla: int, hilos: int = 0) -> None:
    """
    Fija random, numpy y torch para que barajado, dropout e inicialización se repitan.
    """
    set_seed(semilla)
    if hilos > 0:
        torch.set_num_threads(hilos)


def elegir_dispositivo(config: TrainConfig) -> torch.device:
    if config.device != "auto":
        return torch.device(config.device)
    return torch.device("cuda" if torch.cuda.is_available() else "cpu")


class EarlyStopping:
    """
    Parada temprana sobre un criterio a minimizar.
    """

    def __init__(self, patience: int):
        self.patience = patience
        self.mejor_valor = math.inf
        self.mejor_epoca = 0
        self.sin_mejora = 0

    def actualizar(self, epoca: int, valor: float) -> bool:
        """
        Registra el valor de una época.

        Returns:
            True si la época mejora el mejor valor visto
        """
        if valor < self.mejor_valor:
            self.mejor_valor = valor
            self.mejor_epoca = epoca
            self.sin_mejora = 0
            return True
        self.sin_mejora += 1
        return False

    @property
    def debe_parar(self) -> bool:
        return self.sin_mejora >= self.patience


@dataclass
class EpochRecord:
    epoch: int
    train: Dict[str, float]
    validation: Dict[str, float]
    metrics: Dict[str, float] = field(default_factory=dict)


@dataclass
class TrainHistory:
    epochs: List[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    stop_reason: str = ""
    steps: int = 0
    step_losses: List[float] = field(default_factory=list)
    seed: int = 0

    def criterio(self, epoca: int) -> float:
        return self.epochs[epoca - 1].validation["loss_total"]

    @property
    def mejor_criterio(self) -> float:
        return self.criterio(self.best_epoch) if self.best_epoch else math.inf

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def guardar(self, ruta: Union[str, Path]) -> None:
        Path(ruta).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")

    @classmethod
    def cargar(cls, ruta: Union[str, Path]) -> "TrainHistory":
        datos = json.loads(Path(ruta).read_text(encoding="utf-8"))
        datos["epochs"] = [EpochRecord(**e) for e in datos["epochs"]]
        return cls(**datos)


@dataclass
class Entrenamiento:
    """
    Resultado de `train`: modelo con los mejores pesos, tokenizador e historial.
    """
    modelo: GenconeModel
    tokenizador: PreTrainedTokenizerBase
    history: TrainHistory
    checkpoint: Optional[Path] = None


class _Acumulador:
    def __init__(self):
        self.sumas = dict.fromkeys(PARTES, 0.0)
        self.peso = 0

    def agregar(self, partes: Dict[str, float], tamano: int) -> None:
        for clave in PARTES:
            self.sumas[clave] += partes[clave] * tamano
        self.peso += tamano

    def medias(self) -> Dict[str, float]:
        return {clave: valor / max(1, self.peso) for clave, valor in self.sumas.items()}


def _cargador(dataset: ECQGTorchDataset, config: TrainConfig, pad_id: int,
              barajar: bool, semilla: int) -> DataLoader:
    return DataLoader(
        dataset,
        batch_size=config.batch_size,
        shuffle=barajar,
        generator=torch.Generator().manual_seed(semilla),
        collate_fn=partial(collate, pad_id=pad_id),
        num_workers=config.threads,
    )


@torch.no_grad()
def evaluar_perdidas(modelo: GenconeModel, cargador: DataLoader, dispositivo: torch.device) -> Dict[str, float]:
    """
    Pérdidas medias (ponderadas por tamaño de batch) en modo evaluación.
    """
    modelo.eval()
    acumulador = _Acumulador()
    for batch in cargador:
        salida = modelo(batch.to(dispositivo))
        acumulador.agregar(salida.loss_parts, batch.tamano)
    return acumulador.medias()


def _volcar_batch(batch: TokenBatch, salida: Optional[Path], paso: int) -> DivergenceError:
    directorio = salida or Path(tempfile.mkdtemp(prefix="ecqg-divergencia-"))
    directorio.mkdir(parents=True, exist_ok=True)
    ruta = directorio / "divergent_batch.pt"
    batch.save(ruta)
    return DivergenceError(paso, str(ruta))


def _instantanea_metricas(modelo, tokenizador, dataset: ECQGDataset, cantidad: int) -> Dict[str, float]:
    muestras = dataset.validation[:cantidad]
    if not muestras:
        return {}
    filas = [{"id": m.id, "entity": m.entity, "context": m.context} for m in muestras]
    predichas = [p["text"] for p in generate_batch(filas, modelo, tokenizador, strategy="greedy")]
    referencias = [m.question for m in muestras]
    return {
        "bleu4": compute_bleu(predichas, referencias, 4),
        "rouge_l": compute_rouge_l(predichas, referencias),
    }


def train(
    dataset: ECQGDataset,
    config: TrainConfig,
    salida: Optional[Union[str, Path]] = None,
    tokenizador: Optional[PreTrainedTokenizerBase] = None,
    semilla: Optional[int] = None,
    muestras_instantanea: int = 0,
) -> Entrenamiento:
    """
    Optimiza L = L_QG + λ1·L_CF + λ2·L_QV con teacher forcing.

    Se detiene en max_epochs, en max_steps o cuando la pérdida total de
    validación no mejora durante `early_stop_patience` épocas. El checkpoint que
    se persiste es el de la mejor época.

    Args:
        dataset: Particiones train y validation no vacías
        config: Hiperparámetros
        salida: Directorio del checkpoint (opcional)
        tokenizador: Tokenizador a reutilizar (si no, se construye)
        semilla: Semilla de la corrida (por defecto la primera de config.seeds)
        muestras_instantanea: Muestras de validación para BLEU-4/ROUGE_L por época

    Returns:
        Entrenamiento con el modelo en sus mejores pesos
    """
    if not dataset.train or not dataset.validation:
        raise PreconditionError("train y validation deben ser no vacíos")
    semilla = config.seeds[0] if semilla is None else semilla
    directorio = Path(salida) if salida else None
    fijar_semilla(semilla, config.threads)
    dispositivo = elegir_dispositivo(config)

    if tokenizador is None:
        tokenizador = cargar_tokenizador(config, textos_de(dataset.train + dataset.validation))
    modelo = construir_modelo(config, tokenizador).to(dispositivo)

    datos_train = ECQGTorchDataset(dataset.train, tokenizador, config)
    datos_val = ECQGTorchDataset(dataset.validation, tokenizador, config)
    if not len(datos_train) or not len(datos_val):
        raise PreconditionError("ninguna muestra alineable en train o validation")
    pad_id = tokenizador.pad_token_id
    cargador_train = _cargador(datos_train, config, pad_id, True, semilla)
    cargador_val = _cargador(datos_val, config, pad_id, False, semilla)

    pasos_totales = config.max_steps or config.max_epochs * len(cargador_train)
    optimizador = torch.optim.AdamW(
        modelo.parameters(), lr=config.learning_rate, weight_decay=config.weight_decay
    )
    planificador = get_constant_schedule_with_warmup(
        optimizador, num_warmup_steps=math.ceil(config.warmup_fraction * pasos_totales)
    )

    history = TrainHistory(seed=semilla)
    parada = EarlyStopping(config.early_stop_patience)
    mejor_estado = copy.deepcopy(modelo.state_dict())
    logger.info(
        "entrenando %s (modo %s, lr %g, %d muestras) en %s",
        config.backbone_name, config.mode, config.learning_rate, len(datos_train), dispositivo,
    )

    for epoca in range(1, config.max_epochs + 1):
        modelo.train()
        acumulador = _Acumulador()
        for batch in tqdm(cargador_train, desc=f"Época {epoca}", leave=False, disable=len(cargador_train) < 10):
            batch = batch.to(dispositivo)
            optimizador.zero_grad(set_to_none=True)
            salida_modelo = modelo(batch)
            perdida = salida_modelo.loss_total
            if not torch.isfinite(perdida):
                raise _volcar_batch(batch, directorio, history.steps + 1)
            perdida.backward()
            torch.nn.utils.clip_grad_norm_(modelo.parameters(), config.grad_clip)
            optimizador.step()
            planificador.step()

            history.steps += 1
            history.step_losses.append(perdida.item())
            acumulador.agregar(salida_modelo.loss_parts, batch.tamano)
            if config.max_steps and history.steps >= config.max_steps:
                break

        validacion = evaluar_perdidas(modelo, cargador_val, dispositivo)
        metricas = _instantanea_metricas(modelo, tokenizador, dataset, muestras_instantanea) if muestras_instantanea else {}
        history.epochs.append(EpochRecord(epoca, acumulador.medias(), validacion, metricas))
        logger.info(
            "época %d: train %.4f | validación %.4f",
            epoca, history.epochs[-1].train["loss_total"], validacion["loss_total"],
        )

        if parada.actualizar(epoca, validacion["loss_total"]):
            mejor_estado = copy.deepcopy(modelo.state_dict())
        history.best_epoch = parada.mejor_epoca

        if config.max_steps and history.steps >= config.max_steps:
            history.stop_reason = "max_steps"
            break
        if parada.debe_parar:
            history.stop_reason = "early_stop"
            logger.info("parada temprana en la época %d (mejor: %d)", epoca, parada.mejor_epoca)
            break
    else:
        history.stop_reason = "max_epochs"

    modelo.load_state_dict(mejor_estado)
    modelo.eval()
    checkpoint = None
    if directorio is not None:
        checkpoint = guardar_checkpoint(
            directorio, modelo, tokenizador, config, semilla,
            extra={"best_epoch": history.best_epoch, "stop_reason": history.stop_reason},
        )
        history.guardar(directorio / "history.json")
    return Entrenamiento(modelo, tokenizador, history, checkpoint)


@dataclass
class ResultadoBusquedaLR:
    mejor: float
    perdidas: Dict[float, Optional[float]]


def lr_search(
    dataset: ECQGDataset,
    config: TrainConfig,
    grid: Sequence[float] = GRILLA_LR,
) -> ResultadoBusquedaLR:
    """
    Una corrida por tasa; gana la menor pérdida total de validación.

    Las corridas que divergen se descartan.
    """
    if not grid:
        raise PreconditionError("la grilla de learning rates está vacía")
    perdidas: Dict[float, Optional[float]] = {}
    for tasa in grid:
        try:
            resultado = train(dataset, config.con(learning_rate=tasa))
        except DivergenceError as error:
            logger.warning("lr %g divergió: %s", tasa, error)
            perdidas[tasa] = None
            continue
        perdidas[tasa] = resultado.history.mejor_criterio
        logger.info("lr %g -> validación %.4f", tasa, perdidas[tasa])

    supervivientes = {t: p for t, p in perdidas.items() if p is not None}
    if not supervivientes:
        raise ECQGError("todas las tasas de la grilla divergieron")
    mejor = min(supervivientes, key=lambda t: (supervivientes[t], t))
    return ResultadoBusquedaLR(mejor=mejor, perdidas=perdidas)


def multi_seed(
    dataset: ECQGDataset,
    config: TrainConfig,
    salida: Optional[Union[str, Path]] = None,
) -> EvalReport:
    """
    Entrena y evalúa con cada semilla de config.seeds y promedia las métricas.

    Se evalúa sobre test (o validation si test está vacío). Con `salida`, cada
    semilla deja su report.json en seed_<n>/.
    """
    evaluacion = dataset.test or dataset.validation
    filas = [{"id": m.id, "entity": m.entity, "context": m.context} for m in evaluacion]
    estrategia = "greedy" if config.num_beams <= 1 else "beam"
    reportes: List[EvalReport] = []
    for semilla in config.seeds:
        directorio = Path(salida) / f"seed_{semilla}" if salida else None
        resultado = train(dataset, config, salida=directorio, semilla=semilla)
        predichas = generate_batch(
            filas, resultado.modelo, resultado.tokenizador, strategy=estrategia, beam_size=config.num_beams
        )
        reporte = evaluar_pares(
            [m.id for m in evaluacion], [p["text"] for p in predichas], [m.question for m in evaluacion]
        )
        reporte.metadata["seed"] = semilla
        if directorio is not None:
            reporte.guardar(directorio / "report.json")
        reportes.append(reporte)
    return promediar_reportes(reportes)
