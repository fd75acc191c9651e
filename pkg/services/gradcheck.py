"""
Verificación de gradientes por diferencias centrales sobre un modelo de juguete
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Sequence

import torch

from core.config import TrainConfig
from core.errores import ConfigError, GradCheckError
from core.modelo import GenconeModel, construir_modelo
from core.perdidas import total_loss
from core.tokenizacion import TokenBatch, construir_tokenizador_palabras
from services.trainer import fijar_semilla

logger = logging.getLogger(__name__)

COMPONENTES: Dict[str, Sequence[str]] = {
    "fusion": ("fusion.weight",),
    "similarity": ("atencion_dual.w_s.weight",),
    "dual_fusion": ("atencion_dual.w_cq.weight",),
    "cf_head": ("clasificador_foco.cabeza.weight", "clasificador_foco.cabeza.bias"),
    "qv_head": ("clasificador_respuesta.cabeza.weight", "clasificador_respuesta.cabeza.bias"),
}
COMPONENTES["all"] = tuple(p for nombres in COMPONENTES.values() for p in nombres)

# gradientes por debajo de esta escala se comparan en absoluto
ESCALA_MINIMA = 1e-5


@dataclass
class ResultadoParametro:
    path: str
    max_rel_error: float
    max_abs_analytic: float
    passed: bool


@dataclass
class GradCheckReport:
    component: str
    step: float
    tolerance: float
    seed: int
    parameters: List[ResultadoParametro] = field(default_factory=list)
    lambda1_derivative: float = 0.0
    L_CF: float = 0.0
    passed: bool = False

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def error_relativo(analitico: torch.Tensor, numerico: torch.Tensor) -> torch.Tensor:
    escala = torch.maximum(analitico.abs(), numerico.abs()).clamp_min(ESCALA_MINIMA)
    return (analitico - numerico).abs() / escala


_VOCABULARIO = (
    "Beyonce rose to fame in the late 1990s as lead singer of girl group Destiny 's Child "
    "When did become popular ? What was she the of"
)


def lote_de_juguete(config: TrainConfig, tamano: int = 2, largo_c: int = 10, largo_q: int = 6) -> TokenBatch:
    """
    Batch aleatorio con padding en la segunda muestra y al menos un bit activo.
    """
    vocabulario = config.vocab_size
    input_ids = torch.randint(3, vocabulario, (tamano, largo_c))
    question_ids = torch.randint(3, vocabulario, (tamano, largo_q))
    attention_mask = torch.ones(tamano, largo_c, dtype=torch.long)
    question_mask = torch.ones(tamano, largo_q, dtype=torch.long)
    if tamano > 1:
        attention_mask[1, -2:] = 0
        question_mask[1, -1:] = 0
        input_ids[1, -2:] = 0
        question_ids[1, -1:] = 0
    bits = torch.zeros(tamano, largo_c, dtype=torch.long)
    bits[:, 3:5] = 1
    return TokenBatch(input_ids, attention_mask, bits, bits.clone(), question_ids, question_mask)


def grad_check(
    config: TrainConfig,
    component: str = "all",
    step: float = 1e-5,
    tolerance: float = 1e-4,
    seed: int = 0,
) -> GradCheckReport:
    """
    Compara gradientes analíticos de loss_total con diferencias centrales.

    El modelo se construye sobre un BART de juguete en doble precisión, sin
    dropout y en modo evaluación.

    Args:
        config: Configuración de juguete (pretrained=False)
        component: fusion, similarity, dual_fusion, cf_head, qv_head o all
        step: Paso de las diferencias centrales
        tolerance: Error relativo máximo admitido
        seed: Semilla de inicialización y del batch

    Returns:
        Reporte por parámetro; `passed` si todos quedan bajo la tolerancia
    """
    if component not in COMPONENTES:
        raise ConfigError(f"componente desconocido: {component}")
    if config.pretrained:
        raise ConfigError("grad_check requiere una configuración de juguete")

    fijar_semilla(seed)
    tokenizador = construir_tokenizador_palabras([_VOCABULARIO])
    # T5LayerNorm calcula la varianza en float32 aun con pesos float64
    config = config.con(
        backbone_family="bart",
        backbone_name="toy-bart",
        dtype="float64",
        dropout=0.0,
        vocab_size=config.vocab_size or len(tokenizador),
    )
    modelo: GenconeModel = construir_modelo(config, tokenizador)
    modelo.eval()
    batch = lote_de_juguete(config)
    parametros = dict(modelo.named_parameters())

    modelo.zero_grad(set_to_none=True)
    salida = modelo(batch)
    salida.loss_total.backward()

    reporte = GradCheckReport(component=component, step=step, tolerance=tolerance, seed=seed)

    # Linealidad del objetivo combinado: dL/dλ1 = L_CF
    lambda1 = torch.tensor(config.lambda1, dtype=torch.float64, requires_grad=True)
    combinada = total_loss(salida.L_QG.detach(), salida.L_CF.detach(), salida.L_QV.detach(),
                           lambda1, config.lambda2)
    (derivada,) = torch.autograd.grad(combinada, lambda1)
    reporte.lambda1_derivative = float(derivada)
    reporte.L_CF = float(salida.L_CF)

    def perdida() -> float:
        return float(modelo(batch).loss_total)

    with torch.no_grad():
        for ruta in COMPONENTES[component]:
            parametro = parametros[ruta]
            analitico = (
                parametro.grad.detach().clone()
                if parametro.grad is not None
                else torch.zeros_like(parametro)
            )
            if not torch.isfinite(analitico).all():
                raise GradCheckError(ruta, "gradiente analítico no finito")

            numerico = torch.zeros_like(parametro)
            plano = parametro.view(-1)
            for i in range(plano.numel()):
                original = plano[i].item()
                plano[i] = original + step
                arriba = perdida()
                plano[i] = original - step
                abajo = perdida()
                plano[i] = original
                numerico.view(-1)[i] = (arriba - abajo) / (2 * step)
            if not torch.isfinite(numerico).all():
                raise GradCheckError(ruta, "gradiente numérico no finito")

            maximo = float(error_relativo(analitico, numerico).max())
            reporte.parameters.append(ResultadoParametro(
                path=ruta,
                max_rel_error=maximo,
                max_abs_analytic=float(analitico.abs().max()),
                passed=maximo <= tolerance,
            ))
            logger.info("%s: error relativo máximo %.3e", ruta, maximo)

    reporte.passed = all(r.passed for r in reporte.parameters) and reporte.lambda1_derivative == reporte.L_CF
    return reporte
