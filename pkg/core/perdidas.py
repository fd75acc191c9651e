"""
Funciones de pérdida: CF, QG, QV y objetivo combinado
"""
from typing import Union

import torch

from core.config import validar_lambdas
from core.errores import ContractError

Escalar = Union[float, torch.Tensor]


def _log_seguro(probabilidades: torch.Tensor) -> torch.Tensor:
    return torch.log(probabilidades.clamp_min(torch.finfo(probabilidades.dtype).tiny))


def entropia_cruzada_tokens(
    probabilidades: torch.Tensor,
    bits: torch.Tensor,
    mask: torch.Tensor,
    literal_positive_only: bool = False,
) -> torch.Tensor:
    """
    Entropía cruzada de dos clases por token; la clase positiva es el índice 0.

    Args:
        probabilidades: [B x L x 2]
        bits: [B x L] etiquetas 0/1
        mask: [B x L], 0 en padding
        literal_positive_only: Usa -Σ bits·log p[0] por muestra (promedio del batch)

    Returns:
        Escalar no negativo
    """
    if probabilidades.shape[:2] != bits.shape or bits.shape != mask.shape:
        raise ContractError(
            f"formas incompatibles: {tuple(probabilidades.shape)}, {tuple(bits.shape)}, {tuple(mask.shape)}"
        )
    mascara = mask.to(probabilidades.dtype)
    denominador = mascara.sum()
    if denominador == 0:
        raise ContractError("batch totalmente enmascarado: la pérdida no está definida")

    positivos = bits.to(probabilidades.dtype) * mascara
    if literal_positive_only:
        return -(positivos * _log_seguro(probabilidades[..., 0])).sum() / probabilidades.shape[0]

    negativos = (1 - bits.to(probabilidades.dtype)) * mascara
    # xlogy evita 0·log(0) = nan en predicciones one-hot exactas
    por_token = torch.xlogy(positivos, probabilidades[..., 0]) + torch.xlogy(
        negativos, probabilidades[..., 1]
    )
    return -por_token.sum() / denominador


def cf_loss(H_F: torch.Tensor, focus_bits: torch.Tensor, mask: torch.Tensor,
            literal_positive_only: bool = False) -> torch.Tensor:
    """
    Pérdida de localización de foco entre H^F y F.
    """
    return entropia_cruzada_tokens(H_F, focus_bits, mask, literal_positive_only)


def qv_loss(H_A: torch.Tensor, answer_bits: torch.Tensor, mask: torch.Tensor,
            literal_positive_only: bool = False) -> torch.Tensor:
    """
    Pérdida de verificación entre H^A y A; mismo contrato que cf_loss.
    """
    return entropia_cruzada_tokens(H_A, answer_bits, mask, literal_positive_only)


def qg_loss(p_Q: torch.Tensor, question_ids: torch.Tensor, question_mask: torch.Tensor) -> torch.Tensor:
    """
    Log-verosimilitud negativa media de los tokens de la pregunta (teacher forcing).

    Args:
        p_Q: Distribuciones de decodificación [B x |Q| x V]
        question_ids: Tokens de referencia [B x |Q|]
        question_mask: [B x |Q|]

    Returns:
        -(1/m) Σ log p_{j, q_j} sobre las m posiciones no enmascaradas
    """
    if p_Q.shape[:2] != question_ids.shape or question_ids.shape != question_mask.shape:
        raise ContractError("formas incompatibles entre p_Q, question_ids y question_mask")
    mascara = question_mask.to(p_Q.dtype)
    m = mascara.sum()
    if m == 0:
        raise ContractError("ningún token de pregunta sin enmascarar")
    oro = p_Q.gather(-1, question_ids.unsqueeze(-1)).squeeze(-1)
    return -(_log_seguro(oro) * mascara).sum() / m


def total_loss(L_QG: Escalar, L_CF: Escalar, L_QV: Escalar, lambda1: Escalar, lambda2: Escalar) -> Escalar:
    """
    L = L_QG + λ1·L_CF + λ2·L_QV con 0 < λ1, λ2 < 1.
    """
    validar_lambdas(float(lambda1), float(lambda2))
    return L_QG + lambda1 * L_CF + lambda2 * L_QV
