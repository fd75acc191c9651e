"""
Atención dual contexto <-> pregunta (estilo flujo de atención bidireccional)
"""
from typing import Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F

from core.errores import ContractError


def softmax_enmascarado(valores: torch.Tensor, mascara: torch.Tensor, dim: int) -> torch.Tensor:
    """
    Softmax con las posiciones de máscara 0 llevadas a un valor muy negativo.
    """
    relleno = torch.finfo(valores.dtype).min
    return F.softmax(valores.masked_fill(mascara == 0, relleno), dim=dim)


class DualAttention(nn.Module):
    """
    Representación de contexto consciente de la pregunta, H^{C_Q}.

    S[i, j] = w_S · [h^c_i ; h^q_j ; h^c_i ∘ h^q_j]
    H^{C_Q}_i = [h^c_i ; H̃^Q_i ; h^c_i ∘ H̃^Q_i ; h^c_i ∘ h̃^c] · w_CQ
    """

    def __init__(self, d: int):
        """
        Args:
            d: Dimensión oculta
        """
        super().__init__()
        self.d = d
        self.w_s = nn.Linear(3 * d, 1, bias=False)
        # w_CQ ∈ R^{4d x d}; nn.Linear guarda su transpuesta
        self.w_cq = nn.Linear(4 * d, d, bias=False)

    def similitud(self, H_C: torch.Tensor, H_Q: torch.Tensor) -> torch.Tensor:
        """
        Matriz de similitud S [B x |C| x |Q|] sin materializar el tensor [B x C x Q x 3d].
        """
        w_c, w_q, w_cq = self.w_s.weight[0].split(self.d)
        termino_c = H_C @ w_c                                  # (B, C)
        termino_q = H_Q @ w_q                                  # (B, Q)
        termino_cruzado = (H_C * w_cq) @ H_Q.transpose(1, 2)   # (B, C, Q)
        return termino_c.unsqueeze(2) + termino_q.unsqueeze(1) + termino_cruzado

    def forward(
        self,
        H_C: torch.Tensor,
        H_Q: torch.Tensor,
        context_mask: torch.Tensor,
        question_mask: torch.Tensor,
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        if H_C.shape[-1] != self.d or H_Q.shape[-1] != self.d:
            raise ContractError(f"dimensión oculta distinta de {self.d}")
        if (question_mask.sum(dim=1) == 0).any():
            raise ContractError("pregunta totalmente enmascarada: sin objetivo de atención")

        S = self.similitud(H_C, H_Q)

        # Contexto -> pregunta
        a = softmax_enmascarado(S, question_mask.unsqueeze(1), dim=2)   # (B, C, Q)
        H_Q_atendida = torch.bmm(a, H_Q)                                 # (B, C, d)

        # Pregunta -> contexto: máximo por fila sobre el eje de la pregunta
        S_filas = S.masked_fill(question_mask.unsqueeze(1) == 0, torch.finfo(S.dtype).min)
        b = softmax_enmascarado(S_filas.max(dim=2).values, context_mask, dim=1)  # (B, C)
        h_c_atendido = torch.bmm(b.unsqueeze(1), H_C)                    # (B, 1, d)
        H_C_atendido = h_c_atendido.expand_as(H_C)

        fusion = torch.cat(
            [H_C, H_Q_atendida, H_C * H_Q_atendida, H_C * H_C_atendido], dim=-1
        )
        return S, self.w_cq(fusion)
