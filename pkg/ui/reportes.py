"""
Tablas de comparación en markdown y figuras del historial de entrenamiento
"""
from pathlib import Path
from typing import Mapping, Union

import plotly.graph_objects as go

from services.evaluator import COLUMNAS, ENCABEZADOS, EvalReport
from services.trainer import PARTES, TrainHistory
from ui.styles import get_color_perdida, get_plotly_template


def fila_puntuaciones(puntuaciones: Mapping[str, float]) -> str:
    """
    Valores en el orden BLEU-1..4, METEOR, ROUGE_L con dos decimales.

    Returns:
        Cadena "40.21 / 29.45 / ..."
    """
    return " / ".join(f"{float(puntuaciones[c]):.2f}" for c in COLUMNAS)


def render_tabla(filas: Mapping[str, Union[EvalReport, Mapping[str, float]]]) -> str:
    """
    Tabla markdown con una fila por sistema.

    Args:
        filas: Nombre de sistema -> EvalReport o diccionario de puntuaciones

    Returns:
        Texto markdown
    """
    lineas = [
        "| | " + " | ".join(ENCABEZADOS) + " |",
        "|---|" + "---|" * len(ENCABEZADOS),
    ]
    for nombre, valores in filas.items():
        puntuaciones = valores.puntuaciones() if isinstance(valores, EvalReport) else valores
        celdas = " | ".join(f"{float(puntuaciones[c]):.2f}" for c in COLUMNAS)
        lineas.append(f"| {nombre} | {celdas} |")
    return "\n".join(lineas) + "\n"


def figura_historial(history: TrainHistory) -> go.Figure:
    """
    Curvas por época de cada término de la pérdida (train continuo, validación punteada).
    """
    fig = go.Figure()
    epocas = [registro.epoch for registro in history.epochs]
    for parte in PARTES:
        color = get_color_perdida(parte)
        fig.add_trace(go.Scatter(
            x=epocas,
            y=[registro.train[parte] for registro in history.epochs],
            mode='lines+markers',
            line=dict(color=color, width=2),
            name=f"{parte} (train)",
            legendgroup=parte,
        ))
        fig.add_trace(go.Scatter(
            x=epocas,
            y=[registro.validation[parte] for registro in history.epochs],
            mode='lines+markers',
            line=dict(color=color, width=2, dash='dot'),
            name=f"{parte} (validación)",
            legendgroup=parte,
        ))
    if history.best_epoch:
        fig.add_vline(x=history.best_epoch, line_dash='dash', line_color='#FF6B2B')

    fig.update_layout(
        **get_plotly_template(),
        title=f'Historial de entrenamiento - parada: {history.stop_reason or "?"}',
        xaxis_title='Época',
        yaxis_title='Pérdida',
        hovermode='x unified',
        height=500
    )
    return fig


def guardar_figura_historial(history: TrainHistory, ruta: Union[str, Path]) -> None:
    figura_historial(history).write_html(str(ruta), include_plotlyjs="cdn")
