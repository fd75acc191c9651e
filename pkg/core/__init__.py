"""
Módulo Core - Lógica pura: tipos, reglas de datos, red GenCONE, pérdidas y métricas
"""
