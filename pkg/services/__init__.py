"""
Módulo Services - Orquestación: dataset, entrenamiento, generación y evaluación
"""
