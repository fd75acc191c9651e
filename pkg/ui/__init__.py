"""
Módulo UI - Línea de comandos y presentación de reportes
"""
