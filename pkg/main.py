"""
GenCONE - Generación de preguntas centradas en entidades
Punto de entrada principal de la línea de comandos
"""
import sys

from ui.cli import run


if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))
