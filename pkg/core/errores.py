"""
Jerarquía de excepciones del proyecto
"""
from typing import List


class ECQGError(Exception):
    """
    Error base. La CLI lo traduce a código de salida 2.
    """


class SquadParseError(ECQGError):
    """
    El documento no sigue el esquema SQuAD v2.0.
    """

    def __init__(self, ruta_json: str, detalle: str):
        self.ruta_json = ruta_json
        super().__init__(f"esquema SQuAD inválido en {ruta_json}: {detalle}")


class IntegrityError(ECQGError):
    """
    Un span de respuesta no coincide con el texto del contexto.
    """

    def __init__(self, id_muestra: str, detalle: str):
        self.id_muestra = id_muestra
        super().__init__(f"muestra {id_muestra}: {detalle}")


class PreconditionError(ECQGError):
    pass


class AlignmentError(ECQGError):
    """
    La respuesta no se solapa con ningún token del contexto (p. ej. truncada).
    """


class ContractError(ECQGError):
    """
    Violación de contrato de formas o longitudes dentro del modelo.
    """


class ConfigError(ECQGError):
    pass


class InputError(ECQGError):
    pass


class DivergenceError(ECQGError):
    """
    La pérdida se volvió NaN/inf durante el entrenamiento.
    """

    def __init__(self, paso: int, ruta_volcado: str):
        self.paso = paso
        self.ruta_volcado = ruta_volcado
        super().__init__(
            f"pérdida no finita en el paso {paso}; batch volcado en {ruta_volcado}"
        )


class GradCheckError(ECQGError):
    def __init__(self, ruta_parametro: str, detalle: str):
        self.ruta_parametro = ruta_parametro
        super().__init__(f"{ruta_parametro}: {detalle}")


class MissingIdsError(ECQGError):
    """
    Ids presentes en un archivo y ausentes en el otro.
    """

    def __init__(self, faltantes: List[str]):
        self.faltantes = sorted(faltantes)
        muestra = ", ".join(self.faltantes[:20])
        resto = "" if len(self.faltantes) <= 20 else f" (+{len(self.faltantes) - 20} más)"
        super().__init__(f"ids sin pareja: {muestra}{resto}")
