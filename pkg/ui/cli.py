"""
Interfaz de línea de comandos: build-data, train, generate, eval y gradcheck
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from core.config import TrainConfig
from core.entidades import crear_proveedor_ner
from core.errores import ECQGError, InputError
from services.checkpoint import cargar_checkpoint
from services.dataset_builder import (
    FRACCION_VALIDACION,
    build_dataset,
    cargar_dataset,
    digest_archivo,
    escribir_jsonl,
    guardar_dataset,
    leer_jsonl,
    leer_squad,
)
from services.evaluator import evaluate_corpus
from services.generator import generate, generate_batch
from services.gradcheck import COMPONENTES, grad_check
from services.trainer import fijar_semilla, train
from ui.reportes import fila_puntuaciones, guardar_figura_historial, render_tabla

logger = logging.getLogger(__name__)

FORMATO_LOG = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configurar_logging(nivel: str = "INFO") -> None:
    logging.basicConfig(level=getattr(logging, nivel.upper(), logging.INFO), format=FORMATO_LOG, force=True)


def _invocacion(argv: Sequence[str], entradas: Sequence[Optional[str]]) -> Dict[str, Any]:
    """
    Metadatos de reproducibilidad: argumentos y digest de cada archivo de entrada.
    """
    return {
        "argv": list(argv),
        "inputs": {
            str(ruta): digest_archivo(ruta)
            for ruta in entradas
            if ruta and Path(ruta).is_file()
        },
    }


def _cmd_build_data(args: argparse.Namespace, argv: Sequence[str]) -> int:
    entidades = None
    if args.entities:
        try:
            entidades = json.loads(Path(args.entities).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as error:
            raise InputError(f"no se pudo leer el diccionario de entidades {args.entities}: {error}") from error
    ner = crear_proveedor_ner(args.ner, entidades)

    corpus = leer_squad(args.squad, origin="train")
    if args.squad_dev:
        corpus += leer_squad(args.squad_dev, origin="dev")
    dataset = build_dataset(
        corpus, ner,
        train_fraction=1.0 - args.val_fraction,
        seed=args.seed,
        hilos=args.threads or 1,
    )
    meta = {
        "seed": args.seed,
        "val_fraction": args.val_fraction,
        "ner": {"provider": ner.nombre, "version": ner.version},
        **_invocacion(argv, [args.squad, args.squad_dev, args.entities]),
    }
    estadisticas = guardar_dataset(dataset, args.out, meta)
    print(json.dumps({nombre: estadisticas[nombre]["size"] for nombre in dataset.particiones()}))
    return 0


def _cmd_train(args: argparse.Namespace, argv: Sequence[str]) -> int:
    config = TrainConfig.from_json(args.config) if args.config else TrainConfig()
    if args.mode:
        config = config.con(mode=args.mode)
    if args.threads:
        config = config.con(threads=args.threads)
    dataset = cargar_dataset(args.data)

    resultado = train(dataset, config, salida=args.out)
    salida = Path(args.out)
    guardar_figura_historial(resultado.history, salida / "history.html")
    (salida / "invocation.json").write_text(
        json.dumps(_invocacion(argv, [args.config] + [str(Path(args.data) / f"{p}.jsonl") for p in ("train", "validation")]),
                   indent=2),
        encoding="utf-8",
    )
    print(json.dumps({
        "best_epoch": resultado.history.best_epoch,
        "stop_reason": resultado.history.stop_reason,
        "validation_loss": resultado.history.mejor_criterio,
    }))
    return 0


def _cmd_generate(args: argparse.Namespace, argv: Sequence[str]) -> int:
    fijar_semilla(0, args.threads)
    modelo, tokenizador, _ = cargar_checkpoint(args.ckpt)
    estrategia = "greedy" if args.greedy else "beam"

    if args.input:
        if not args.out:
            raise InputError("--input requiere --out")
        filas = leer_jsonl(args.input)
        predichas = generate_batch(filas, modelo, tokenizador, strategy=estrategia, beam_size=args.beam,
                                   max_len=args.max_len)
        escribir_jsonl(args.out, predichas)
        logger.info("%d preguntas escritas en %s", len(predichas), args.out)
        return 0

    if args.entity is None or args.context is None:
        raise InputError("se requieren --entity y --context (o --input/--out)")
    print(generate(args.entity, args.context, modelo, tokenizador, strategy=estrategia,
                   beam_size=args.beam, max_len=args.max_len))
    return 0


def _cmd_eval(args: argparse.Namespace, argv: Sequence[str]) -> int:
    reporte = evaluate_corpus(args.pred, args.ref, smoothing=args.smoothing)
    reporte.metadata.update(_invocacion(argv, [args.pred, args.ref]))
    if args.out:
        reporte.guardar(args.out)
    if args.table:
        Path(args.table).write_text(render_tabla({args.name: reporte}), encoding="utf-8")
    print(fila_puntuaciones(reporte.puntuaciones()))
    return 0


def _cmd_gradcheck(args: argparse.Namespace, argv: Sequence[str]) -> int:
    config = TrainConfig.toy(hidden_size=args.hidden, toy_heads=2 if args.hidden % 2 == 0 else 1)
    reportes = [
        grad_check(config, component=args.component, step=args.step, tolerance=args.tol, seed=semilla)
        for semilla in range(args.seeds)
    ]
    resumen = {
        "passed": all(r.passed for r in reportes),
        "reports": [r.to_dict() for r in reportes],
    }
    if args.out:
        Path(args.out).write_text(json.dumps(resumen, indent=2), encoding="utf-8")
    for reporte in reportes:
        for parametro in reporte.parameters:
            print(f"seed {reporte.seed} {parametro.path}: {parametro.max_rel_error:.3e} "
                  f"{'OK' if parametro.passed else 'FALLA'}")
    print("PASS" if resumen["passed"] else "FAIL")
    return 0 if resumen["passed"] else 2


def construir_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gencone",
        description="Generación de preguntas centradas en entidades (ECQG)",
    )
    parser.add_argument("--threads", type=int, default=0, help="Máximo de hilos de trabajo (0 = por defecto)")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("build-data", help="Construye el dataset ECQG desde SQuAD")
    p.add_argument("--squad", required=True, help="Archivo SQuAD de entrenamiento")
    p.add_argument("--squad-dev", help="Archivo SQuAD dev (partición test)")
    p.add_argument("--out", required=True)
    p.add_argument("--ner", choices=["stub", "external"], default="external")
    p.add_argument("--entities", help="JSON {entidad: etiqueta} para --ner stub")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--val-fraction", type=float, default=FRACCION_VALIDACION)
    p.set_defaults(func=_cmd_build_data)

    p = sub.add_parser("train", help="Entrena GenCONE")
    p.add_argument("--config", help="TrainConfig en JSON")
    p.add_argument("--data", required=True, help="Directorio generado por build-data")
    p.add_argument("--out", required=True, help="Directorio del checkpoint")
    p.add_argument("--mode", choices=["full", "cf_only", "qv_only", "seq2seq"])
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("generate", help="Genera preguntas con un checkpoint")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--entity")
    p.add_argument("--context")
    decodificacion = p.add_mutually_exclusive_group()
    decodificacion.add_argument("--beam", type=int, default=4)
    decodificacion.add_argument("--greedy", action="store_true")
    p.add_argument("--max-len", type=int, default=32)
    p.add_argument("--input", help="jsonl con {id, entity, context}")
    p.add_argument("--out", help="predictions.jsonl")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("eval", help="BLEU-1..4, METEOR y ROUGE_L de corpus")
    p.add_argument("--pred", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--out", help="report.json")
    p.add_argument("--table", help="Tabla markdown de salida")
    p.add_argument("--name", default="GenCONE", help="Nombre de la fila en la tabla")
    p.add_argument("--smoothing", action="store_true", help="Suavizado de BLEU")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("gradcheck", help="Verifica gradientes por diferencias centrales")
    p.add_argument("--component", choices=sorted(COMPONENTES), default="all")
    p.add_argument("--step", type=float, default=1e-5)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--seeds", type=int, default=5, help="Modelos de juguete a verificar")
    p.add_argument("--hidden", type=int, default=4, help="Dimensión d del modelo de juguete")
    p.add_argument("--out", help="Reporte JSON")
    p.set_defaults(func=_cmd_gradcheck)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """
    Ejecuta un subcomando.

    Returns:
        0 si tuvo éxito, 1 ante errores de uso, 2 ante errores de datos o contrato
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = construir_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as salida:
        return 0 if salida.code in (0, None) else 1

    configurar_logging(args.log_level)
    try:
        return args.func(args, argv)
    except ECQGError as error:
        print(f"error: {error}", file=sys.stderr)
        return 2
