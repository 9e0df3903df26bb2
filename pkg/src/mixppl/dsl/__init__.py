"""Model-file front end: tokenizer, parser, printer and resolver."""
from pathlib import Path

from .lexer import Token, tokenize
from .parser import parse, parse_expr, parse_model
from .printer import format_expr, format_model
from .resolver import resolve

MODELS_DIR = Path(__file__).resolve().parent.parent / "models"


def load_model(source):
    """Resolve a model from a path, a bundled model name, or model text."""
    text = None
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and (source.endswith(".blog") or "/" in source)):
        text = Path(source).read_text(encoding="utf-8")
    elif isinstance(source, str) and source.isidentifier() and (MODELS_DIR / f"{source}.blog").exists():
        text = (MODELS_DIR / f"{source}.blog").read_text(encoding="utf-8")
    else:
        text = source
    return resolve(parse(text))


def bundled_models():
    return sorted(p.stem for p in MODELS_DIR.glob("*.blog"))
