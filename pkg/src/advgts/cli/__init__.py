from .dsl import ModelFile, load_model, parse_model, print_model
from .main import run

__all__ = ["ModelFile", "load_model", "parse_model", "print_model", "run"]
