"""Modular CAD kernel: typed modules with parametric payloads, a bit-packed
codec, regeneration of working geometry and problem-oriented extensions."""

from .codec import decode_compact, encode_compact
from .extension import Engine, Extension, default_engine, run_command
from .fileio import load_drawing, save_drawing
from .model import Drawing, Module, WorkingModule, place_module
from .store import PP, add_object, check_integrity, delete_objects, edit_object, new_pp

__version__ = "0.1.0"
