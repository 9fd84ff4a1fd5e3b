"""Reference extensions shipped with the engine."""

from . import axono, spec_table, user

BUILTIN = (axono.EXTENSION, spec_table.EXTENSION, user.EXTENSION)
