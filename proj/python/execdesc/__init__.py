"""Python access to the execdesc core: load, validate, select, plan, run, resolve."""

from ._execdesc import (  # noqa: F401
    BindError,
    Description,
    ExecutionError,
    LibraryError,
    ParseError,
    PlanError,
    ResolutionError,
    __version__,
    guess,
    load,
    load_file,
    normalize_repo,
    placeholders,
    resolve,
    triples,
)
