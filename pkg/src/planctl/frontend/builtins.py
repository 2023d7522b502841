"""Signatures of the fixed builtin set."""
from dataclasses import dataclass


@dataclass(frozen=True)
class Signature:
    params: tuple       # positional/named parameter names in order
    required: int       # how many leading params must be bound
    result: str         # "matrix" | "scalar" | "same"
    matrix_params: tuple = ()


BUILTINS = {
    "read": Signature(("path", "format"), 1, "matrix"),
    "matrix": Signature(("data", "rows", "cols"), 3, "matrix"),
    "rand": Signature(("rows", "cols", "min", "max", "sparsity", "seed", "pdf"), 2, "matrix"),
    "seq": Signature(("from", "to", "incr"), 2, "matrix"),
    "nrow": Signature(("target",), 1, "scalar", ("target",)),
    "ncol": Signature(("target",), 1, "scalar", ("target",)),
    "t": Signature(("target",), 1, "matrix", ("target",)),
    "diag": Signature(("target",), 1, "matrix", ("target",)),
    "append": Signature(("left", "right"), 2, "matrix", ("left", "right")),
    "solve": Signature(("A", "b"), 2, "matrix", ("A", "b")),
    "sum": Signature(("target",), 1, "scalar", ("target",)),
}

# write() is a statement, not an expression
WRITE_PARAMS = ("source", "path", "format")

FORMATS = {"binary": "binaryblock", "binaryblock": "binaryblock",
           "text": "textcell", "textcell": "textcell"}


def bind_args(sig: Signature, args: list, kwargs: dict) -> dict:
    """Map positional and named arguments onto parameter names.

    Raises ValueError with a short reason on arity or name mismatch.
    """
    if len(args) > len(sig.params):
        raise ValueError(f"expects at most {len(sig.params)} arguments, got {len(args)}")
    bound = dict(zip(sig.params, args))
    for k, v in kwargs.items():
        if k not in sig.params:
            raise ValueError(f"unknown parameter '{k}'")
        if k in bound:
            raise ValueError(f"parameter '{k}' bound twice")
        bound[k] = v
    missing = [p for p in sig.params[:sig.required] if p not in bound]
    if missing:
        raise ValueError(f"expects {sig.required} arguments, missing {', '.join(missing)}")
    return bound
