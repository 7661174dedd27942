"""Training-free visual token selection under an exact token budget."""

from ._f3a import (
    FormatError,
    MissingEmbeddingError,
    embed,
    evaluate,
    extract_target_phrase,
    format_p_value,
    generate_task,
    methods,
    read_f3t,
    scenarios,
    select,
    set_worker_count,
    sign_test,
    token_demand,
    worker_count,
    write_f3t,
)

__all__ = [
    "FormatError",
    "MissingEmbeddingError",
    "embed",
    "evaluate",
    "extract_target_phrase",
    "format_p_value",
    "generate_task",
    "methods",
    "read_f3t",
    "scenarios",
    "select",
    "set_worker_count",
    "sign_test",
    "token_demand",
    "worker_count",
    "write_f3t",
]
