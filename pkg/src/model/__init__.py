from .dsl import (
    ModelSpec,
    Regression,
    VariableRole,
    classify_roles,
    parse_model,
    read_model_file,
    render_model,
    validate_against_columns,
)

__all__ = [
    "ModelSpec",
    "Regression",
    "VariableRole",
    "classify_roles",
    "parse_model",
    "read_model_file",
    "render_model",
    "validate_against_columns",
]
