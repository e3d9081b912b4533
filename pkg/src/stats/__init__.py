from .ols import OlsFit, ols_fit

__all__ = ["OlsFit", "ols_fit"]
