from .loader import Dataset, LoadOptions, SampleMoments, compute_moments, load_csv

__all__ = ["Dataset", "LoadOptions", "SampleMoments", "compute_moments", "load_csv"]
