from .montecarlo import SimulationDesign, SimulationReport, generate_dataset, run_study

__all__ = ["SimulationDesign", "SimulationReport", "generate_dataset", "run_study"]
