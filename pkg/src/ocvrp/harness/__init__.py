from .experiment import (
    ConvergenceTrace,
    ExperimentSpec,
    RunFailed,
    RunRecord,
    RunReport,
    run_experiment,
    timed_solve,
)
from .export import (
    export_geojson,
    export_solution,
    export_trace,
    format_table,
    load_solution,
    solution_geojson,
    solution_to_dict,
)
from .instances import GeneratorSpec, generate_instance, load_instance, save_instance

__all__ = [
    "ConvergenceTrace",
    "ExperimentSpec",
    "GeneratorSpec",
    "RunFailed",
    "RunRecord",
    "RunReport",
    "export_geojson",
    "export_solution",
    "export_trace",
    "format_table",
    "generate_instance",
    "load_instance",
    "load_solution",
    "run_experiment",
    "save_instance",
    "solution_geojson",
    "solution_to_dict",
    "timed_solve",
]
