"""Python interface to the slicesim network slice provisioning simulator."""

from ._core import (
    ExperimentSpec,
    Link,
    NetworkGraph,
    SliceSimError,
    config_reference,
    generate_random_graph,
    jain_index,
    run_experiment,
    simple_paths,
    simulate,
    strip_wall_time,
    train,
)

__all__ = [
    "ExperimentSpec",
    "Link",
    "NetworkGraph",
    "SliceSimError",
    "config_reference",
    "generate_random_graph",
    "jain_index",
    "run_experiment",
    "simple_paths",
    "simulate",
    "strip_wall_time",
    "train",
]
