"""Delayed wave equation toolkit: simulation, Lyapunov diagnostics,
feasible-region computation and spectral analysis of the 1D
boundary-delay system."""

from ._core import (
    GeometryConstants,
    a0_threshold,
    char_fn,
    gain_threshold,
    feasible,
    feasible_polygon,
    geometry_constants,
    poincare_constant,
    closed_form_weights,
    simulate_interval,
    spectrum,
    trace_constant,
)

__all__ = [
    "GeometryConstants",
    "a0_threshold",
    "char_fn",
    "gain_threshold",
    "feasible",
    "feasible_polygon",
    "geometry_constants",
    "poincare_constant",
    "closed_form_weights",
    "simulate_interval",
    "spectrum",
    "trace_constant",
]
