"""Motion in-betweening toolkit.

Recurrent transition generation between sparse keyframes: data pipeline,
autodiff engine, generator/critic training, benchmark metrics, CLI and
HTTP inference service.
"""

__version__ = "0.1.0"
