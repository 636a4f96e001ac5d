"""Figure rendering for the OPA cavity simulator's CSV artifacts.

A read-only consumer: every plotted array comes verbatim from a validated
CSV, no physics is recomputed, and a checksum of the plotted arrays is
written next to each image so the pipeline can prove the figure shows
exactly the file contents.
"""

__version__ = "0.1.0"

from .panels import (PanelSpec, RenderResult, SchemaError, arrays_checksum,
                     load_panel_spec, read_table, render)

__all__ = ["PanelSpec", "RenderResult", "SchemaError", "arrays_checksum",
           "load_panel_spec", "read_table", "render", "__version__"]
