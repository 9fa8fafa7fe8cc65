"""prob-exporter: image classifier outputs to PMAT/CSV probability matrices."""

__version__ = "0.1.0"

from .export import (  # noqa: E402
    ExportError,
    ExportJob,
    ExportResult,
    PreprocessSpec,
    export,
    list_images,
)
