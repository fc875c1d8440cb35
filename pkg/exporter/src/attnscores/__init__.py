"""Line-level attention score exporter for transformer checkpoints."""

from .exporter import ExportError, export_scores

__all__ = ["ExportError", "export_scores"]
