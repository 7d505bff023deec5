"""Offline hidden-state exporter for the codescore interchange format."""

from .export import ExportJob, detect_markers, export, read_records

__version__ = "0.1.0"
