from .export import DEFAULT_HEAD_DIMS, ExportError, ExportSpec, export_features, load_image

__all__ = ["DEFAULT_HEAD_DIMS", "ExportError", "ExportSpec", "export_features", "load_image"]
__version__ = "0.1.0"
