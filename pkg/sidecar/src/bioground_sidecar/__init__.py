"""HTTP sidecar serving the bioground scorer wire protocol."""

__version__ = "0.1.0"
