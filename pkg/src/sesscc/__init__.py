"""Session programs under the HVK reduction semantics and their utcc encoding."""

__version__ = "0.1.0"
