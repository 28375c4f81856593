"""picon: conformance checking between privacy architectures and protocol models."""

__version__ = "0.1.0"
