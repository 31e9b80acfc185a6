"""covault: a partnership harness over a vault-visible memory substrate."""

__version__ = "0.1.0"
