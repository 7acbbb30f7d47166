"""Knowledge-base-assisted semantic communication simulator."""

__version__ = "0.1.0"
