"""JSON service layer: pydantic schemas plus the application factory."""

from .app import create_app

__all__ = ["create_app"]
