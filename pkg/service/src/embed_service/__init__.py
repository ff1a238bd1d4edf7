"""Embedding microservice: per-token and pooled sentence vectors over HTTP."""

from embed_service.app import create_app
from embed_service.encoders import HashedEncoder, load_encoder

__version__ = "0.1.0"

__all__ = ["create_app", "HashedEncoder", "load_encoder", "__version__"]
