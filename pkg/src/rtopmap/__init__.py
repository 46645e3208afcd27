"""rtopmap: build and serve interactive topic maps of research interests."""

__version__ = "0.1.0"
