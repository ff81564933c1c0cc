"""Nodal curve extraction, graph derivatives, boundary angles and nodal domains."""
