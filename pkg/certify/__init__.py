"""Certification of the nodal-line estimates."""
