"""Nodal-cut iteration and Courant-sharp checks."""
