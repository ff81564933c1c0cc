"""Transfinite meshing, Q1 assembly and spline interpolation of nodal data."""
