"""Smallest Dirichlet eigenpairs of the discretized Laplacian."""
