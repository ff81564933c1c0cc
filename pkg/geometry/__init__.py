"""Curvilinear-rectangle geometry: boundary curves, domain class, rotated frames."""
